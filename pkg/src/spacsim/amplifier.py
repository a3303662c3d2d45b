"""Parametric-amplifier evolution: exact two-mode unitary, its low-order series,
and sequential cascades of amplifiers sharing one signal mode."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence

import numpy as np

from .errors import InvalidArgumentError, NormLeakageError, ShapeError
from .fock import (
    DEFAULT_IDLER_DIM,
    MAX_LAMBDA,
    FockVector,
    ModeOperator,
    annihilation,
    apply_on_modes,
    check_lambda,
    edge_population,
    tensor,
    two_mode_squeezer,
)
from .states import coherent, fock

__all__ = [
    "CascadeLayout",
    "Stage",
    "amplifier_unitary",
    "amplifier_generator",
    "perturbative_output",
    "evolve_stages",
    "evolve_cascade",
    "cascade_input",
    "MAX_LEAKAGE",
]

MAX_LEAKAGE = 1e-6


@dataclass(frozen=True)
class CascadeLayout:
    """N amplifiers sharing one signal mode; mode 0 is the signal, idler j is mode j+1."""

    signal_dim: int
    idler_dims: tuple[int, ...]
    lambdas: tuple[float, ...]
    max_lambda: float = field(default=MAX_LAMBDA, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "idler_dims", tuple(int(d) for d in self.idler_dims))
        object.__setattr__(self, "lambdas", tuple(float(x) for x in self.lambdas))
        if len(self.idler_dims) < 1:
            raise InvalidArgumentError("a cascade needs at least one amplifier")
        if len(self.lambdas) != len(self.idler_dims):
            raise InvalidArgumentError(
                f"{len(self.lambdas)} couplings given for {len(self.idler_dims)} idlers"
            )
        for lam in self.lambdas:
            check_lambda(lam, self.max_lambda)

    @classmethod
    def uniform(
        cls, signal_dim: int, n_amplifiers: int, lam: float, idler_dim: int = DEFAULT_IDLER_DIM
    ) -> CascadeLayout:
        return cls(signal_dim, (idler_dim,) * n_amplifiers, (lam,) * n_amplifiers)

    @property
    def n_amplifiers(self) -> int:
        return len(self.idler_dims)

    @property
    def dims(self) -> tuple[int, ...]:
        return (self.signal_dim, *self.idler_dims)


@dataclass(frozen=True)
class Stage:
    """One amplifier coupling ``signal_mode`` to ``idler_mode`` with strength ``lam``."""

    signal_mode: int
    idler_mode: int
    lam: float


def amplifier_generator(signal_dim: int, idler_dim: int) -> ModeOperator:
    """a_s^dag a_i^dag - a_s a_i on the (signal, idler) pair."""
    pair = np.kron(annihilation(signal_dim).elements, annihilation(idler_dim).elements)
    return ModeOperator.square((signal_dim, idler_dim), pair.conj().T - pair)


@lru_cache(maxsize=64)
def _cached_unitary(signal_dim: int, idler_dim: int, lam: float) -> ModeOperator:
    return two_mode_squeezer(signal_dim, idler_dim, lam)


def amplifier_unitary(
    signal_dim: int, idler_dim: int, lam: float, max_lambda: float = MAX_LAMBDA
) -> ModeOperator:
    """exp[lambda (a_s^dag a_i^dag - a_s a_i)] on the truncated signal x idler space."""
    lam = check_lambda(lam, max_lambda)
    return _cached_unitary(int(signal_dim), int(idler_dim), lam)


def perturbative_output(
    alpha: complex,
    lam: float,
    order: int,
    signal_dim: int,
    idler_dim: int = DEFAULT_IDLER_DIM,
) -> FockVector:
    """Series expansion of the amplifier acting on |alpha>|0>, unnormalized.

    Order 1 keeps |alpha>|0> + lambda G|alpha>|0>; order 2 adds lambda^2/2 G^2|alpha>|0>
    with G the two-mode generator, exactly as the matrix powers produce it.
    """
    if order not in (1, 2):
        raise InvalidArgumentError(f"perturbative order must be 1 or 2, got {order}")
    check_lambda(lam)
    psi0 = tensor([coherent(signal_dim, alpha), fock(idler_dim, 0)]).amplitudes
    gen = amplifier_generator(signal_dim, idler_dim).elements
    term = gen @ psi0
    out = psi0 + lam * term
    if order == 2:
        out = out + lam**2 / 2 * (gen @ term)
    return FockVector((signal_dim, idler_dim), out)


def evolve_stages(
    state: FockVector, stages: Sequence[Stage], max_leakage: float = MAX_LEAKAGE
) -> FockVector:
    """Apply amplifiers one after another in the listed order and normalize.

    Raises NormLeakageError when the output population on the truncation edge of
    any mode exceeds ``max_leakage``.
    """
    for stage in stages:
        dims = (state.dims[stage.signal_mode], state.dims[stage.idler_mode])
        u = amplifier_unitary(*dims, stage.lam)
        state = apply_on_modes(u, state, (stage.signal_mode, stage.idler_mode))
    state = state.normalized()
    leak = edge_population(state)
    if leak > max_leakage:
        raise NormLeakageError(
            f"truncation-edge population {leak:.3e} exceeds budget {max_leakage:.1e}"
        )
    return state


def cascade_input(signal: FockVector, layout: CascadeLayout) -> FockVector:
    """Signal state followed by vacuum in every idler."""
    if signal.dims != (layout.signal_dim,):
        raise ShapeError(f"signal dims {signal.dims} do not match layout {layout.signal_dim}")
    return tensor([signal, *(fock(d, 0) for d in layout.idler_dims)])


def evolve_cascade(
    state: FockVector, layout: CascadeLayout, max_leakage: float = MAX_LEAKAGE
) -> FockVector:
    """Send the signal (mode 0) through amplifiers j = 1..N, each coupling it to idler j."""
    if state.dims != layout.dims:
        raise ShapeError(f"state dims {state.dims} do not match cascade dims {layout.dims}")
    stages = [Stage(0, j + 1, lam) for j, lam in enumerate(layout.lambdas)]
    return evolve_stages(state, stages, max_leakage)
