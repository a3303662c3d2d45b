"""Constructors for the named states used throughout the simulator.

All constructors return unit-norm states. Where a textbook expression omits its
normalization (W, |II>_3, entangled coherent states) the normalization is
computed from the actual vector.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgumentError, OutOfRangeError, TruncationError
from .fock import (
    DensityMatrix,
    FockVector,
    check_coherent_guard,
    creation,
    laguerre,
    tensor,
)

__all__ = [
    "PacsSpec",
    "EcsSpec",
    "fock",
    "vacuum",
    "coherent",
    "pacs",
    "pacs_norm_squared",
    "thermal",
    "ecs",
    "ecs_branch_overlap",
    "w_state",
    "ii3_state",
    "excitation_state",
    "COHERENT_NORM_TOL",
    "THERMAL_TRACE_TOL",
]

COHERENT_NORM_TOL = 1e-8
THERMAL_TRACE_TOL = 1e-6

_ECS_PHASE = np.exp(-1j * np.pi / 4)


@dataclass(frozen=True)
class PacsSpec:
    alpha: complex
    m: int

    def __post_init__(self):
        if self.m < 0:
            raise InvalidArgumentError(f"number of added photons must be >= 0, got {self.m}")


@dataclass(frozen=True)
class EcsSpec:
    alpha: complex
    beta: complex


def fock(dim: int, n: int) -> FockVector:
    if not 0 <= n < dim:
        raise OutOfRangeError(f"Fock level {n} outside truncation dim {dim}")
    amps = np.zeros(dim, dtype=np.complex128)
    amps[n] = 1.0
    return FockVector((dim,), amps)


def vacuum(dims) -> FockVector:
    amps = np.zeros(math.prod(dims), dtype=np.complex128)
    amps[0] = 1.0
    return FockVector(tuple(dims), amps)


def _coherent_amplitudes(dim: int, alpha: complex) -> np.ndarray:
    amps = np.empty(dim, dtype=np.complex128)
    amps[0] = np.exp(-abs(alpha) ** 2 / 2)
    for n in range(1, dim):
        amps[n] = amps[n - 1] * alpha / math.sqrt(n)
    return amps


def coherent(dim: int, alpha: complex) -> FockVector:
    """|alpha> with Poisson amplitudes, renormalized after truncation."""
    check_coherent_guard(dim, alpha)
    amps = _coherent_amplitudes(dim, complex(alpha))
    norm = np.linalg.norm(amps)
    if 1.0 - norm**2 > COHERENT_NORM_TOL:
        raise TruncationError(
            f"coherent state alpha={alpha} loses {1 - norm**2:.3e} probability at dim {dim}"
        )
    return FockVector((dim,), amps / norm)


def pacs_norm_squared(alpha: complex, m: int) -> float:
    """||(a^dag)^m |alpha>||^2 = m! L_m(-|alpha|^2)."""
    return math.factorial(m) * laguerre(m, -abs(alpha) ** 2)


def pacs(dim: int, alpha: complex, m: int) -> FockVector:
    """Photon-added coherent state (a^dag)^m |alpha> / sqrt(m! L_m(-|alpha|^2))."""
    PacsSpec(alpha, m)
    check_coherent_guard(dim, alpha, extra=m)
    state = coherent(dim, alpha).amplitudes
    adag = creation(dim).elements
    for _ in range(m):
        state = adag @ state
    return FockVector((dim,), state / math.sqrt(pacs_norm_squared(alpha, m)))


def thermal(dim: int, nbar: float) -> DensityMatrix:
    """Bose-Einstein diagonal state with mean occupation nbar."""
    if nbar < 0 or not np.isfinite(nbar):
        raise InvalidArgumentError(f"mean thermal occupation must be >= 0, got {nbar}")
    n = np.arange(dim)
    if nbar == 0:
        probs = (n == 0).astype(float)
    else:
        probs = (nbar / (1 + nbar)) ** n / (1 + nbar)
    deficit = 1.0 - probs.sum()
    if deficit > THERMAL_TRACE_TOL:
        raise TruncationError(
            f"thermal state nbar={nbar} loses {deficit:.3e} probability at dim {dim}"
        )
    return DensityMatrix((dim,), np.diag(probs / probs.sum()))


def ecs_branch_overlap(alpha: complex, beta: complex) -> complex:
    """<i beta|-alpha><i alpha|beta> from the closed-form coherent overlap."""

    def overlap(g: complex, d: complex) -> complex:
        return complex(np.exp(-abs(g) ** 2 / 2 - abs(d) ** 2 / 2 + np.conj(g) * d))

    return overlap(1j * beta, -alpha) * overlap(1j * alpha, beta)


def ecs(dim: int, alpha: complex, beta: complex) -> FockVector:
    """Sanders entangled coherent state on two modes of equal truncation.

    e^{-i pi/4} |i beta>|i alpha> + e^{i pi/4} |-alpha>|beta>, normalized by
    the actual branch overlap rather than 1/sqrt(2).
    """
    EcsSpec(alpha, beta)
    first = tensor([coherent(dim, 1j * beta), coherent(dim, 1j * alpha)])
    second = tensor([coherent(dim, -alpha), coherent(dim, beta)])
    return (_ECS_PHASE * first + np.conj(_ECS_PHASE) * second).normalized()


def excitation_state(n_modes: int, excitations: int) -> FockVector:
    """Equal superposition of all dim-2 basis states with the given excitation count."""
    amps = np.zeros(2**n_modes, dtype=np.complex128)
    for ones in itertools.combinations(range(n_modes), excitations):
        idx = sum(1 << (n_modes - 1 - k) for k in ones)
        amps[idx] = 1.0
    return FockVector((2,) * n_modes, amps).normalized()


def w_state(n_modes: int) -> FockVector:
    if n_modes < 2:
        raise InvalidArgumentError(f"W state needs at least 2 modes, got {n_modes}")
    return excitation_state(n_modes, 1)


def ii3_state() -> FockVector:
    """(|110> + |011> + |101>)/sqrt(3)."""
    return excitation_state(3, 2)
