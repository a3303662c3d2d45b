"""Truncated Fock-space containers and operator algebra.

Every multimode object is stored as a flat array in row-major mode order
(mode 0 varies slowest), so ``amplitudes.reshape(dims)`` gives the natural
tensor view. All containers are immutable after construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import (
    InvalidArgumentError,
    InvalidDimensionError,
    ShapeError,
    TruncationError,
)

__all__ = [
    "FockVector",
    "DensityMatrix",
    "ModeOperator",
    "CouplingParams",
    "annihilation",
    "creation",
    "number",
    "identity",
    "displacement",
    "two_mode_squeezer",
    "expm",
    "laguerre",
    "tensor",
    "tensor_op",
    "apply",
    "apply_dm",
    "apply_on_modes",
    "partial_trace",
    "edge_population",
    "coherent_guard_dim",
    "default_signal_dim",
    "DEFAULT_IDLER_DIM",
    "MAX_LAMBDA",
]

DEFAULT_IDLER_DIM = 4
MAX_LAMBDA = 0.5


def _readonly(array: np.ndarray) -> np.ndarray:
    array.setflags(write=False)
    return array


def _check_dims(dims: Sequence[int]) -> tuple[int, ...]:
    dims = tuple(int(d) for d in dims)
    if not dims:
        raise InvalidDimensionError("at least one mode is required")
    for d in dims:
        if d < 2:
            raise InvalidDimensionError(f"mode dimension must be >= 2, got {d}")
    return dims


@dataclass(frozen=True, eq=False)
class FockVector:
    """Pure state amplitudes over a truncated (multi)mode Fock basis."""

    dims: tuple[int, ...]
    amplitudes: np.ndarray

    def __post_init__(self):
        dims = _check_dims(self.dims)
        amps = np.array(self.amplitudes, dtype=np.complex128).reshape(-1)
        if amps.size != math.prod(dims):
            raise ShapeError(
                f"{amps.size} amplitudes do not fit dims {dims} (need {math.prod(dims)})"
            )
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "amplitudes", _readonly(amps))

    @property
    def n_modes(self) -> int:
        return len(self.dims)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def normalized(self) -> FockVector:
        n = self.norm()
        if n == 0.0:
            raise InvalidArgumentError("cannot normalize the zero vector")
        return FockVector(self.dims, self.amplitudes / n)

    def is_normalized(self, tol: float = 1e-10) -> bool:
        return abs(self.norm() - 1.0) <= tol

    def inner(self, other: FockVector) -> complex:
        """Return <self|other>."""
        if self.dims != other.dims:
            raise ShapeError(f"dims {self.dims} and {other.dims} differ")
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def as_tensor(self) -> np.ndarray:
        return self.amplitudes.reshape(self.dims)

    def to_dm(self) -> DensityMatrix:
        return DensityMatrix(self.dims, np.outer(self.amplitudes, self.amplitudes.conj()))

    def __mul__(self, scalar: complex) -> FockVector:
        return FockVector(self.dims, self.amplitudes * scalar)

    __rmul__ = __mul__

    def __add__(self, other: FockVector) -> FockVector:
        if self.dims != other.dims:
            raise ShapeError(f"dims {self.dims} and {other.dims} differ")
        return FockVector(self.dims, self.amplitudes + other.amplitudes)

    def __sub__(self, other: FockVector) -> FockVector:
        return self + (-1.0) * other


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Mixed state on a truncated (multi)mode Fock basis."""

    dims: tuple[int, ...]
    elements: np.ndarray

    def __post_init__(self):
        dims = _check_dims(self.dims)
        side = math.prod(dims)
        rho = np.array(self.elements, dtype=np.complex128)
        if rho.shape != (side, side):
            raise ShapeError(f"density matrix shape {rho.shape} does not fit dims {dims}")
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "elements", _readonly(rho))

    @property
    def n_modes(self) -> int:
        return len(self.dims)

    def trace(self) -> float:
        return float(np.trace(self.elements).real)

    def normalized(self) -> DensityMatrix:
        tr = self.trace()
        if tr <= 0.0:
            raise InvalidArgumentError("cannot normalize a density matrix with zero trace")
        return DensityMatrix(self.dims, self.elements / tr)

    def is_hermitian(self, tol: float = 1e-10) -> bool:
        return bool(np.max(np.abs(self.elements - self.elements.conj().T), initial=0.0) <= tol)

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh((self.elements + self.elements.conj().T) / 2)

    def is_valid(self, tol: float = 1e-10) -> bool:
        return (
            self.is_hermitian(tol)
            and abs(self.trace() - 1.0) <= tol
            and bool(self.eigenvalues().min() >= -1e-9)
        )


@dataclass(frozen=True, eq=False)
class ModeOperator:
    """Linear map between truncated Fock spaces (square in every use here)."""

    dims_in: tuple[int, ...]
    dims_out: tuple[int, ...]
    elements: np.ndarray

    def __post_init__(self):
        dims_in = _check_dims(self.dims_in)
        dims_out = _check_dims(self.dims_out)
        mat = np.array(self.elements, dtype=np.complex128)
        if mat.shape != (math.prod(dims_out), math.prod(dims_in)):
            raise ShapeError(
                f"operator shape {mat.shape} does not fit dims {dims_out} x {dims_in}"
            )
        object.__setattr__(self, "dims_in", dims_in)
        object.__setattr__(self, "dims_out", dims_out)
        object.__setattr__(self, "elements", _readonly(mat))

    @classmethod
    def square(cls, dims: Sequence[int], elements: np.ndarray) -> ModeOperator:
        return cls(tuple(dims), tuple(dims), elements)

    def dag(self) -> ModeOperator:
        return ModeOperator(self.dims_out, self.dims_in, self.elements.conj().T)

    def __matmul__(self, other: ModeOperator) -> ModeOperator:
        if self.dims_in != other.dims_out:
            raise ShapeError(f"cannot compose {self.dims_in} with {other.dims_out}")
        return ModeOperator(other.dims_in, self.dims_out, self.elements @ other.elements)

    def __add__(self, other: ModeOperator) -> ModeOperator:
        if (self.dims_in, self.dims_out) != (other.dims_in, other.dims_out):
            raise ShapeError("operator dimensions differ")
        return ModeOperator(self.dims_in, self.dims_out, self.elements + other.elements)

    def __sub__(self, other: ModeOperator) -> ModeOperator:
        return self + (-1.0) * other

    def __mul__(self, scalar: complex) -> ModeOperator:
        return ModeOperator(self.dims_in, self.dims_out, self.elements * scalar)

    __rmul__ = __mul__

    def unitarity_residual(self, exclude_top: int = 0) -> float:
        """Max-norm of U^dag U - I, restricted to levels below the top ``exclude_top`` of each mode."""
        gram = self.elements.conj().T @ self.elements
        residual = np.abs(gram - np.eye(gram.shape[0]))
        if exclude_top:
            keep = _retained_indices(self.dims_in, exclude_top)
            residual = residual[np.ix_(keep, keep)]
        return float(residual.max(initial=0.0))


@dataclass(frozen=True)
class CouplingParams:
    """Effective coupling lambda = V g t and the number of cascaded amplifiers."""

    lam: float
    n_amplifiers: int = 1
    max_lambda: float = MAX_LAMBDA

    def __post_init__(self):
        check_lambda(self.lam, self.max_lambda)
        if int(self.n_amplifiers) < 1:
            raise InvalidArgumentError(f"n_amplifiers must be >= 1, got {self.n_amplifiers}")


def check_lambda(lam: float, max_lambda: float = MAX_LAMBDA) -> float:
    if isinstance(lam, complex) or not np.isfinite(lam):
        raise InvalidArgumentError(f"lambda must be a finite real number, got {lam!r}")
    if not 0.0 <= lam < max_lambda:
        raise InvalidArgumentError(f"lambda must lie in [0, {max_lambda}), got {lam}")
    return float(lam)


def _retained_indices(dims: Sequence[int], exclude_top: int) -> np.ndarray:
    grids = np.meshgrid(*[np.arange(d) for d in dims], indexing="ij")
    mask = np.ones(grids[0].shape, dtype=bool)
    for g, d in zip(grids, dims):
        mask &= g < d - exclude_top
    return np.flatnonzero(mask.reshape(-1))


def coherent_guard_dim(alpha: complex) -> int:
    """Smallest dimension accepted for a coherent amplitude alpha."""
    r = abs(alpha)
    return math.ceil(r * r + 6 * r + 10)


def default_signal_dim(alpha: complex) -> int:
    r = abs(alpha)
    return math.ceil(r * r) + 8 * math.ceil(r) + 12


def check_coherent_guard(dim: int, alpha: complex, extra: int = 0) -> None:
    need = coherent_guard_dim(alpha) + extra
    if dim < need:
        raise TruncationError(
            f"dimension {dim} too small for |alpha|={abs(alpha):.6g}; need at least {need}"
        )


def annihilation(dim: int) -> ModeOperator:
    if dim < 2:
        raise InvalidDimensionError(f"mode dimension must be >= 2, got {dim}")
    return ModeOperator.square((dim,), np.diag(np.sqrt(np.arange(1, dim, dtype=float)), 1))


def creation(dim: int) -> ModeOperator:
    return annihilation(dim).dag()


def number(dim: int) -> ModeOperator:
    if dim < 2:
        raise InvalidDimensionError(f"mode dimension must be >= 2, got {dim}")
    return ModeOperator.square((dim,), np.diag(np.arange(dim, dtype=float)))


def identity(dims: Sequence[int]) -> ModeOperator:
    dims = _check_dims(dims)
    return ModeOperator.square(dims, np.eye(math.prod(dims)))


# Taylor order and scaled-norm threshold: theta^(m+1)/(m+1)! < 1e-22 for theta=0.5, m=18.
_EXPM_ORDER = 18
_EXPM_THETA = 0.5


def expm(matrix: np.ndarray) -> np.ndarray:
    """Matrix exponential by scaling and squaring around a fixed-order Taylor series."""
    a = np.asarray(matrix, dtype=np.complex128)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ShapeError(f"expm needs a square matrix, got shape {a.shape}")
    norm = float(np.linalg.norm(a, 1)) if a.size else 0.0
    squarings = 0
    if norm > _EXPM_THETA:
        squarings = int(math.ceil(math.log2(norm / _EXPM_THETA)))
        a = a / (2.0**squarings)
    eye = np.eye(a.shape[0], dtype=np.complex128)
    result = eye.copy()
    term = eye
    for k in range(1, _EXPM_ORDER + 1):
        term = term @ a / k
        result = result + term
    for _ in range(squarings):
        result = result @ result
    return result


def displacement(dim: int, alpha: complex, guard: bool = True) -> ModeOperator:
    """D(alpha) = exp(alpha a^dag - alpha^* a) on a truncated mode."""
    if guard:
        check_coherent_guard(dim, alpha)
    a = annihilation(dim).elements
    gen = alpha * a.conj().T - np.conj(alpha) * a
    return ModeOperator.square((dim,), expm(gen))


def two_mode_squeezer(dim1: int, dim2: int, r: float) -> ModeOperator:
    """exp[r (a1^dag a2^dag - a1 a2)] on a pair of truncated modes.

    The truncated generator stays anti-Hermitian, so the result is unitary to
    rounding; truncation only distorts amplitudes near the top levels.
    """
    a1 = annihilation(dim1).elements
    a2 = annihilation(dim2).elements
    pair = np.kron(a1, a2)
    return ModeOperator.square((dim1, dim2), expm(r * (pair.conj().T - pair)))


def laguerre(m: int, x: float) -> float:
    """L_m(x) from its finite power sum, evaluated exactly and rounded once."""
    if m < 0:
        raise InvalidArgumentError(f"Laguerre degree must be >= 0, got {m}")
    xf = Fraction(x)
    total = sum(
        Fraction((-1) ** n * math.comb(m, n), math.factorial(n)) * xf**n for n in range(m + 1)
    )
    return float(total)


def tensor(parts: Sequence[FockVector]) -> FockVector:
    if not parts:
        raise InvalidArgumentError("tensor needs at least one state")
    amps = parts[0].amplitudes
    dims = list(parts[0].dims)
    for p in parts[1:]:
        amps = np.kron(amps, p.amplitudes)
        dims.extend(p.dims)
    return FockVector(tuple(dims), amps)


def tensor_op(parts: Sequence[ModeOperator]) -> ModeOperator:
    if not parts:
        raise InvalidArgumentError("tensor_op needs at least one operator")
    mat = parts[0].elements
    dims_in = list(parts[0].dims_in)
    dims_out = list(parts[0].dims_out)
    for p in parts[1:]:
        mat = np.kron(mat, p.elements)
        dims_in.extend(p.dims_in)
        dims_out.extend(p.dims_out)
    return ModeOperator(tuple(dims_in), tuple(dims_out), mat)


def apply(op: ModeOperator, state: FockVector) -> FockVector:
    if op.dims_in != state.dims:
        raise ShapeError(f"operator expects dims {op.dims_in}, state has {state.dims}")
    return FockVector(op.dims_out, op.elements @ state.amplitudes)


def apply_dm(op: ModeOperator, rho: DensityMatrix) -> DensityMatrix:
    """U rho U^dag."""
    if op.dims_in != rho.dims:
        raise ShapeError(f"operator expects dims {op.dims_in}, state has {rho.dims}")
    u = op.elements
    return DensityMatrix(op.dims_out, u @ rho.elements @ u.conj().T)


def apply_on_modes(op: ModeOperator, state: FockVector, modes: Sequence[int]) -> FockVector:
    """Apply an operator acting on a subset of modes, identity elsewhere."""
    modes = list(modes)
    if len(set(modes)) != len(modes) or any(not 0 <= m < state.n_modes for m in modes):
        raise ShapeError(f"invalid mode selection {modes} for {state.n_modes} modes")
    sub = tuple(state.dims[m] for m in modes)
    if op.dims_in != sub or op.dims_out != sub:
        raise ShapeError(f"operator dims {op.dims_in} do not match modes {modes} with dims {sub}")
    k = len(modes)
    op_t = op.elements.reshape(sub + sub)
    psi = np.tensordot(op_t, state.as_tensor(), axes=(list(range(k, 2 * k)), modes))
    psi = np.moveaxis(psi, list(range(k)), modes)
    return FockVector(state.dims, psi.reshape(-1))


def partial_trace(state: FockVector | DensityMatrix, keep: Sequence[int]) -> DensityMatrix:
    """Reduced density matrix on the modes listed in ``keep`` (kept in ascending order)."""
    keep = sorted(set(int(k) for k in keep))
    n = state.n_modes
    if not keep or any(not 0 <= k < n for k in keep):
        raise InvalidArgumentError(f"invalid modes to keep: {keep}")
    traced = [m for m in range(n) if m not in keep]
    kept_dims = tuple(state.dims[k] for k in keep)
    side = math.prod(kept_dims)
    if isinstance(state, FockVector):
        psi = np.moveaxis(state.as_tensor(), keep, list(range(len(keep))))
        mat = psi.reshape(side, -1)
        return DensityMatrix(kept_dims, mat @ mat.conj().T)
    rho = state.elements.reshape(state.dims + state.dims)
    for offset, m in enumerate(sorted(traced, reverse=True)):
        cur = n - offset
        rho = np.trace(rho, axis1=m, axis2=m + cur)
    return DensityMatrix(kept_dims, rho.reshape(side, side))


def edge_population(state: FockVector | DensityMatrix, modes: Sequence[int] | None = None) -> float:
    """Total probability sitting on the top truncation level of the selected modes.

    A proxy for the norm that hard truncation would discard on further evolution.
    """
    modes = range(state.n_modes) if modes is None else modes
    total = 0.0
    for m in modes:
        dist = np.real(np.diag(partial_trace(state, [m]).elements))
        total += float(dist[-1])
    return total
