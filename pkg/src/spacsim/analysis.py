"""State diagnostics: fidelity, Wigner function, photon statistics, entropy."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import InvalidArgumentError, PartialTraceRequiredError, ShapeError
from .fock import DensityMatrix, FockVector, partial_trace

__all__ = [
    "WignerGrid",
    "fidelity",
    "wigner",
    "wigner_point",
    "mandel_q",
    "mean_photon_number",
    "photon_distribution",
    "entanglement_entropy",
    "von_neumann_entropy",
    "trace_distance",
    "EIGEN_CLIP",
]

State = FockVector | DensityMatrix

EIGEN_CLIP = 1e-9
RANK_TOL = 1e-13


def _as_matrix(state: State) -> np.ndarray:
    if isinstance(state, FockVector):
        return np.outer(state.amplitudes, state.amplitudes.conj())
    return state.elements


def _psd_factor(mat: np.ndarray) -> np.ndarray:
    """F with F F^dag = mat, keeping only eigenvalues above rounding noise."""
    vals, vecs = np.linalg.eigh((mat + mat.conj().T) / 2)
    keep = vals > RANK_TOL * max(vals.max(initial=0.0), 0.0)
    return vecs[:, keep] * np.sqrt(vals[keep])


def fidelity(a: State, b: State) -> float:
    """|<a|b>|^2 for pure states, Uhlmann fidelity (Tr sqrt(sqrt(a) b sqrt(a)))^2 otherwise."""
    if a.dims != b.dims:
        raise ShapeError(f"dims {a.dims} and {b.dims} differ")
    if isinstance(a, FockVector) and isinstance(b, FockVector):
        return abs(a.inner(b)) ** 2
    if isinstance(a, FockVector) or isinstance(b, FockVector):
        psi, rho = (a, b) if isinstance(a, FockVector) else (b, a)
        val = np.vdot(psi.amplitudes, rho.elements @ psi.amplitudes).real
        return max(float(val), 0.0)
    # trace norm of A^dag B with rho = A A^dag, sigma = B B^dag; dropping noise
    # eigenvalues keeps their square roots (~1e-8) out of the sum
    overlap = _psd_factor(a.elements).conj().T @ _psd_factor(b.elements)
    return float(np.sum(np.linalg.svd(overlap, compute_uv=False)) ** 2)


def trace_distance(a: State, b: State) -> float:
    if a.dims != b.dims:
        raise ShapeError(f"dims {a.dims} and {b.dims} differ")
    diff = _as_matrix(a) - _as_matrix(b)
    return 0.5 * float(np.sum(np.abs(np.linalg.eigvalsh((diff + diff.conj().T) / 2))))


def _single_mode_matrix(state: State) -> np.ndarray:
    if state.n_modes != 1:
        raise PartialTraceRequiredError(
            f"single-mode analysis needs one mode, got dims {state.dims}; trace out the rest first"
        )
    return _as_matrix(state)


def photon_distribution(state: State) -> np.ndarray:
    """p_n = <n|rho|n> for a single-mode state."""
    if state.n_modes != 1:
        raise PartialTraceRequiredError(f"photon distribution needs one mode, got dims {state.dims}")
    if isinstance(state, FockVector):
        return np.abs(state.amplitudes) ** 2
    return np.real(np.diag(state.elements)).copy()


def mean_photon_number(state: State, mode: int | None = None) -> float:
    """<n> of one mode, or of all modes summed when ``mode`` is None."""
    modes = range(state.n_modes) if mode is None else [mode]
    total = 0.0
    for m in modes:
        reduced = state if state.n_modes == 1 else partial_trace(state, [m])
        dist = photon_distribution(reduced)
        total += float(np.arange(dist.size) @ dist)
    return total


def mandel_q(state: State) -> float | None:
    """(<n^2> - <n>^2)/<n> - 1, or None when <n> = 0 (undefined)."""
    dist = photon_distribution(state)
    n = np.arange(dist.size)
    mean = float(n @ dist)
    if mean <= 0.0:
        return None
    var = float((n**2) @ dist) - mean**2
    return var / mean - 1.0


def von_neumann_entropy(rho: DensityMatrix) -> float:
    """Base-2 entropy; eigenvalues in [-EIGEN_CLIP, 0) are treated as zero."""
    vals = rho.eigenvalues()
    if vals.min(initial=0.0) < -EIGEN_CLIP:
        raise InvalidArgumentError(f"density matrix has eigenvalue {vals.min():.3e} < 0")
    vals = vals[vals > 0.0]
    return float(-np.sum(vals * np.log2(vals))) + 0.0


def entanglement_entropy(state: FockVector, partition: Sequence[int]) -> float:
    """Entropy of the reduced state on ``partition`` for a pure multimode state."""
    part = sorted(set(int(k) for k in partition))
    if not part or len(part) >= state.n_modes:
        raise InvalidArgumentError(f"partition {list(partition)} is not a proper nonempty subset")
    if any(not 0 <= k < state.n_modes for k in part):
        raise InvalidArgumentError(f"partition {part} out of range for {state.n_modes} modes")
    return von_neumann_entropy(partial_trace(state, part))


@dataclass(frozen=True, eq=False)
class WignerGrid:
    """W sampled on a rectangular (x, p) grid; ``values[i, j]`` is W(x[j], p[i]).

    Values follow W(0, 0) = 2/pi for the vacuum, so the phase-space measure
    that integrates W to one is d^2 beta = dx dp / 2.
    """

    x: np.ndarray
    p: np.ndarray
    values: np.ndarray

    def integral(self) -> float:
        """Riemann sum of W over d^2 beta = dx dp / 2."""
        dx = self.x[1] - self.x[0] if self.x.size > 1 else 1.0
        dp = self.p[1] - self.p[0] if self.p.size > 1 else 1.0
        return float(self.values.sum() * dx * dp / 2)

    def x_marginal(self) -> np.ndarray:
        """Quadrature density of x, integrating W over p with the same measure."""
        dp = self.p[1] - self.p[0] if self.p.size > 1 else 1.0
        return self.values.sum(axis=0) * dp / 2

    def rows(self):
        """(x, p, W) triples, p-major then x."""
        for i, pv in enumerate(self.p):
            for j, xv in enumerate(self.x):
                yield float(xv), float(pv), float(self.values[i, j])

    def to_dict(self) -> dict:
        return {
            "x": [float(v) for v in self.x],
            "p": [float(v) for v in self.p],
            "w": [[float(v) for v in row] for row in self.values],
        }


def _wigner_sum(rho: np.ndarray, beta: np.ndarray) -> np.ndarray:
    """Laguerre-recursion evaluation of (2/pi) Tr[rho D(beta) Parity D(-beta)].

    ``basis[n]`` holds the Wigner function of |m><n| for the current row m; the
    rows are generated by the three-term recurrence of associated Laguerre
    functions, so no displacement operator is ever truncated.
    """
    dim = rho.shape[0]
    basis = [None] * dim
    basis[0] = np.exp(-2.0 * np.abs(beta) ** 2) * (2.0 / np.pi)
    total = np.real(rho[0, 0]) * basis[0]
    for n in range(1, dim):
        basis[n] = 2.0 * beta * basis[n - 1] / math.sqrt(n)
        total = total + 2.0 * np.real(rho[0, n] * basis[n])
    for m in range(1, dim):
        prev = basis[m]
        basis[m] = (2.0 * np.conj(beta) * prev - math.sqrt(m) * basis[m - 1]) / math.sqrt(m)
        total = total + np.real(rho[m, m] * basis[m])
        for n in range(m + 1, dim):
            nxt = (2.0 * beta * basis[n - 1] - math.sqrt(m) * prev) / math.sqrt(n)
            prev = basis[n]
            basis[n] = nxt
            total = total + 2.0 * np.real(rho[m, n] * basis[n])
    return total


def wigner_point(state: State, x: float, p: float) -> float:
    rho = _single_mode_matrix(state)
    return float(_wigner_sum(rho, np.array((x + 1j * p) / math.sqrt(2.0))))


def wigner(
    state: State,
    x_range: tuple[float, float] = (-5.0, 5.0),
    p_range: tuple[float, float] | None = None,
    resolution: int | tuple[int, int] = 101,
) -> WignerGrid:
    """Wigner function on a grid with beta = (x + i p)/sqrt(2); see WignerGrid for the measure."""
    rho = _single_mode_matrix(state)
    p_range = x_range if p_range is None else p_range
    nx, np_ = (resolution, resolution) if isinstance(resolution, int) else resolution
    if nx < 1 or np_ < 1:
        raise InvalidArgumentError(f"grid resolution must be positive, got {resolution}")
    xs = np.linspace(x_range[0], x_range[1], nx)
    ps = np.linspace(p_range[0], p_range[1], np_)
    xx, pp = np.meshgrid(xs, ps)
    values = _wigner_sum(rho, (xx + 1j * pp) / math.sqrt(2.0))
    return WignerGrid(xs, ps, values)
