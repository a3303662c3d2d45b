"""Thermal noise on the signal input.

Thermal light is carried as a density matrix on the physical mode. The
thermo-field (doubled-space) construction is kept only as a small-dimension
cross-check, see :func:`tfd_reduced_thermal`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .amplifier import MAX_LEAKAGE, amplifier_unitary
from .analysis import fidelity
from .errors import InvalidArgumentError, NormLeakageError, ShapeError
from .fock import (
    DEFAULT_IDLER_DIM,
    DensityMatrix,
    FockVector,
    apply_dm,
    displacement,
    edge_population,
    partial_trace,
    two_mode_squeezer,
)
from .herald import HeraldPattern, project
from .states import fock, pacs, thermal

__all__ = [
    "ThermalParams",
    "ThermalHerald",
    "bogoliubov_coeffs",
    "thermal_coherent_input",
    "evolve_thermal",
    "heralded_thermal_spacs",
    "tfd_reduced_thermal",
]


def _check_nbar(nbar: float) -> float:
    if not np.isfinite(nbar) or nbar < 0:
        raise InvalidArgumentError(f"mean thermal occupation must be >= 0, got {nbar}")
    return float(nbar)


@dataclass(frozen=True)
class ThermalParams:
    """Mean thermal occupation and the heating angle with sinh^2(theta) = nbar."""

    nbar: float

    def __post_init__(self):
        _check_nbar(self.nbar)

    @property
    def theta(self) -> float:
        return math.asinh(math.sqrt(self.nbar))

    @property
    def u(self) -> float:
        return math.sqrt(self.nbar + 1.0)

    @property
    def v(self) -> float:
        return math.sqrt(self.nbar)


def bogoliubov_coeffs(nbar: float) -> tuple[float, float]:
    """(u, v) = (sqrt(nbar + 1), sqrt(nbar)), so u^2 - v^2 = 1."""
    params = ThermalParams(nbar)
    return params.u, params.v


def thermal_coherent_input(dim: int, alpha: complex, nbar: float) -> DensityMatrix:
    """Displaced thermal state D(alpha) rho_th(nbar) D(alpha)^dag."""
    rho = thermal(dim, _check_nbar(nbar))
    if alpha == 0:
        return rho
    return apply_dm(displacement(dim, alpha), rho)


def evolve_thermal(
    rho: DensityMatrix,
    lam: float,
    idler_dim: int = DEFAULT_IDLER_DIM,
    max_leakage: float = MAX_LEAKAGE,
) -> DensityMatrix:
    """U (rho x |0><0|_idler) U^dag for a single amplifier."""
    if rho.n_modes != 1:
        raise ShapeError(f"expected a single-mode signal, got dims {rho.dims}")
    u = amplifier_unitary(rho.dims[0], idler_dim, lam)
    idler_vac = fock(idler_dim, 0).to_dm()
    joint = DensityMatrix(rho.dims + (idler_dim,), np.kron(rho.elements, idler_vac.elements))
    out = apply_dm(u, joint)
    leak = edge_population(out)
    if leak > max_leakage:
        raise NormLeakageError(
            f"truncation-edge population {leak:.3e} exceeds budget {max_leakage:.1e}"
        )
    return out


@dataclass(frozen=True, eq=False)
class ThermalHerald:
    signal_state: DensityMatrix | None
    probability: float
    ideal_fidelity: float | None = None

    @property
    def defined(self) -> bool:
        return self.signal_state is not None


def heralded_thermal_spacs(rho_out: DensityMatrix, alpha: complex | None = None) -> ThermalHerald:
    """Condition a (signal, idler) state on one idler photon.

    With ``alpha`` given, the result also carries the fidelity to the ideal
    single-photon-added coherent state built at the same truncation.
    """
    if rho_out.n_modes != 2:
        raise ShapeError(f"expected a two-mode state, got dims {rho_out.dims}")
    res = project(rho_out, HeraldPattern.exact((1,)))
    if not res.defined:
        return ThermalHerald(None, 0.0, None)
    signal = res.signal_state
    fid = None
    if alpha is not None:
        fid = fidelity(pacs(rho_out.dims[0], alpha, 1), signal)
    return ThermalHerald(signal, res.probability, fid)


def tfd_reduced_thermal(dim: int, nbar: float) -> DensityMatrix:
    """Heat the doubled vacuum |0, 0~> with exp[-theta(a a~ - a^dag a~^dag)], trace out a~.

    Independent route to the thermal state; the result is renormalized after
    truncation of both modes.
    """
    theta = ThermalParams(nbar).theta
    heater = two_mode_squeezer(dim, dim, theta).elements
    vac = np.zeros(dim * dim, dtype=np.complex128)
    vac[0] = 1.0
    state = FockVector((dim, dim), heater @ vac)
    return partial_trace(state, [0]).normalized()
