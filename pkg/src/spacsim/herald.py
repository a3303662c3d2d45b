"""Heralding by ideal photon-number-resolving detection on idler modes.

States are laid out with the signal mode(s) first and the idlers after them;
``n_signal`` says how many leading modes are signals.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import InvalidArgumentError, ShapeError
from .fock import DensityMatrix, FockVector, laguerre, tensor
from .states import fock

__all__ = [
    "HeraldPattern",
    "HeraldResult",
    "project",
    "coincidence_select",
    "outcome_distribution",
    "herald_probability_reference",
    "combinatorial_reference",
    "EXACT",
    "ANY_SINGLE",
    "COINCIDENCE",
    "ANY_COINCIDENCE",
]

EXACT = "exact-counts"
ANY_SINGLE = "any-single-click"
COINCIDENCE = "coincidence-pair"
ANY_COINCIDENCE = "any-coincidence"
_KINDS = (EXACT, ANY_SINGLE, COINCIDENCE, ANY_COINCIDENCE)

# Below this the conditional state is reported as undefined.
ZERO_PROBABILITY = 1e-300


@dataclass(frozen=True)
class HeraldPattern:
    """Which detector outcomes count as a successful herald.

    ``among`` restricts the click-type patterns to a subset of idlers; every
    other idler must stay dark.
    """

    kind: str
    counts: tuple[int, ...] | None = None
    pair: tuple[int, int] | None = None
    among: tuple[int, ...] | None = None

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise InvalidArgumentError(f"unknown herald kind {self.kind!r}; expected one of {_KINDS}")
        if self.kind == EXACT:
            if self.counts is None or any(c < 0 for c in self.counts):
                raise InvalidArgumentError("exact-counts pattern needs non-negative counts")
            object.__setattr__(self, "counts", tuple(int(c) for c in self.counts))
        if self.kind == COINCIDENCE:
            if self.pair is None or len(self.pair) != 2 or self.pair[0] == self.pair[1]:
                raise InvalidArgumentError("coincidence-pair pattern needs two distinct idler indices")
            object.__setattr__(self, "pair", (int(self.pair[0]), int(self.pair[1])))
        if self.among is not None:
            object.__setattr__(self, "among", tuple(sorted(set(int(k) for k in self.among))))

    @classmethod
    def exact(cls, counts: Sequence[int]) -> HeraldPattern:
        return cls(EXACT, counts=tuple(counts))

    @classmethod
    def any_single(cls, among: Sequence[int] | None = None) -> HeraldPattern:
        return cls(ANY_SINGLE, among=None if among is None else tuple(among))

    @classmethod
    def coincidence(cls, i: int, j: int) -> HeraldPattern:
        return cls(COINCIDENCE, pair=(i, j))

    @classmethod
    def any_coincidence(cls, among: Sequence[int] | None = None) -> HeraldPattern:
        return cls(ANY_COINCIDENCE, among=None if among is None else tuple(among))

    def active_idlers(self, n_idlers: int) -> tuple[int, ...]:
        if self.kind == COINCIDENCE:
            return tuple(sorted(self.pair))
        if self.among is None:
            return tuple(range(n_idlers))
        return self.among

    def outcomes(self, n_idlers: int) -> list[tuple[int, ...]]:
        """Exact per-idler photon counts making up this pattern, in a fixed order."""
        if self.kind == EXACT:
            if len(self.counts) != n_idlers:
                raise ShapeError(f"pattern has {len(self.counts)} counts for {n_idlers} idlers")
            return [self.counts]
        active = self.active_idlers(n_idlers)
        if any(not 0 <= k < n_idlers for k in active):
            raise ShapeError(f"idler indices {active} out of range for {n_idlers} idlers")
        clicks = 1 if self.kind == ANY_SINGLE else 2
        if self.kind == COINCIDENCE:
            chosen = [active]
        else:
            chosen = list(itertools.combinations(active, clicks))
        out = []
        for group in chosen:
            counts = [0] * n_idlers
            for k in group:
                counts[k] = 1
            out.append(tuple(counts))
        return out

    def to_dict(self) -> dict:
        d: dict = {"kind": self.kind}
        if self.counts is not None:
            d["counts"] = list(self.counts)
        if self.pair is not None:
            d["pair"] = list(self.pair)
        if self.among is not None:
            d["among"] = list(self.among)
        return d


@dataclass(frozen=True, eq=False)
class HeraldResult:
    """Outcome of conditioning on a herald pattern.

    ``signal_state`` is a FockVector when the conditional signal is pure (a
    single exact outcome on a pure input) and a DensityMatrix otherwise.
    ``idler_state`` lives on the pattern's active idlers; click-type patterns
    embed each of them in levels {0, 1}. ``joint_state`` is the normalized
    conditional pure state on signals plus active idlers, when the input is pure.
    """

    probability: float
    signal_state: FockVector | DensityMatrix | None
    idler_state: FockVector | DensityMatrix | None
    joint_state: FockVector | None = None
    outcome_probabilities: dict = field(default_factory=dict)

    @property
    def defined(self) -> bool:
        return self.signal_state is not None


def _check_layout(dims: tuple[int, ...], n_signal: int) -> int:
    if not 1 <= n_signal < len(dims):
        raise ShapeError(f"need at least one signal and one idler mode, got dims {dims}")
    return len(dims) - n_signal


def _check_counts(outcome: tuple[int, ...], idler_dims: tuple[int, ...]) -> None:
    for c, d in zip(outcome, idler_dims):
        if c >= d:
            raise ShapeError(f"count {c} exceeds idler truncation {d}")


def _click_index(outcome: tuple[int, ...], active: tuple[int, ...]) -> int:
    idx = 0
    for k in active:
        idx = idx * 2 + outcome[k]
    return idx


def project(state: FockVector | DensityMatrix, pattern: HeraldPattern, n_signal: int = 1) -> HeraldResult:
    """Project the idlers onto ``pattern`` and return the conditional states.

    The probability is the total weight of the selected outcome blocks; it is
    never renormalized. A zero-probability herald gives a result with
    ``defined == False`` instead of raising.
    """
    dims = state.dims
    n_idlers = _check_layout(dims, n_signal)
    idler_dims = dims[n_signal:]
    signal_dims = dims[:n_signal]
    outcomes = pattern.outcomes(n_idlers)
    for o in outcomes:
        _check_counts(o, idler_dims)
    active = pattern.active_idlers(n_idlers)
    sig_side = math.prod(signal_dims)
    lead = (slice(None),) * n_signal

    if isinstance(state, FockVector):
        t = state.as_tensor()
        blocks = [t[lead + o].reshape(sig_side) for o in outcomes]
        probs = [float(np.vdot(b, b).real) for b in blocks]
    else:
        r = state.elements.reshape(dims + dims)
        blocks = [r[lead + o + lead + o].reshape(sig_side, sig_side) for o in outcomes]
        probs = [float(np.trace(b).real) for b in blocks]

    per_outcome = {o: p for o, p in zip(outcomes, probs)}
    total = float(sum(probs))
    if total <= ZERO_PROBABILITY:
        return HeraldResult(0.0, None, None, None, per_outcome)

    single = len(outcomes) == 1
    joint = None
    if isinstance(state, FockVector):
        if single:
            signal = FockVector(signal_dims, blocks[0] / math.sqrt(total))
        else:
            mat = np.stack(blocks, axis=1)
            signal = DensityMatrix(signal_dims, mat @ mat.conj().T / total)
    else:
        signal = DensityMatrix(signal_dims, sum(blocks) / total)

    if pattern.kind in (EXACT, COINCIDENCE):
        idler = tensor([fock(idler_dims[k], outcomes[0][k]) for k in active])
        if isinstance(state, FockVector):
            joint = tensor([signal, idler])
        return HeraldResult(total, signal, idler, joint, per_outcome)

    sub_dims = (2,) * len(active)
    positions = [_click_index(o, active) for o in outcomes]
    if isinstance(state, FockVector):
        amps = np.zeros((sig_side, 2 ** len(active)), dtype=np.complex128)
        for pos, b in zip(positions, blocks):
            amps[:, pos] = b
        joint = FockVector(signal_dims + sub_dims, amps.reshape(-1) / math.sqrt(total))
        # <b_l|b_k> gives the idler reduced matrix element (k, l)
        gram = np.array([[np.vdot(bl, bk) for bl in blocks] for bk in blocks])
    else:
        r = state.elements.reshape(dims + dims)
        gram = np.array(
            [[np.trace(r[lead + ok + lead + ol].reshape(sig_side, sig_side)) for ol in outcomes] for ok in outcomes]
        )
    idler_mat = np.zeros((2 ** len(active),) * 2, dtype=np.complex128)
    idler_mat[np.ix_(positions, positions)] = gram / total
    return HeraldResult(total, signal, DensityMatrix(sub_dims, idler_mat), joint, per_outcome)


def coincidence_select(
    state: FockVector | DensityMatrix, pair: tuple[int, int], n_signal: int = 1
) -> HeraldResult:
    """Condition on one photon in each idler of ``pair`` and vacuum in all others."""
    return project(state, HeraldPattern.coincidence(*pair), n_signal)


def outcome_distribution(state: FockVector | DensityMatrix, n_signal: int = 1) -> dict[tuple[int, ...], float]:
    """Probability of every exact idler count pattern (sums to the state's norm squared)."""
    dims = state.dims
    _check_layout(dims, n_signal)
    if isinstance(state, FockVector):
        weights = np.abs(state.as_tensor()) ** 2
    else:
        weights = np.real(np.diag(state.elements)).reshape(dims)
    marg = weights.sum(axis=tuple(range(n_signal)))
    return {tuple(int(i) for i in idx): float(marg[idx]) for idx in np.ndindex(marg.shape)}


def herald_probability_reference(n: int, m: int, alpha: complex, lam: float) -> float:
    """N |lambda^m|^2 m! L_m(-|alpha|^2), the closed-form success-rate estimate."""
    if m > n:
        raise InvalidArgumentError(f"cannot herald m={m} photons with N={n} amplifiers")
    if m < 0 or n < 1:
        raise InvalidArgumentError(f"need N >= 1 and m >= 0, got N={n}, m={m}")
    return n * abs(lam) ** (2 * m) * math.factorial(m) * laguerre(m, -abs(alpha) ** 2)


def combinatorial_reference(n: int, m: int, alpha: complex, lam: float) -> float:
    """C(N, m) |lambda^m|^2 m! L_m(-|alpha|^2): one term per set of m clicked idlers."""
    if m > n:
        raise InvalidArgumentError(f"cannot herald m={m} photons with N={n} amplifiers")
    return math.comb(n, m) * abs(lam) ** (2 * m) * math.factorial(m) * laguerre(m, -abs(alpha) ** 2)
