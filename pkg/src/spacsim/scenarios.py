"""Declarative experiment runner.

A scenario config is a JSON-compatible mapping; :func:`parse_config` validates
it into a :class:`ScenarioConfig` and :func:`run` turns that into a
:class:`ScenarioReport`. Four kinds are supported:

``single``
    one amplifier on a coherent input, heralded on one idler photon.
``cascade``
    N amplifiers sharing the signal, heralded on any single idler click.
``ecs-dual``
    an entangled coherent state split over two signal channels with
    ``upper_n`` and ``lower_n`` amplifiers.
``thermal``
    one amplifier on a displaced thermal input.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from itertools import combinations
from typing import Any, Mapping, Sequence

import numpy as np

from . import __version__
from .amplifier import MAX_LEAKAGE, CascadeLayout, Stage, amplifier_unitary, cascade_input, evolve_cascade, evolve_stages
from .analysis import (
    WignerGrid,
    entanglement_entropy,
    fidelity,
    mandel_q,
    mean_photon_number,
    photon_distribution,
    von_neumann_entropy,
    wigner,
    wigner_point,
)
from .errors import ConfigError, InvalidArgumentError, PartialTraceRequiredError, SpacsimError
from .fock import (
    DEFAULT_IDLER_DIM,
    MAX_LAMBDA,
    DensityMatrix,
    FockVector,
    check_coherent_guard,
    check_lambda,
    default_signal_dim,
    edge_population,
    partial_trace,
    tensor,
)
from .herald import (
    HeraldPattern,
    combinatorial_reference,
    herald_probability_reference,
    outcome_distribution,
    project,
)
from .states import coherent, ecs, fock, ii3_state, pacs, w_state
from .thermal import bogoliubov_coeffs, evolve_thermal, heralded_thermal_spacs, thermal_coherent_input

__all__ = [
    "SCHEMA_VERSION",
    "REPORT_SCHEMA",
    "KINDS",
    "ANALYSES",
    "CONFIG_SCHEMA",
    "ScenarioError",
    "WignerSpec",
    "ScenarioConfig",
    "ScenarioReport",
    "parse_config",
    "config_to_dict",
    "run",
    "sweep",
    "build_ecs_dual_input",
    "espacs_targets",
    "wigner_target_state",
    "wigner_grid",
    "state_to_dict",
]

SCHEMA_VERSION = 1
REPORT_SCHEMA = "spacsim.report/1"
KINDS = ("single", "cascade", "ecs-dual", "thermal")
ANALYSES = ("fidelity-targets", "wigner", "mandel-q", "entropy", "distribution")
WIGNER_TARGETS = ("heralded-signal", "input-signal", "output-signal", "vacuum")
SWEEP_PARAMETERS = ("lambda", "alpha", "nbar", "n_amplifiers")
MAX_AMPLIFIERS = 6

_ECS_PHASE = np.exp(-1j * np.pi / 4)

_COMPLEX_SCHEMA = {
    "oneOf": [
        {"type": "number"},
        {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2},
    ]
}
_RANGE_SCHEMA = {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2}

CONFIG_SCHEMA: dict = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "spacsim scenario config",
    "type": "object",
    "required": ["schema_version", "kind", "alpha", "lambda"],
    "additionalProperties": False,
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "kind": {"enum": list(KINDS)},
        "alpha": _COMPLEX_SCHEMA,
        "beta": _COMPLEX_SCHEMA,
        "lambda": {"type": "number", "minimum": 0, "exclusiveMaximum": MAX_LAMBDA},
        "n_amplifiers": {"type": "integer", "minimum": 1, "maximum": MAX_AMPLIFIERS},
        "upper_n": {"type": "integer", "minimum": 1, "maximum": MAX_AMPLIFIERS},
        "lower_n": {"type": "integer", "minimum": 1, "maximum": MAX_AMPLIFIERS},
        "nbar": {"type": "number", "minimum": 0},
        "max_leakage": {"type": "number", "exclusiveMinimum": 0},
        "truncations": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "signal": {"type": "integer", "minimum": 2},
                "idler": {"type": "integer", "minimum": 2},
            },
        },
        "analyses": {"type": "array", "items": {"enum": list(ANALYSES)}, "uniqueItems": True},
        "herald": {
            "type": "object",
            "required": ["kind"],
            "additionalProperties": False,
            "properties": {
                "kind": {"enum": ["exact-counts", "any-single-click", "coincidence-pair", "any-coincidence"]},
                "counts": {"type": "array", "items": {"type": "integer", "minimum": 0}},
                "pair": {"type": "array", "items": {"type": "integer", "minimum": 0}, "minItems": 2, "maxItems": 2},
                "among": {"type": "array", "items": {"type": "integer", "minimum": 0}},
            },
        },
        "wigner": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "target": {"enum": list(WIGNER_TARGETS)},
                "mode": {"type": "integer", "minimum": 0},
                "x_range": _RANGE_SCHEMA,
                "p_range": _RANGE_SCHEMA,
                "resolution": {"type": "array", "items": {"type": "integer", "minimum": 1}, "minItems": 2, "maxItems": 2},
            },
        },
    },
}


class ScenarioError(SpacsimError):
    """A module error raised while validating or running a config, tagged with the config path."""

    def __init__(self, cause: Exception, field: str | None = None):
        self.cause = cause
        self.field = field
        prefix = f"{field}: " if field else ""
        super().__init__(f"{prefix}{cause}")


@dataclass(frozen=True)
class WignerSpec:
    target: str = "heralded-signal"
    mode: int | None = None
    x_range: tuple[float, float] = (-4.0, 4.0)
    p_range: tuple[float, float] = (-4.0, 4.0)
    resolution: tuple[int, int] = (81, 81)


@dataclass(frozen=True)
class ScenarioConfig:
    kind: str
    alpha: complex
    lam: float
    beta: complex = 0j
    n_amplifiers: int = 1
    upper_n: int = 2
    lower_n: int = 1
    nbar: float = 0.0
    signal_dim: int | None = None
    idler_dim: int = DEFAULT_IDLER_DIM
    analyses: tuple[str, ...] = ("fidelity-targets",)
    herald: HeraldPattern | None = None
    wigner: WignerSpec = field(default_factory=WignerSpec)
    max_leakage: float = MAX_LEAKAGE

    @property
    def resolved_signal_dim(self) -> int:
        if self.signal_dim is not None:
            return self.signal_dim
        if self.kind == "ecs-dual":
            return max(default_signal_dim(self.alpha), default_signal_dim(self.beta))
        return default_signal_dim(self.alpha)


# ---------------------------------------------------------------- parsing


def _field_type_error(path: str, expected: str, value: Any) -> ConfigError:
    return ConfigError(f"{path}: expected {expected}, got {value!r}", field=path)


def _number(raw: Mapping, key: str, path: str | None = None) -> float:
    path = path or key
    value = raw[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        raise _field_type_error(path, "a finite number", value)
    return float(value)


def _integer(raw: Mapping, key: str, path: str | None = None) -> int:
    path = path or key
    value = raw[key]
    if isinstance(value, bool) or not isinstance(value, int):
        raise _field_type_error(path, "an integer", value)
    return int(value)


def _complex(raw: Mapping, key: str) -> complex:
    value = raw[key]
    if isinstance(value, (list, tuple)):
        if len(value) != 2 or not all(
            isinstance(v, (int, float)) and not isinstance(v, bool) and math.isfinite(v) for v in value
        ):
            raise _field_type_error(key, "a number or [re, im] pair", value)
        return complex(float(value[0]), float(value[1]))
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        raise _field_type_error(key, "a number or [re, im] pair", value)
    return complex(float(value), 0.0)


def _range(raw: Mapping, key: str, path: str) -> tuple[float, float]:
    value = raw[key]
    if not isinstance(value, (list, tuple)) or len(value) != 2:
        raise _field_type_error(path, "a [low, high] pair", value)
    lo = _number({"v": value[0]}, "v", path)
    hi = _number({"v": value[1]}, "v", path)
    if not lo < hi:
        raise ConfigError(f"{path}: low end must be below high end", field=path)
    return lo, hi


def _check_keys(raw: Mapping, allowed: Sequence[str], prefix: str = "") -> None:
    for key in raw:
        if key not in allowed:
            path = f"{prefix}{key}"
            raise ConfigError(f"{path}: unknown field", field=path)


def _parse_wigner(raw: Any) -> WignerSpec:
    if not isinstance(raw, Mapping):
        raise _field_type_error("wigner", "an object", raw)
    _check_keys(raw, ("target", "mode", "x_range", "p_range", "resolution"), "wigner.")
    spec = WignerSpec()
    kw: dict = {}
    if "target" in raw:
        if raw["target"] not in WIGNER_TARGETS:
            raise _field_type_error("wigner.target", f"one of {WIGNER_TARGETS}", raw["target"])
        kw["target"] = raw["target"]
    if "mode" in raw:
        mode = _integer(raw, "mode", "wigner.mode")
        if mode < 0:
            raise ConfigError("wigner.mode: must be >= 0", field="wigner.mode")
        kw["mode"] = mode
    if "x_range" in raw:
        kw["x_range"] = _range(raw, "x_range", "wigner.x_range")
    if "p_range" in raw:
        kw["p_range"] = _range(raw, "p_range", "wigner.p_range")
    if "resolution" in raw:
        res = raw["resolution"]
        if (
            not isinstance(res, (list, tuple))
            or len(res) != 2
            or not all(isinstance(r, int) and not isinstance(r, bool) and r >= 1 for r in res)
        ):
            raise _field_type_error("wigner.resolution", "two positive integers", res)
        kw["resolution"] = (int(res[0]), int(res[1]))
    return replace(spec, **kw)


def _parse_herald(raw: Any) -> HeraldPattern:
    if not isinstance(raw, Mapping):
        raise _field_type_error("herald", "an object", raw)
    _check_keys(raw, ("kind", "counts", "pair", "among"), "herald.")
    if "kind" not in raw:
        raise ConfigError("herald.kind: missing required field", field="herald.kind")
    for key in ("counts", "pair", "among"):
        if key in raw:
            val = raw[key]
            if not isinstance(val, (list, tuple)) or not all(
                isinstance(v, int) and not isinstance(v, bool) and v >= 0 for v in val
            ):
                raise _field_type_error(f"herald.{key}", "a list of non-negative integers", val)
    try:
        return HeraldPattern(
            raw["kind"],
            counts=tuple(raw["counts"]) if "counts" in raw else None,
            pair=tuple(raw["pair"]) if "pair" in raw else None,
            among=tuple(raw["among"]) if "among" in raw else None,
        )
    except SpacsimError as exc:
        raise ConfigError(f"herald: {exc}", field="herald") from exc


def parse_config(raw: Any) -> ScenarioConfig:
    """Validate a JSON-compatible mapping into a ScenarioConfig.

    Structural problems raise ConfigError naming the field; physical guard
    violations (lambda range, truncation too small) raise ScenarioError.
    """
    if not isinstance(raw, Mapping):
        raise ConfigError("config must be a JSON object", field=None)
    _check_keys(raw, tuple(CONFIG_SCHEMA["properties"]))
    for key in CONFIG_SCHEMA["required"]:
        if key not in raw:
            raise ConfigError(f"{key}: missing required field", field=key)
    version = raw["schema_version"]
    if isinstance(version, bool) or version != SCHEMA_VERSION:
        raise ConfigError(f"schema_version: unsupported version {version!r}", field="schema_version")
    kind = raw["kind"]
    if kind not in KINDS:
        raise _field_type_error("kind", f"one of {KINDS}", kind)
    required = {"cascade": ["n_amplifiers"], "ecs-dual": ["beta"], "thermal": ["nbar"]}.get(kind, [])
    for key in required:
        if key not in raw:
            raise ConfigError(f"{key}: required for kind {kind!r}", field=key)

    kw: dict = {"kind": kind, "alpha": _complex(raw, "alpha"), "lam": _number(raw, "lambda")}
    if "beta" in raw:
        kw["beta"] = _complex(raw, "beta")
    for key in ("n_amplifiers", "upper_n", "lower_n"):
        if key in raw:
            kw[key] = _integer(raw, key)
            if not 1 <= kw[key] <= MAX_AMPLIFIERS:
                raise ConfigError(f"{key}: must lie in [1, {MAX_AMPLIFIERS}]", field=key)
    if "nbar" in raw:
        kw["nbar"] = _number(raw, "nbar")
    if "max_leakage" in raw:
        kw["max_leakage"] = _number(raw, "max_leakage")
        if kw["max_leakage"] <= 0:
            raise ConfigError("max_leakage: must be positive", field="max_leakage")
    if "truncations" in raw:
        tr = raw["truncations"]
        if not isinstance(tr, Mapping):
            raise _field_type_error("truncations", "an object", tr)
        _check_keys(tr, ("signal", "idler"), "truncations.")
        if "signal" in tr:
            kw["signal_dim"] = _integer(tr, "signal", "truncations.signal")
        if "idler" in tr:
            kw["idler_dim"] = _integer(tr, "idler", "truncations.idler")
    if "analyses" in raw:
        an = raw["analyses"]
        if not isinstance(an, (list, tuple)) or any(a not in ANALYSES for a in an):
            raise _field_type_error("analyses", f"a list drawn from {ANALYSES}", an)
        kw["analyses"] = tuple(sorted(set(an)))
    if "herald" in raw:
        kw["herald"] = _parse_herald(raw["herald"])
    if "wigner" in raw:
        kw["wigner"] = _parse_wigner(raw["wigner"])
    config = ScenarioConfig(**kw)
    validate_guards(config)
    return config


def validate_guards(config: ScenarioConfig) -> None:
    """Check every physical guard up front; raises ScenarioError with the field path."""
    try:
        check_lambda(config.lam)
    except SpacsimError as exc:
        raise ScenarioError(exc, "lambda") from exc
    if config.nbar < 0:
        raise ScenarioError(ValueError(f"nbar must be >= 0, got {config.nbar}"), "nbar")
    dim = config.resolved_signal_dim
    # room for the two-photon-added targets
    try:
        if dim < 2:
            raise ValueError(f"signal truncation must be >= 2, got {dim}")
        check_coherent_guard(dim, config.alpha, extra=2)
        if config.kind == "ecs-dual":
            check_coherent_guard(dim, config.beta, extra=2)
    except (SpacsimError, ValueError) as exc:
        raise ScenarioError(exc, "truncations.signal") from exc
    if config.idler_dim < 3:
        raise ScenarioError(
            ValueError(f"idler truncation must be >= 3 to resolve double clicks, got {config.idler_dim}"),
            "truncations.idler",
        )


def config_to_dict(config: ScenarioConfig) -> dict:
    """Canonical, fully-defaulted form of a config; parse_config inverts it."""
    d: dict = {
        "schema_version": SCHEMA_VERSION,
        "kind": config.kind,
        "alpha": [config.alpha.real, config.alpha.imag],
        "lambda": config.lam,
        "max_leakage": config.max_leakage,
        "truncations": {"signal": config.resolved_signal_dim, "idler": config.idler_dim},
        "analyses": list(config.analyses),
        "wigner": {
            "target": config.wigner.target,
            "x_range": list(config.wigner.x_range),
            "p_range": list(config.wigner.p_range),
            "resolution": list(config.wigner.resolution),
        },
    }
    if config.wigner.mode is not None:
        d["wigner"]["mode"] = config.wigner.mode
    if config.kind == "cascade":
        d["n_amplifiers"] = config.n_amplifiers
    if config.kind == "ecs-dual":
        d["beta"] = [config.beta.real, config.beta.imag]
        d["upper_n"] = config.upper_n
        d["lower_n"] = config.lower_n
    if config.kind == "thermal":
        d["nbar"] = config.nbar
    if config.herald is not None:
        d["herald"] = config.herald.to_dict()
    return d


# ---------------------------------------------------------------- reports


def state_to_dict(state: FockVector | DensityMatrix) -> dict:
    """JSON form of a state: dims plus real and imaginary parts, row-major."""
    if isinstance(state, FockVector):
        data = state.amplitudes
        return {"type": "ket", "dims": list(state.dims), "real": data.real.tolist(), "imag": data.imag.tolist()}
    data = state.elements
    return {"type": "density", "dims": list(state.dims), "real": data.real.tolist(), "imag": data.imag.tolist()}


@dataclass
class ScenarioReport:
    """Everything one run produced; ``to_dict`` is the serialized schema."""

    config: dict
    probabilities: dict = field(default_factory=dict)
    references: dict = field(default_factory=dict)
    fidelities: dict = field(default_factory=dict)
    analyses: dict = field(default_factory=dict)
    diagnostics: dict = field(default_factory=dict)
    undefined: list = field(default_factory=list)
    states: dict = field(default_factory=dict)
    # in-memory states available as Wigner targets; not serialized
    targets: dict = field(default_factory=dict, repr=False)

    def to_dict(self) -> dict:
        return {
            "schema": REPORT_SCHEMA,
            "version": __version__,
            "config": self.config,
            "probabilities": self.probabilities,
            "references": self.references,
            "fidelities": self.fidelities,
            "analyses": self.analyses,
            "diagnostics": self.diagnostics,
            "undefined": sorted(self.undefined),
            "states": self.states,
        }


def _ratio(num: float, den: float) -> float | None:
    return num / den if den > 0 else None


def _fid(report: ScenarioReport, name: str, result_state, target) -> None:
    if result_state is None:
        report.fidelities[name] = None
        report.undefined.append(name)
    else:
        report.fidelities[name] = fidelity(target, result_state)


def _signal_analyses(report: ScenarioReport, config: ScenarioConfig, label: str, state) -> None:
    if state is None:
        return
    if "mandel-q" in config.analyses:
        q = mandel_q(state)
        report.analyses.setdefault("mandel_q", {})[label] = q
        if q is None:
            report.undefined.append(f"mandel_q.{label}")
    if "distribution" in config.analyses:
        report.analyses.setdefault("distribution", {})[label] = photon_distribution(state).tolist()


def _click_sector_probability(dist: Mapping[tuple[int, ...], float], m: int) -> float:
    """Total probability of exactly m idlers holding one photon each and the rest empty."""
    return float(sum(p for counts, p in dist.items() if all(c <= 1 for c in counts) and sum(counts) == m))


def _custom_herald(report: ScenarioReport, config: ScenarioConfig, out, n_signal: int) -> None:
    if config.herald is None:
        return
    try:
        res = project(out, config.herald, n_signal)
    except SpacsimError as exc:
        raise ScenarioError(exc, "herald") from exc
    report.probabilities["custom_herald"] = res.probability
    if not res.defined:
        report.undefined.append("custom_herald")
    elif n_signal == 1 and isinstance(res.signal_state, FockVector):
        report.states["custom_herald_signal"] = state_to_dict(res.signal_state)


def _leakage(report: ScenarioReport, out) -> None:
    report.diagnostics["norm_leakage"] = edge_population(out)


def _run_cascade(config: ScenarioConfig, n: int) -> ScenarioReport:
    dim = config.resolved_signal_dim
    alpha, lam = config.alpha, config.lam
    report = ScenarioReport(config_to_dict(config))
    layout = CascadeLayout.uniform(dim, n, lam, config.idler_dim)
    signal_in = coherent(dim, alpha)
    out = evolve_cascade(cascade_input(signal_in, layout), layout, config.max_leakage)
    _leakage(report, out)
    report.diagnostics["unitarity_residual"] = amplifier_unitary(dim, config.idler_dim, lam).unitarity_residual(exclude_top=2)

    single = project(out, HeraldPattern.any_single())
    key = "single_click" if n == 1 else "any_single_click"
    report.probabilities[key] = single.probability
    report.probabilities["per_detector"] = [single.outcome_probabilities[o] for o in HeraldPattern.any_single().outcomes(n)]
    ref = herald_probability_reference(n, 1, alpha, lam)
    report.references["p_N_1"] = ref
    report.references["measured_over_p_N_1"] = _ratio(single.probability, ref)

    dist = outcome_distribution(out)
    sectors = {}
    for m in range(1, n + 1):
        sectors[str(m)] = {
            "measured": _click_sector_probability(dist, m),
            "n_prefactor": herald_probability_reference(n, m, alpha, lam),
            "combinatorial": combinatorial_reference(n, m, alpha, lam),
        }
    report.references["click_sectors"] = sectors

    if "fidelity-targets" in config.analyses:
        _fid(report, "signal_vs_pacs1", single.signal_state, pacs(dim, alpha, 1))
        if n >= 2:
            _fid(report, "idlers_vs_w", single.idler_state, w_state(n))
            per = [project(out, HeraldPattern.exact(o)) for o in HeraldPattern.any_single().outcomes(n)]
            if all(r.defined for r in per):
                report.fidelities["which_detector_min"] = min(
                    fidelity(a.signal_state, b.signal_state) for a, b in combinations(per, 2)
                )
            else:
                report.fidelities["which_detector_min"] = None
                report.undefined.append("which_detector_min")
            coin = project(out, HeraldPattern.coincidence(0, 1))
            report.probabilities["coincidence_0_1"] = coin.probability
            _fid(report, "coincidence_signal_vs_pacs2", coin.signal_state, pacs(dim, alpha, 2))
        if n == 3:
            two = project(out, HeraldPattern.any_coincidence())
            report.probabilities["any_coincidence"] = two.probability
            _fid(report, "two_click_idlers_vs_ii3", two.idler_state, ii3_state())

    if single.defined:
        signal = single.signal_state
        if isinstance(signal, FockVector):
            report.states["heralded_signal"] = state_to_dict(signal)
        _signal_analyses(report, config, "heralded_signal", signal)
    else:
        report.undefined.append("heralded_signal")
    _signal_analyses(report, config, "input_signal", signal_in)
    if "entropy" in config.analyses:
        report.analyses["entropy_signal_vs_idlers"] = entanglement_entropy(out, [0])
        if single.defined and n >= 2:
            report.analyses["entropy_one_idler_of_w"] = _idler_entropy(single.idler_state)
    _custom_herald(report, config, out, 1)
    report.targets.update({"input-signal": signal_in, "output-signal": partial_trace(out, [0]),
                           "heralded-signal": single.signal_state})
    _maybe_wigner(report, config)
    return report


def _idler_entropy(idler_state) -> float:
    return von_neumann_entropy(partial_trace(idler_state, [0])) if idler_state.n_modes > 1 else 0.0


def _maybe_wigner(report: ScenarioReport, config: ScenarioConfig) -> None:
    if "wigner" not in config.analyses:
        return
    state = wigner_target_state(config, report.targets)
    if state is None:
        report.analyses["wigner"] = None
        report.undefined.append("wigner")
        return
    spec = config.wigner
    grid = wigner(state, spec.x_range, spec.p_range, spec.resolution)
    report.analyses["wigner"] = {
        "target": spec.target,
        "origin": wigner_point(state, 0.0, 0.0),
        "min": float(grid.values.min()),
        "max": float(grid.values.max()),
        "integral": grid.integral(),
        "grid": grid.to_dict(),
    }


def wigner_target_state(config: ScenarioConfig, targets: Mapping[str, Any]):
    """Resolve the single-mode state a Wigner request refers to, reducing over ``mode`` if needed."""
    spec = config.wigner
    if spec.target == "vacuum":
        return fock(config.resolved_signal_dim, 0)
    state = targets.get(spec.target)
    if state is None:
        return None
    if state.n_modes > 1:
        if spec.mode is None:
            raise ScenarioError(
                PartialTraceRequiredError(
                    f"wigner target {spec.target!r} has {state.n_modes} modes; set wigner.mode"
                ),
                "wigner.mode",
            )
        if spec.mode >= state.n_modes:
            raise ScenarioError(
                PartialTraceRequiredError(f"wigner.mode {spec.mode} out of range"), "wigner.mode"
            )
        state = partial_trace(state, [spec.mode])
    return state


def espacs_targets(dim: int, alpha: complex, beta: complex) -> tuple[FockVector, FockVector]:
    """Normalized two-signal targets with a photon added to the upper (I) or lower (II) mode."""
    upper = _ECS_PHASE * tensor([pacs(dim, 1j * beta, 1), coherent(dim, 1j * alpha)]) + np.conj(
        _ECS_PHASE
    ) * tensor([pacs(dim, -alpha, 1), coherent(dim, beta)])
    lower = _ECS_PHASE * tensor([coherent(dim, 1j * beta), pacs(dim, 1j * alpha, 1)]) + np.conj(
        _ECS_PHASE
    ) * tensor([coherent(dim, -alpha), pacs(dim, beta, 1)])
    return upper.normalized(), lower.normalized()


def build_ecs_dual_input(config: ScenarioConfig) -> FockVector:
    """ECS on (upper signal, lower signal) followed by vacuum in every upper then lower idler."""
    dim = config.resolved_signal_dim
    idlers = [fock(config.idler_dim, 0)] * (config.upper_n + config.lower_n)
    return tensor([ecs(dim, config.alpha, config.beta), *idlers])


def _run_ecs_dual(config: ScenarioConfig) -> ScenarioReport:
    dim = config.resolved_signal_dim
    up, low = config.upper_n, config.lower_n
    report = ScenarioReport(config_to_dict(config))
    state_in = build_ecs_dual_input(config)
    stages = [Stage(0, 2 + j, config.lam) for j in range(up)]
    stages += [Stage(1, 2 + up + k, config.lam) for k in range(low)]
    out = evolve_stages(state_in, stages, config.max_leakage)
    _leakage(report, out)

    upper = project(out, HeraldPattern.any_single(range(up)), n_signal=2)
    lower = project(out, HeraldPattern.any_single(range(up, up + low)), n_signal=2)
    report.probabilities["upper_herald"] = upper.probability
    report.probabilities["lower_herald"] = lower.probability
    report.probabilities["upper_over_lower"] = _ratio(upper.probability, lower.probability)
    report.references["upper_over_lower"] = up / low
    if report.probabilities["upper_over_lower"] is None:
        report.undefined.append("upper_over_lower")

    if "fidelity-targets" in config.analyses:
        target_i, target_ii = espacs_targets(dim, config.alpha, config.beta)
        _fid(report, "upper_vs_espacs_i", upper.signal_state, target_i)
        _fid(report, "lower_vs_espacs_ii", lower.signal_state, target_ii)
        idler_target = w_state(up) if up >= 2 else fock(2, 1)
        _fid(report, "upper_joint_vs_espacs_i_x_w", upper.joint_state, tensor([target_i, idler_target]))
    if "entropy" in config.analyses:
        report.analyses["entropy_upper_vs_lower_signal_input"] = entanglement_entropy(
            ecs(dim, config.alpha, config.beta), [0]
        )
        if upper.joint_state is not None:
            report.analyses["entropy_upper_herald_signals_vs_idlers"] = entanglement_entropy(
                upper.joint_state, [0, 1]
            )
    for label, res in (("upper", upper), ("lower", lower)):
        if res.defined:
            for mode, name in ((0, "us"), (1, "ds")):
                _signal_analyses(report, config, f"{label}_herald_{name}", partial_trace(res.signal_state, [mode]))
        else:
            report.undefined.append(f"{label}_herald_signal")
    _custom_herald(report, config, out, 2)
    report.targets.update({"input-signal": partial_trace(state_in, [0, 1]),
                           "output-signal": partial_trace(out, [0, 1]),
                           "heralded-signal": upper.signal_state})
    _maybe_wigner(report, config)
    return report


def _run_thermal(config: ScenarioConfig) -> ScenarioReport:
    dim = config.resolved_signal_dim
    alpha, lam, nbar = config.alpha, config.lam, config.nbar
    report = ScenarioReport(config_to_dict(config))
    rho_in = thermal_coherent_input(dim, alpha, nbar)
    out = evolve_thermal(rho_in, lam, config.idler_dim, config.max_leakage)
    _leakage(report, out)
    herald = heralded_thermal_spacs(out, alpha)
    cold = heralded_thermal_spacs(evolve_thermal(thermal_coherent_input(dim, alpha, 0.0), lam, config.idler_dim, config.max_leakage))
    u, v = bogoliubov_coeffs(nbar)
    report.probabilities["single_click"] = herald.probability
    report.probabilities["single_click_zero_temperature"] = cold.probability
    ratio = _ratio(herald.probability, cold.probability)
    report.probabilities["ratio_to_zero_temperature"] = ratio
    report.references.update({
        "u": u,
        "v": v,
        "u_squared": u * u,
        "p_1_1": herald_probability_reference(1, 1, alpha, lam),
        "p_1_1_linear_u": lam * u,
        "ratio_minus_u": None if ratio is None else ratio - u,
        "ratio_minus_u_squared": None if ratio is None else ratio - u * u,
    })
    if ratio is None:
        report.undefined.append("ratio_to_zero_temperature")
    if "fidelity-targets" in config.analyses:
        report.fidelities["signal_vs_pacs1"] = herald.ideal_fidelity
        if herald.ideal_fidelity is None:
            report.undefined.append("signal_vs_pacs1")
    report.diagnostics["input_mean_photon_number"] = mean_photon_number(rho_in)
    if herald.defined:
        report.analyses["heralded_wigner_origin"] = wigner_point(herald.signal_state, 0.0, 0.0)
        _signal_analyses(report, config, "heralded_signal", herald.signal_state)
    else:
        report.undefined.append("heralded_signal")
    _signal_analyses(report, config, "input_signal", rho_in)
    _custom_herald(report, config, out, 1)
    report.targets.update({"input-signal": rho_in, "output-signal": partial_trace(out, [0]),
                           "heralded-signal": herald.signal_state})
    _maybe_wigner(report, config)
    return report


def run(config: ScenarioConfig) -> ScenarioReport:
    """Build the input, evolve, herald and analyze; deterministic for a fixed config."""
    validate_guards(config)
    try:
        if config.kind == "single":
            report = _run_cascade(config, 1)
        elif config.kind == "cascade":
            report = _run_cascade(config, config.n_amplifiers)
        elif config.kind == "ecs-dual":
            report = _run_ecs_dual(config)
        else:
            report = _run_thermal(config)
    except ScenarioError:
        raise
    except SpacsimError as exc:
        raise ScenarioError(exc, config.kind) from exc
    report.diagnostics["max_leakage"] = config.max_leakage
    return report


def wigner_grid(config: ScenarioConfig) -> WignerGrid:
    """Run the scenario and sample the Wigner function of the configured target."""
    report = run(config)
    state = wigner_target_state(config, report.targets)
    if state is None:
        raise ScenarioError(
            InvalidArgumentError(f"wigner target {config.wigner.target!r} is undefined (zero herald probability)"),
            "wigner.target",
        )
    spec = config.wigner
    return wigner(state, spec.x_range, spec.p_range, spec.resolution)


def sweep(config: ScenarioConfig, parameter: str, values: Sequence[float]) -> list[ScenarioReport]:
    """One report per value of ``parameter``, in input order."""
    if parameter not in SWEEP_PARAMETERS:
        raise ConfigError(f"param: unknown sweep parameter {parameter!r}; expected one of {SWEEP_PARAMETERS}", field="param")
    if parameter == "nbar" and config.kind != "thermal":
        raise ConfigError("param: nbar can only be swept for kind 'thermal'", field="param")
    if parameter == "n_amplifiers" and config.kind != "cascade":
        raise ConfigError("param: n_amplifiers can only be swept for kind 'cascade'", field="param")
    reports = []
    for value in values:
        if parameter == "lambda":
            cfg = replace(config, lam=float(value))
        elif parameter == "alpha":
            cfg = replace(config, alpha=complex(value))
        elif parameter == "nbar":
            cfg = replace(config, nbar=float(value))
        else:
            if float(value) != int(value):
                raise ConfigError(f"n_amplifiers: sweep value {value} is not an integer", field="n_amplifiers")
            if not 1 <= int(value) <= MAX_AMPLIFIERS:
                raise ConfigError(f"n_amplifiers: sweep value {value} outside [1, {MAX_AMPLIFIERS}]", field="n_amplifiers")
            cfg = replace(config, n_amplifiers=int(value))
        reports.append(run(cfg))
    return reports
