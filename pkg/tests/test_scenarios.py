import json

import jsonschema
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spacsim.analysis import fidelity
from spacsim.canonical import dumps
from spacsim.errors import ConfigError
from spacsim.fock import partial_trace, tensor
from spacsim.herald import HeraldPattern, project
from spacsim.scenarios import (
    CONFIG_SCHEMA,
    ScenarioError,
    build_ecs_dual_input,
    config_to_dict,
    espacs_targets,
    parse_config,
    run,
    sweep,
)
from spacsim.states import ecs, fock, w_state

LAM = 0.01


def cfg(**kw):
    raw = {"schema_version": 1, "kind": "single", "alpha": 1.0, "lambda": LAM}
    raw.update(kw)
    return parse_config(raw)


# run examples


def test_single_report():
    report = run(cfg(truncations={"signal": 30}))
    assert report.probabilities["single_click"] == pytest.approx(2e-4, rel=1e-3)
    assert report.fidelities["signal_vs_pacs1"] >= 0.9999
    assert report.diagnostics["norm_leakage"] <= 1e-6


def test_cascade_report():
    single = run(cfg()).probabilities["single_click"]
    report = run(cfg(kind="cascade", n_amplifiers=3))
    assert report.probabilities["any_single_click"] / single == pytest.approx(3.0, rel=1e-3)
    assert report.fidelities["idlers_vs_w"] >= 0.9999
    assert report.fidelities["two_click_idlers_vs_ii3"] >= 0.999
    assert report.references["click_sectors"]["1"]["n_prefactor"] == pytest.approx(6e-4)


def test_ecs_dual_report_fidelities():
    report = run(cfg(kind="ecs-dual", beta=1.0))
    assert report.fidelities["upper_vs_espacs_i"] >= 0.999
    assert report.fidelities["lower_vs_espacs_ii"] >= 0.999
    assert report.references["upper_over_lower"] == 2.0


def test_ecs_dual_probability_ratio():
    # claimed factor 2 between the channels, within 1%; the non-orthogonal
    # branches shift photon number between channels, see the next test
    ratio = run(cfg(kind="ecs-dual", beta=1.0)).probabilities["upper_over_lower"]
    assert ratio == pytest.approx(2.0, rel=1e-2)


def test_ecs_dual_ratio_follows_channel_photon_numbers():
    # measured ratio is 2 (1 + <n_upper>) / (1 + <n_lower>) of the input ECS
    from spacsim.analysis import mean_photon_number

    for a in (1.0, 2.0):
        config = cfg(kind="ecs-dual", alpha=a, beta=a)
        state = ecs(config.resolved_signal_dim, a, a)
        expected = 2 * (1 + mean_photon_number(state, 0)) / (1 + mean_photon_number(state, 1))
        assert run(config).probabilities["upper_over_lower"] == pytest.approx(expected, rel=2e-3)


def test_thermal_report():
    report = run(cfg(kind="thermal", nbar=0.1, truncations={"signal": 30}))
    assert report.probabilities["ratio_to_zero_temperature"] == pytest.approx(1.05, rel=1e-3)
    assert report.references["u"] == pytest.approx(1.1**0.5)
    assert report.fidelities["signal_vs_pacs1"] < 1


def test_lambda_zero_marks_undefined():
    report = run(cfg(kind="cascade", n_amplifiers=2, **{"lambda": 0.0}))
    d = report.to_dict()
    assert d["probabilities"]["any_single_click"] == 0.0
    assert "signal_vs_pacs1" in d["undefined"] and "heralded_signal" in d["undefined"]
    assert d["fidelities"]["signal_vs_pacs1"] is None


def test_analyses_sections():
    report = run(cfg(kind="cascade", n_amplifiers=2, analyses=["mandel-q", "distribution", "entropy", "wigner"]))
    a = report.analyses
    assert a["mandel_q"]["heralded_signal"] < 0
    assert sum(a["distribution"]["heralded_signal"]) == pytest.approx(1.0, abs=1e-10)
    assert a["wigner"]["integral"] == pytest.approx(1.0, abs=0.02)
    assert a["entropy_one_idler_of_w"] == pytest.approx(1.0, abs=1e-3)


def test_custom_herald():
    report = run(cfg(kind="cascade", n_amplifiers=2, herald={"kind": "coincidence-pair", "pair": [0, 1]}))
    assert report.probabilities["custom_herald"] == pytest.approx(report.probabilities["coincidence_0_1"])
    with pytest.raises(ScenarioError):
        run(cfg(kind="cascade", n_amplifiers=2, herald={"kind": "exact-counts", "counts": [1]}))


# sweeps


def test_sweep_lambda_scaling():
    reports = sweep(cfg(), "lambda", [0.02, 0.01, 0.005])
    p = [r.probabilities["single_click"] for r in reports]
    assert p[0] / p[1] == pytest.approx(4.0, rel=0.01)
    assert p[1] / p[2] == pytest.approx(4.0, rel=0.01)


def test_sweep_amplifier_count():
    reports = sweep(cfg(kind="cascade", n_amplifiers=1), "n_amplifiers", [1, 2, 3, 4])
    p = [r.probabilities.get("any_single_click", r.probabilities.get("single_click")) for r in reports]
    for n, pn in enumerate(p, start=1):
        assert pn / p[0] == pytest.approx(n, rel=0.01)


def test_sweep_nbar_increasing():
    reports = sweep(cfg(kind="thermal", nbar=0.0, truncations={"signal": 30}), "nbar", [0.0, 0.1, 0.2])
    p = [r.probabilities["single_click"] for r in reports]
    assert p[0] < p[1] < p[2]


def test_sweep_alpha_preserves_order():
    reports = sweep(cfg(), "alpha", [0.5, 1.0, 1.5])
    assert [r.config["alpha"][0] for r in reports] == [0.5, 1.0, 1.5]


def test_sweep_errors():
    with pytest.raises(ConfigError):
        sweep(cfg(), "temperature", [1.0])
    with pytest.raises(ConfigError):
        sweep(cfg(), "nbar", [0.1])
    with pytest.raises(ConfigError):
        sweep(cfg(kind="cascade", n_amplifiers=1), "n_amplifiers", [1.5])
    with pytest.raises(ConfigError):
        sweep(cfg(kind="cascade", n_amplifiers=1), "n_amplifiers", [9])


# ecs-dual input


def test_ecs_dual_input_layout():
    config = cfg(kind="ecs-dual", beta=1.0)
    state = build_ecs_dual_input(config)
    d = config.resolved_signal_dim
    assert state.dims == (d, d, 4, 4, 4)
    assert state.norm() == pytest.approx(1.0, abs=1e-8)
    reduced = partial_trace(state, [0, 1])
    two = ecs(d, 1.0, 1.0)
    assert fidelity(reduced, two) == pytest.approx(1.0, abs=1e-10)


def test_ecs_dual_input_vacuum():
    config = cfg(kind="ecs-dual", alpha=0.0, beta=0.0)
    state = build_ecs_dual_input(config)
    d = config.resolved_signal_dim
    vac = tensor([fock(d, 0), fock(d, 0), fock(4, 0), fock(4, 0), fock(4, 0)])
    assert abs(vac.inner(state)) == pytest.approx(1.0, abs=1e-12)


def test_espacs_factorizes_with_epr_idlers():
    from spacsim.amplifier import Stage, evolve_stages

    config = cfg(kind="ecs-dual", beta=1.0)
    d = config.resolved_signal_dim
    out = evolve_stages(build_ecs_dual_input(config), [Stage(0, 2, LAM), Stage(0, 3, LAM), Stage(1, 4, LAM)])
    upper = project(out, HeraldPattern.any_single([0, 1]), n_signal=2)
    target_i, _ = espacs_targets(d, 1.0, 1.0)
    assert fidelity(upper.joint_state, tensor([target_i, w_state(2)])) >= 1 - 10 * LAM**2
    report = run(config)
    assert report.fidelities["upper_joint_vs_espacs_i_x_w"] >= 1 - 10 * LAM**2


# determinism and config handling


def test_reports_byte_identical():
    config = cfg(kind="cascade", n_amplifiers=3, analyses=["fidelity-targets", "mandel-q", "entropy", "distribution"])
    assert dumps(run(config).to_dict()) == dumps(run(config).to_dict())


def test_report_echoes_defaults():
    d = run(cfg()).to_dict()
    assert d["schema"] == "spacsim.report/1"
    assert d["config"]["truncations"] == {"signal": 21, "idler": 4}
    assert d["config"]["max_leakage"] == 1e-6
    assert d["config"]["wigner"]["resolution"] == [81, 81]


def test_schema_validates_examples(tmp_path):
    from pathlib import Path

    jsonschema.Draft202012Validator.check_schema(CONFIG_SCHEMA)
    for path in sorted(Path(__file__).resolve().parents[1].joinpath("configs").glob("*.json")):
        raw = json.loads(path.read_text())
        jsonschema.validate(raw, CONFIG_SCHEMA)
        jsonschema.validate(config_to_dict(parse_config(raw)), CONFIG_SCHEMA)


_configs = st.fixed_dictionaries(
    {
        "schema_version": st.just(1),
        "kind": st.sampled_from(["single", "cascade", "ecs-dual", "thermal"]),
        "alpha": st.one_of(
            st.floats(0, 2, allow_nan=False),
            st.tuples(st.floats(-1.4, 1.4), st.floats(-1.4, 1.4)).map(list),
        ),
        "lambda": st.floats(0, 0.1),
    },
    optional={
        "analyses": st.lists(st.sampled_from(["fidelity-targets", "wigner", "mandel-q", "entropy", "distribution"]), unique=True),
        "max_leakage": st.floats(1e-9, 1e-3),
    },
)


@settings(max_examples=60, deadline=None)
@given(raw=_configs, n=st.integers(1, 4), beta=st.floats(0, 2), nbar=st.floats(0, 0.5))
def test_config_round_trip(raw, n, beta, nbar):
    raw = dict(raw)
    raw.update({"cascade": {"n_amplifiers": n}, "ecs-dual": {"beta": beta}, "thermal": {"nbar": nbar}}.get(raw["kind"], {}))
    first = parse_config(raw)
    canonical = config_to_dict(first)
    second = parse_config(json.loads(dumps(canonical)))
    # parsing fills in the resolved truncation; compare semantically
    assert second == first or config_to_dict(second) == canonical
    assert dumps(config_to_dict(second)) == dumps(canonical)
    jsonschema.validate(canonical, CONFIG_SCHEMA)


@pytest.mark.parametrize(
    "patch,field",
    [
        ({"lambda": "0.01"}, "lambda"),
        ({"colour": 1}, "colour"),
        ({"kind": "quantum"}, "kind"),
        ({"schema_version": 2}, "schema_version"),
        ({"kind": "cascade"}, "n_amplifiers"),
        ({"kind": "ecs-dual"}, "beta"),
        ({"kind": "thermal"}, "nbar"),
        ({"alpha": [1, 2, 3]}, "alpha"),
        ({"truncations": {"signal": 2.5}}, "truncations.signal"),
        ({"truncations": {"pump": 3}}, "truncations.pump"),
        ({"analyses": ["tomography"]}, "analyses"),
        ({"wigner": {"x_range": [1, -1]}}, "wigner.x_range"),
        ({"wigner": {"target": "idler"}}, "wigner.target"),
        ({"herald": {"pair": [0, 1]}}, "herald.kind"),
        ({"n_amplifiers": 0}, "n_amplifiers"),
    ],
)
def test_config_errors_name_field(patch, field):
    raw = {"schema_version": 1, "kind": "single", "alpha": 1.0, "lambda": LAM}
    raw.update(patch)
    with pytest.raises(ConfigError) as info:
        parse_config(raw)
    assert info.value.field == field
    assert field in str(info.value)


def test_missing_required_field():
    with pytest.raises(ConfigError) as info:
        parse_config({"schema_version": 1, "kind": "single", "alpha": 1.0})
    assert info.value.field == "lambda"
    with pytest.raises(ConfigError):
        parse_config([1, 2])


@pytest.mark.parametrize(
    "patch,field",
    [
        ({"lambda": 0.6}, "lambda"),
        ({"truncations": {"signal": 8}}, "truncations.signal"),
        ({"truncations": {"idler": 2}}, "truncations.idler"),
        ({"kind": "thermal", "nbar": -0.1}, "nbar"),
    ],
)
def test_guard_errors_name_field(patch, field):
    raw = {"schema_version": 1, "kind": "single", "alpha": 1.0, "lambda": LAM}
    raw.update(patch)
    with pytest.raises(ScenarioError) as info:
        parse_config(raw)
    assert info.value.field == field


def test_complex_alpha_accepted():
    config = cfg(alpha=[0.5, -0.5])
    assert config.alpha == complex(0.5, -0.5)
    report = run(config)
    assert report.fidelities["signal_vs_pacs1"] >= 0.999
    assert np.isclose(report.config["alpha"][1], -0.5)
