"""End-to-end checks of the scheme's physics claims, used by ``spacsim verify``.

Each check is either asserted (it can fail the run) or reported only. Reported
lines carry measured values next to the competing closed forms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations
from typing import Callable

import numpy as np

from .amplifier import CascadeLayout, amplifier_unitary, cascade_input, evolve_cascade
from .analysis import fidelity, mandel_q, wigner, wigner_point
from .canonical import dumps
from .fock import default_signal_dim, edge_population, laguerre
from .herald import HeraldPattern, combinatorial_reference, herald_probability_reference, project
from .scenarios import parse_config, run
from .states import coherent, fock, ii3_state, pacs, w_state
from .thermal import bogoliubov_coeffs, evolve_thermal, heralded_thermal_spacs, thermal_coherent_input

__all__ = ["Check", "run_checks", "format_table", "CRITERIA"]

LAM = 0.01
FIDELITY_FLOOR = 1 - 10 * LAM**2


@dataclass(frozen=True)
class Check:
    criterion: int
    name: str
    passed: bool
    detail: str
    asserted: bool = True

    @property
    def status(self) -> str:
        if not self.asserted:
            return "REPORT"
        return "PASS" if self.passed else "FAIL"


def _cascade(alpha: complex, n: int, lam: float = LAM, signal_dim: int | None = None):
    dim = signal_dim or default_signal_dim(alpha)
    layout = CascadeLayout.uniform(dim, n, lam)
    return evolve_cascade(cascade_input(coherent(dim, alpha), layout), layout), dim


def criterion_1() -> list[Check]:
    checks = []
    for alpha in (0.0, 1.0, 2.0):
        out, _ = _cascade(alpha, 1, signal_dim=max(30, default_signal_dim(alpha)))
        p = project(out, HeraldPattern.exact((1,))).probability
        ratio = p / (LAM**2 * (1 + alpha**2))
        checks.append(Check(1, f"single-amplifier herald law alpha={alpha:g}", 0.999 <= ratio <= 1.001,
                            f"p/(lam^2(1+|alpha|^2)) = {ratio:.6f} in [0.999, 1.001]"))
    return checks


def criterion_2() -> list[Check]:
    out, _ = _cascade(1.0, 1)
    p1 = project(out, HeraldPattern.any_single()).probability
    checks = []
    for n in (2, 3, 4):
        out, _ = _cascade(1.0, n)
        pn = project(out, HeraldPattern.any_single()).probability
        rel = abs(pn / (n * p1) - 1)
        checks.append(Check(2, f"cascade enhancement N={n}", rel <= 1e-3, f"|p_N/(N p_1) - 1| = {rel:.2e} <= 1e-3"))
    return checks


def criterion_3() -> list[Check]:
    checks = []
    for alpha in (0.5, 1.0, 2.0):
        out, dim = _cascade(alpha, 1)
        res = project(out, HeraldPattern.exact((1,)))
        f = fidelity(res.signal_state, pacs(dim, alpha, 1))
        checks.append(Check(3, f"SPACS fidelity alpha={alpha:g}", f >= FIDELITY_FLOOR, f"F = {f:.8f} >= {FIDELITY_FLOOR}"))
    return checks


def criterion_4() -> list[Check]:
    checks = []
    for n in (2, 3, 4):
        out, _ = _cascade(1.0, n)
        res = project(out, HeraldPattern.any_single())
        f = fidelity(res.idler_state, w_state(n))
        checks.append(Check(4, f"W-state idlers N={n}", f >= 0.999, f"F = {f:.8f} >= 0.999"))
        per = [project(out, HeraldPattern.exact(o)).signal_state for o in HeraldPattern.any_single().outcomes(n)]
        worst = min(fidelity(a, b) for a, b in combinations(per, 2))
        checks.append(Check(4, f"which-detector indistinguishability N={n}", worst >= 0.999,
                            f"min pairwise F = {worst:.8f} >= 0.999"))
    return checks


def criterion_5() -> list[Check]:
    out, dim = _cascade(1.0, 2)
    f2 = fidelity(project(out, HeraldPattern.coincidence(0, 1)).signal_state, pacs(dim, 1.0, 2))
    out3, _ = _cascade(1.0, 3)
    f3 = fidelity(project(out3, HeraldPattern.any_coincidence()).idler_state, ii3_state())
    return [
        Check(5, "N=2 coincidence signal vs |alpha,2>", f2 >= 0.999, f"F = {f2:.8f} >= 0.999"),
        Check(5, "N=3 two-click idlers vs |II>_3", f3 >= 0.999, f"F = {f3:.8f} >= 0.999"),
    ]


def criterion_6() -> list[Check]:
    checks = []
    for n in (2, 3):
        out, _ = _cascade(1.0, n)
        measured = project(out, HeraldPattern.any_coincidence()).probability
        prefixed = herald_probability_reference(n, 2, 1.0, LAM)
        comb = combinatorial_reference(n, 2, 1.0, LAM)
        rel_linear = abs(measured / prefixed - 1)
        rel_comb = abs(measured / comb - 1)
        checks.append(Check(6, f"p_{n}^2 prefactor comparison", True,
                            f"measured {measured:.4e}; N*lam^4*2!L_2 = {prefixed:.4e} (rel {rel_linear:.3f}); "
                            f"C(N,2)*lam^4*2!L_2 = {comb:.4e} (rel {rel_comb:.3f})", asserted=False))
        checks.append(Check(6, f"p_{n}^2 matches a candidate within 5%", min(rel_linear, rel_comb) <= 0.05,
                            f"best relative deviation {min(rel_linear, rel_comb):.4f} <= 0.05"))
    return checks


def criterion_7() -> list[Check]:
    report = run(parse_config({"schema_version": 1, "kind": "ecs-dual", "alpha": 1.0, "beta": 1.0, "lambda": LAM}))
    f_i = report.fidelities["upper_vs_espacs_i"]
    f_ii = report.fidelities["lower_vs_espacs_ii"]
    ratio = report.probabilities["upper_over_lower"]
    rel = abs(ratio / 2 - 1)
    return [
        Check(7, "upper herald vs ESPACS-I", f_i >= 0.999, f"F = {f_i:.8f} >= 0.999"),
        Check(7, "lower herald vs ESPACS-II", f_ii >= 0.999, f"F = {f_ii:.8f} >= 0.999"),
        Check(7, "upper/lower herald probability ratio = 2", rel <= 1e-2, f"ratio = {ratio:.6f}, |ratio/2 - 1| = {rel:.3e} <= 1e-2"),
    ]


def criterion_8() -> list[Check]:
    grid = (0.0, 0.05, 0.1, 0.2)
    dim = 30
    probs, fids = [], []
    for nbar in grid:
        h = heralded_thermal_spacs(evolve_thermal(thermal_coherent_input(dim, 1.0, nbar), LAM), 1.0)
        probs.append(h.probability)
        fids.append(h.ideal_fidelity)
    checks = [
        Check(8, "herald probability strictly increasing in nbar", all(b > a for a, b in zip(probs, probs[1:])),
              "p = " + ", ".join(f"{p:.6e}" for p in probs)),
        Check(8, "SPACS fidelity strictly decreasing in nbar", all(b < a for a, b in zip(fids, fids[1:])),
              "F = " + ", ".join(f"{f:.6f}" for f in fids)),
    ]
    for nbar, p in zip(grid[1:], probs[1:]):
        u, _ = bogoliubov_coeffs(nbar)
        ratio = p / probs[0]
        dev_u, dev_u2 = abs(ratio / u - 1), abs(ratio / u**2 - 1)
        checks.append(Check(8, f"p(nbar)/p(0) at nbar={nbar:g}", True,
                            f"ratio {ratio:.6f}; u = {u:.6f} (rel {dev_u:.4f}); u^2 = {u*u:.6f} (rel {dev_u2:.4f})",
                            asserted=False))
        checks.append(Check(8, f"ratio matches u or u^2 within 5% at nbar={nbar:g}", min(dev_u, dev_u2) <= 0.05,
                            f"best relative deviation {min(dev_u, dev_u2):.4f} <= 0.05"))
    return checks


def criterion_9() -> list[Check]:
    q = mandel_q(pacs(default_signal_dim(1.0), 1.0, 1))
    w1 = wigner_point(fock(4, 1), 0.0, 0.0)
    out, _ = _cascade(0.1, 1)
    heralded = project(out, HeraldPattern.exact((1,))).signal_state
    wmin = float(wigner(heralded, (-4, 4), (-4, 4), 81).values.min())
    return [
        Check(9, "Mandel Q of |1,1> negative", q is not None and q < 0, f"Q = {q:.6f} < 0"),
        Check(9, "W(0,0) of |1> = -2/pi", abs(w1 + 2 / math.pi) <= 1e-6, f"W = {w1:.10f}"),
        Check(9, "heralded SPACS alpha=0.1 Wigner negativity", wmin < 0, f"min W = {wmin:.6f} < 0"),
    ]


def laguerre_recurrence_residual(max_m: int = 10, xs=None) -> float:
    """Largest relative residual of (m+1)L_{m+1} = (2m+1-x)L_m - m L_{m-1}."""
    xs = np.linspace(-25.0, 0.0, 101) if xs is None else xs
    worst = 0.0
    for m in range(1, max_m):
        for x in xs:
            a = (m + 1) * laguerre(m + 1, x)
            b = (2 * m + 1 - x) * laguerre(m, x)
            c = m * laguerre(m - 1, x)
            scale = max(1.0, abs(a), abs(b), abs(c))
            worst = max(worst, abs(a - b + c) / scale)
    return worst


def criterion_10() -> list[Check]:
    resid = amplifier_unitary(30, 4, LAM).unitarity_residual()
    leak = max(edge_population(_cascade(1.0, n)[0]) for n in (1, 2, 3, 4))
    lag = laguerre_recurrence_residual()
    cfg = parse_config({"schema_version": 1, "kind": "cascade", "alpha": 1.0, "lambda": LAM, "n_amplifiers": 3,
                        "analyses": ["fidelity-targets", "mandel-q", "entropy", "distribution"]})
    first = dumps(run(cfg).to_dict())
    second = dumps(run(cfg).to_dict())
    return [
        Check(10, "amplifier unitarity residual", resid <= 1e-8, f"max|U^dag U - I| = {resid:.2e} <= 1e-8"),
        Check(10, "cascade norm leakage", leak <= 1e-6, f"edge population {leak:.2e} <= 1e-6"),
        Check(10, "Laguerre recurrence residual (m <= 10)", lag <= 1e-10, f"relative residual {lag:.2e} <= 1e-10"),
        Check(10, "canonical JSON byte-identical", first == second, f"{len(first)} bytes, identical={first == second}"),
    ]


CRITERIA: dict[int, Callable[[], list[Check]]] = {
    1: criterion_1,
    2: criterion_2,
    3: criterion_3,
    4: criterion_4,
    5: criterion_5,
    6: criterion_6,
    7: criterion_7,
    8: criterion_8,
    9: criterion_9,
    10: criterion_10,
}


def run_checks() -> list[Check]:
    checks: list[Check] = []
    for fn in CRITERIA.values():
        checks.extend(fn())
    return checks


def format_table(checks: list[Check]) -> str:
    width = max(len(c.name) for c in checks)
    lines = [f"{'#':>2}  {'status':<6}  {'check':<{width}}  detail"]
    for c in checks:
        lines.append(f"{c.criterion:>2}  {c.status:<6}  {c.name:<{width}}  {c.detail}")
    failed = sum(1 for c in checks if c.asserted and not c.passed)
    asserted = sum(1 for c in checks if c.asserted)
    lines.append(f"{asserted - failed}/{asserted} asserted checks passed")
    return "\n".join(lines)
