"""End-to-end acceptance checks shared by the `selftest` command and the test suite.

Each check returns a CriterionResult holding comparison rows; it passes iff
every row passes. Published reference values are tagged "published", values
from an independent computation "derived".
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List

import numpy as np
from scipy import optimize

from . import constants
from .discretization import build_operator, crossing_scan_discrete, eig
from .io import Check
from .kernels import ProblemParams, SeriesControl, heat_kernel_eigen, heat_kernel_images
from .modes import ModeVector
from .pde_sim import hopf_scan, simulate, trace_consistency
from .popov import (PopovLine, beta_hat, critical_params_delta, critical_params_interval,
                    critical_params_line, curve_arrays, line_curve, t_pole, verify_criterion)
from .spectrum import (characteristic_line, crossing_params, interval_eigenvalues, onset_gain,
                       real_spectrum_line)
from .volterra import VieProblem, lyapunov, solve_vie
from .popov import reference_q


@dataclass
class CriterionResult:
    number: int
    title: str
    checks: List[Check] = field(default_factory=list)
    note: str = ""

    @property
    def passed(self) -> bool:
        return all(c.as_dict()["passed"] for c in self.checks)

    def line(self) -> str:
        worst = ", ".join(f"{c.name}={c.computed:.10g}" for c in self.checks[:3])
        return f"[{'PASS' if self.passed else 'FAIL'}] {self.number:2d} {self.title}: {worst}"


def _flag(name: str, ok: bool, value: float = float("nan"), unit: str = "1") -> Check:
    return Check(name, value if math.isfinite(value) else float(ok), None, None, unit, "property", bool(ok))


# --------------------------------------------------------------- criteria

def line_critical_gain() -> CriterionResult:
    c = critical_params_line(1.0)
    return CriterionResult(1, "line critical gain", [
        Check("beta1", c.beta1, 70.3134, 1e-3, provenance="published"),
    ])


def line_critical_frequency() -> CriterionResult:
    # 1 + tan(sqrt(omega/2)) = 0 between the poles of tan at pi/2 and 3 pi/2
    u = optimize.brentq(lambda v: 1.0 + math.tan(v), math.pi / 2 + 1e-3, 3 * math.pi / 2 - 1e-3,
                        xtol=1e-15, rtol=1e-15)
    w_root = 2 * u * u
    w_scan, _ = crossing_params(ProblemParams("inf", 1.0))
    return CriterionResult(2, "line critical frequency", [
        Check("omega1_root", w_root, constants.B_PI, 1e-9, "1/time", "closed-form"),
        Check("omega1_scan", w_scan, constants.B_PI, 1e-9, "1/time", "closed-form"),
        Check("omega1_value", critical_params_line(1.0).omega1, 11.1033, 1e-4, "1/time", "published"),
    ])


def real_spectrum_onset() -> CriterionResult:
    roots = {(r.k, r.family): r for r in real_spectrum_line(1.0, 2)}
    first, second = roots[(0, "+")], roots[(1, "+")]
    res1 = abs(characteristic_line(math.sqrt(-first.s) * 1j, first.beta, 1.0))
    res2 = abs(characteristic_line(math.sqrt(-second.s) * 1j, second.beta, 1.0))
    return CriterionResult(3, "real-spectrum onset", [
        Check("beta_first", first.beta, math.pi, 1e-14, provenance="published"),
        Check("s_first", first.s, -math.pi**2 / 4, 1e-13, provenance="published"),
        Check("residual_first", res1, 0.0, 1e-10, provenance="closed-form"),
        Check("beta_next", second.beta, 5 * math.pi, 1e-13, provenance="published"),
        Check("s_next", second.s, -25 * math.pi**2 / 4, 1e-12, provenance="published"),
        Check("residual_next", res2, 0.0, 1e-10, provenance="closed-form"),
    ])


def onset_gain_diagnostics() -> CriterionResult:
    h = 1e-5
    d1 = (onset_gain(1 + h) - onset_gain(1 - h)) / (2 * h)
    return CriterionResult(4, "onset-gain diagnostics", [
        Check("Phi_1e4", onset_gain(1e4), math.pi, 1e-2, provenance="published"),
        Check("dPhi_1", d1, -254.0, 6.0, provenance="published"),
        _flag("dPhi_1_in_range", -260.0 <= d1 <= -248.0, d1),
    ])


def popov_tangency() -> CriterionResult:
    p = ProblemParams("inf", 1.0)
    c = critical_params_line(1.0)
    line = PopovLine(c.q, c.beta1)
    rep = verify_criterion(p, line, n_grid=2000, tol=1e-10)

    def F(w):
        x, y = line_curve(1.0, w)
        return float(line.F(x, y))

    return CriterionResult(5, "Popov tangency on the line", [
        _flag("max_F_le_1e-10", rep.satisfied, rep.max_F),
        Check("F_at_omega1", F(c.omega1), 0.0, 1e-8, provenance="closed-form"),
        _flag("F_half_omega1_negative", F(0.5 * c.omega1) < 0, F(0.5 * c.omega1)),
        _flag("F_twice_omega1_negative", F(2.0 * c.omega1) < 0, F(2.0 * c.omega1)),
    ])


def pole_constant() -> CriterionResult:
    return CriterionResult(6, "pole of T", [Check("y_s", t_pole(), 1.4399094, 1e-6, provenance="published")])


def invariant_product() -> CriterionResult:
    checks = []
    for x0 in (0.5, 1.0, 2.0):
        c = critical_params_line(x0)
        checks.append(Check(f"product_x0={x0}", c.product, constants.HOPF_PRODUCT, 1e-12,
                            provenance="closed-form"))
        # independent: tangent slope of the curve at omega1 by central differences
        h = 1e-4 * c.omega1
        xp, yp = line_curve(x0, c.omega1 + h)
        xm, ym = line_curve(x0, c.omega1 - h)
        q_num = float((xp - xm) / (yp - ym))
        w_num, _ = crossing_params(ProblemParams("inf", x0))
        checks.append(Check(f"numeric_product_x0={x0}", w_num * q_num, constants.HOPF_PRODUCT, 1e-6,
                            provenance="derived"))
    return CriterionResult(7, "invariant product omega1*q", checks)


def small_delta_limits() -> CriterionResult:
    d = 0.02
    c = critical_params_interval(ProblemParams(1.0, 1.0 - d))
    tp = 2 * math.pi**2
    return CriterionResult(8, "small-delta limits", [
        Check("omega1", c.omega1, tp, 0.02, "1/time", "published", relative=True),
        Check("inv_q", c.inv_q, tp, 0.02, "1/time", "published", relative=True),
        Check("beta_delta", c.beta1 * d, math.exp(math.pi) + math.exp(-math.pi), 0.02,
              provenance="published", relative=True),
    ])


def delta_product_limits() -> CriterionResult:
    lo, hi = critical_params_delta(0.02), critical_params_delta(0.98)
    return CriterionResult(9, "delta limits of omega1*q", [
        Check("product_0.02", lo.product, 1.0, 0.02, provenance="published", relative=True),
        Check("product_0.98", hi.product, constants.HOPF_PRODUCT, 0.02, provenance="published",
              relative=True),
    ])


def discrete_crossing() -> CriterionResult:
    checks = []
    grid = np.arange(66.0, 74.01, 0.5)
    for L in (4.0, 8.0, 16.0):
        tr = crossing_scan_discrete(8, L, 1.0, grid)
        w1, _ = crossing_params(ProblemParams(L, 1.0))
        b = tr.crossing_beta if tr.crossing_beta is not None else float("nan")
        checks.append(_flag(f"beta_L={L:g}_in_[68,73]", 68.0 <= b <= 73.0, b))
        w = tr.crossing_point.s.imag if tr.crossing_point is not None else float("nan")
        checks.append(Check(f"omega_L={L:g}", w, w1, 0.02, "1/time", "derived", relative=True))
    return CriterionResult(10, "discrete imaginary-axis crossing", checks)


def _discrete_errors(m: int, exact: np.ndarray) -> float:
    vals = np.array([p.value for p in eig(build_operator(m, ProblemParams(4.0, 1.0, 10.0)))])
    return max(float(np.min(np.abs(vals - e)) / abs(e)) for e in exact)


def discrete_spectrum_agreement() -> CriterionResult:
    exact = interval_eigenvalues(ProblemParams(4.0, 1.0, 10.0), 5)
    errs = {m: _discrete_errors(m, exact) for m in (6, 7, 8, 9)}
    return CriterionResult(11, "discrete vs analytic spectrum", [
        Check("rel_err_m=8", errs[8], 0.0, 1e-3, provenance="derived"),
        _flag("decreasing_in_m", errs[6] > errs[7] > errs[8] > errs[9], errs[9]),
    ])


def lyapunov_identity() -> CriterionResult:
    p = ProblemParams(4.0, 1.0, 5.0)
    prob = VieProblem(p, ModeVector.basis(1, 4.0, 128))
    traj = solve_vie(prob, 20.0, 1e-3)
    rep = lyapunov(prob, traj, reference_q(1.0))
    return CriterionResult(12, "Lyapunov identity", [
        Check("relative_residual", rep.relative_residual, 0.0, 1e-6, provenance="property"),
        _flag("W1_nonnegative", bool(np.min(rep.W1) >= 0), float(np.min(rep.W1))),
        _flag("W2_nonnegative", bool(np.min(rep.W2) >= 0), float(np.min(rep.W2))),
    ])


def vie_pde_consistency() -> CriterionResult:
    rep = trace_consistency(ModeVector.basis(1, 4.0, 128), ProblemParams(4.0, 1.0, 5.0), 20.0,
                            1e-3, n_modes=128)
    return CriterionResult(13, "Volterra/PDE trace consistency", [
        Check("relative_gap", rep.relative_gap, 0.0, 1e-3, provenance="property"),
    ])


def stability_dichotomy() -> CriterionResult:
    p = ProblemParams(4.0, 1.0)
    w1, _ = crossing_params(p)
    period_ref = 2 * math.pi / w1
    u0 = ModeVector(0.05 * ModeVector.basis(1, 4.0, 128).coeffs, 4.0)
    checks = []
    for b in (1.0, 5.0, 20.0):
        r = simulate(u0, p.with_beta(b), 200.0, 1e-3, 128)
        checks.append(_flag(f"beta={b:g}_decays", r.classification == "decayed", r.amplitude or 0.0))
    for b in (75.0, 80.0):
        r = simulate(u0, p.with_beta(b), 200.0, 1e-3, 128)
        checks.append(_flag(f"beta={b:g}_limit_cycle", r.classification == "limit_cycle",
                            r.amplitude or 0.0))
        checks.append(Check(f"period_beta={b:g}", r.period if r.period else float("nan"), period_ref,
                            0.10, "time", "derived", relative=True))
    return CriterionResult(14, "stability/oscillation dichotomy", checks)


def supercriticality() -> CriterionResult:
    p = ProblemParams(4.0, 1.0)
    bc = critical_params_interval(p).beta1
    betas = [bc - 3.0, bc - 2.0] + list(bc + np.linspace(0.5, 5.0, 10))
    scan = hopf_scan(p, betas, 400.0, 1e-3, beta_ref=bc, fit_window=(bc + 0.5, bc + 5.0))
    below = [a for b, a in zip(scan.betas, scan.amplitudes) if b < bc]
    spectral = crossing_scan_discrete(8, 4.0, 1.0, np.arange(69.0, 72.01, 0.5)).crossing_beta
    return CriterionResult(15, "supercritical onset", [
        _flag("r2_gt_0.95", scan.r2 is not None and scan.r2 > 0.95, scan.r2 or float("nan")),
        _flag("slope_positive", scan.slope is not None and scan.slope > 0, scan.slope or float("nan")),
        _flag("zero_amplitude_below", all(a == 0.0 for a in below), max(below)),
        Check("beta_fit", scan.beta_fit if scan.beta_fit else float("nan"), spectral, 0.03,
              provenance="derived", relative=True),
    ])


def heat_kernel_duality() -> CriterionResult:
    ctl = SeriesControl()
    checks = []
    for L in (2.0, 4.0, 8.0):
        t = ctl.crossover(L)
        for x in (0.0, 1.0):
            e = heat_kernel_eigen(t, x, L, ctl).value
            g = heat_kernel_images(t, x, L, ctl).value
            checks.append(Check(f"L={L:g}_x={x:g}", float(e), float(g), 1e-12, provenance="derived"))
    return CriterionResult(16, "heat-kernel dual representation", checks)


def beta_hat_ordering() -> CriterionResult:
    p = ProblemParams(4.0, 1.0)
    bh = beta_hat(p).beta_hat
    _, b1 = crossing_params(p)
    return CriterionResult(17, "beta_hat ordering", [
        _flag("beta_hat_positive", bh > 0, bh),
        _flag("beta_hat_le_beta1", bh <= b1, b1 - bh),
    ])


CRITERIA: Dict[int, Callable[[], CriterionResult]] = {
    1: line_critical_gain,
    2: line_critical_frequency,
    3: real_spectrum_onset,
    4: onset_gain_diagnostics,
    5: popov_tangency,
    6: pole_constant,
    7: invariant_product,
    8: small_delta_limits,
    9: delta_product_limits,
    10: discrete_crossing,
    11: discrete_spectrum_agreement,
    12: lyapunov_identity,
    13: vie_pde_consistency,
    14: stability_dichotomy,
    15: supercriticality,
    16: heat_kernel_duality,
    17: beta_hat_ordering,
}


def run_all(numbers=None, echo: Callable[[str], None] = print) -> List[CriterionResult]:
    out = []
    for k in sorted(numbers or CRITERIA):
        r = CRITERIA[k]()
        echo(r.line())
        out.append(r)
    return out
