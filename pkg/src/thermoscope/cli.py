"""Command-line entry point: `thermoscope <command> [flags]`.

Exit status is 0 when every embedded check passes, 1 on a failed check or a
computation error, and 2 on a configuration error.
"""
from __future__ import annotations

import argparse
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Callable, Dict, List, Sequence

import numpy as np

from . import constants
from .acceptance import run_all
from .config import ConfigError, RunConfig, build, load_file, parse_grid
from .discretization import build_operator, crossing_scan_discrete, eig, first_eigenfunction_sweep
from .errors import ComputationError, DomainError, PoleError, SearchError, SeriesBudgetError
from .io import Check, summary, write_csv, write_json
from .kernels import ProblemParams, SeriesControl, heat_kernel_eigen, heat_kernel_images, transfer_function
from .modes import ModeVector
from .pde_sim import hopf_scan, simulate
from .popov import (PopovLine, beta_hat, critical_inequality, critical_params, critical_params_delta,
                    critical_params_interval, critical_points, curve_arrays, line_curve, reference_q,
                    verify_criterion)
from .spectrum import (crossing_params, eigenvalues_within, interval_eigenvalues, merge_beta, line_pair_point, real_spectrum_line,
                       trace_pair)
from .volterra import VieProblem, lyapunov, solve_vie

COMMANDS = ("kernels", "spectrum", "popov", "discretize", "vie", "simulate", "sweep", "figures", "selftest")


class Run:
    """Collects artifacts and checks for one command."""

    def __init__(self, cfg: RunConfig):
        self.cfg = cfg
        self.out = Path(cfg.out)
        self.artifacts: List[str] = []
        self.checks: List[Check] = []
        self.results: Dict[str, object] = {}

    def csv(self, name: str, columns, rows) -> None:
        write_csv(self.out / name, columns, rows)
        self.artifacts.append(name)

    def finish(self) -> int:
        c = self.cfg
        params = {"L": c.L, "x0": c.x0, "beta": c.beta, "m": c.m, "delta": c.delta, "tol": c.tol,
                  "T": c.T, "dt": c.dt, "n_modes": c.n_modes}
        name = f"{c.command}.json"
        s = summary(c.command, params, self.results, self.checks, self.artifacts + [name])
        write_json(self.out / name, s)
        for ch in self.checks:
            d = ch.as_dict()
            print(f"[{'PASS' if d['passed'] else 'FAIL'}] {d['name']}: {ch.computed:.12g}")
        return 0 if s["status"] == "pass" else 1


def _tol(cfg: RunConfig, default: float) -> float:
    return cfg.tol if cfg.tol is not None else default


def _threads() -> int:
    raw = os.environ.get("THERMOSCOPE_THREADS")
    if raw is None:
        return os.cpu_count() or 1
    try:
        n = int(raw)
    except ValueError as exc:
        raise ConfigError(f"THERMOSCOPE_THREADS must be an integer, got {raw!r}") from exc
    if n < 1:
        raise ConfigError("THERMOSCOPE_THREADS must be >= 1")
    return n


def ordered_map(fn: Callable, items: Sequence) -> list:
    """Apply fn concurrently; results come back in input order.

    Each result is (ok, value); an exception becomes (False, message) so one
    bad row does not abort the sweep.
    """
    def safe(item):
        try:
            return True, fn(item)
        except (DomainError, SearchError, ComputationError, PoleError, SeriesBudgetError,
                ArithmeticError) as exc:
            return False, f"{type(exc).__name__}: {exc}"

    with ThreadPoolExecutor(max_workers=min(_threads(), max(1, len(items)))) as ex:
        return list(ex.map(safe, items))


# ------------------------------------------------------------- commands

def cmd_kernels(run: Run) -> None:
    cfg = run.cfg
    p = cfg.params()
    omega = np.geomspace(1e-2, 1e3, 101)
    g = transfer_function(p, 1j * omega)
    run.csv("transfer.csv", [("omega", "1/time"), ("re_G", "length*time"), ("im_G", "length*time")],
            zip(omega, np.real(g), np.imag(g)))
    if p.is_line:
        return
    ctl = SeriesControl()
    tc = ctl.crossover(p.L)
    rows = []
    for t in tc * np.array([0.25, 0.5, 1.0, 2.0, 4.0]):
        for x in (0.0, p.x0):
            e = heat_kernel_eigen(t, x, p.L, ctl).value
            i = heat_kernel_images(t, x, p.L, ctl).value
            rows.append((t, x, e, i, abs(e - i)))
            run.checks.append(Check(f"dual_t={t:.6g}_x={x:g}", float(e), float(i), _tol(cfg, 1e-12)))
    run.csv("heat_kernel.csv", [("t", "time"), ("x", "length"), ("k_eigen", "1/length"),
                                ("k_images", "1/length"), ("abs_diff", "1/length")], rows)
    run.results["crossover_time"] = tc


def cmd_spectrum(run: Run) -> None:
    cfg = run.cfg
    p = cfg.params()
    x0 = p.x0
    w1, b1 = crossing_params(p)
    # beta0: gain where the first complex pair appears (closed form on the line)
    beta0 = math.pi / x0 if p.is_line else merge_beta(p.L, x0)
    run.results.update(beta0=beta0, beta1=b1, omega1=w1)
    if p.is_line:
        run.checks.append(Check("beta1", b1, constants.C_PI / x0, _tol(cfg, 1e-9), provenance="closed-form",
                                relative=True))
        run.checks.append(Check("omega1", w1, constants.B_PI / x0**2, _tol(cfg, 1e-9), "1/time",
                                "closed-form", relative=True))
        if x0 == 1.0:
            run.checks.append(Check("beta1_published", b1, 70.3134, 1e-3, provenance="published"))
        rs = real_spectrum_line(x0)
        run.csv("real_spectrum.csv", [("k", "1"), ("family", "1"), ("s", "1/time"), ("beta", "1")],
                [(r.k, r.family, r.s, r.beta) for r in rs])
        betas = _pair_grid(beta0, cfg.beta_max, 0.5)
        pts = [line_pair_point(b, x0) for b in betas]
    else:
        betas = _pair_grid(beta0, cfg.beta_max, 0.5)
        tr = trace_pair(betas, p)
        pts = tr.points
        run.results["trajectory_crossing_beta"] = tr.crossing_beta
        if tr.diagnostic:
            run.results["diagnostic"] = tr.diagnostic
        if tr.crossing_beta is not None:
            run.checks.append(Check("crossing_beta_vs_transfer", tr.crossing_beta, b1, _tol(cfg, 1e-6),
                                    relative=True))
    worst = max((pt.residual for pt in pts), default=0.0)
    run.checks.append(Check("max_residual", worst, 0.0, 1e-9, provenance="property"))
    run.csv("first_pair.csv", [("beta", "1"), ("re_s", "1/time"), ("im_s", "1/time"), ("residual", "1")],
            [(pt.beta, pt.s.real, pt.s.imag, pt.residual) for pt in pts])


def cmd_popov(run: Run) -> None:
    cfg = run.cfg
    p = cfg.params()
    c = critical_params(p)
    line = PopovLine(c.q, c.beta1)
    rep = verify_criterion(p, line, tol=_tol(cfg, 1e-10))
    run.results.update(omega1=c.omega1, beta1=c.beta1, q=c.q, product=c.product, max_F=rep.max_F,
                       argmax_omega=rep.argmax_omega)
    w = np.geomspace(rep.window[0], rep.window[1], 2000)
    x, y = curve_arrays(p, w)
    run.csv("popov_curve.csv", [("omega", "1/time"), ("x", "length*time"), ("y", "length"), ("F", "1/time")],
            zip(w, x, y, line.F(x, y)))
    if p.is_line:
        run.checks.append(Check("product", c.product, constants.HOPF_PRODUCT, 1e-12, provenance="closed-form"))
    else:
        bh = beta_hat(p)
        run.results.update(beta_hat=bh.beta_hat, M=bh.M, reference_q=bh.q)
        if cfg.check:
            run.checks.append(Check("beta_hat_le_beta1", float(bh.beta_hat <= c.beta1), 1.0, 0.0,
                                    provenance="property"))
    if cfg.check:
        run.checks.append(Check("criterion_satisfied", float(rep.satisfied), 1.0, 0.0, provenance="property"))


def cmd_discretize(run: Run) -> None:
    cfg = run.cfg
    p = cfg.params()
    pairs = eig(build_operator(cfg.m, p))
    run.csv("eigenvalues.csv", [("index", "1"), ("re_mu", "1/time"), ("im_mu", "1/time"), ("residual", "1")],
            [(i, e.value.real, e.value.imag, e.residual) for i, e in enumerate(pairs)])
    exact = interval_eigenvalues(p, 5)
    vals = np.array([e.value for e in pairs])
    for k, e in enumerate(exact):
        near = vals[np.argmin(np.abs(vals - e))]
        run.checks.append(Check(f"mu_{k}", abs(near), abs(e), _tol(cfg, 1e-3), "1/time", relative=True))
    if cfg.betas is not None:
        tr = crossing_scan_discrete(cfg.m, p.L, p.x0, cfg.betas)
        run.csv("crossing_scan.csv", [("beta", "1"), ("re_s", "1/time"), ("im_s", "1/time")],
                [(pt.beta, pt.s.real, pt.s.imag) for pt in tr.points])
        run.results["crossing_beta"] = tr.crossing_beta
        if tr.crossing_point is not None:
            run.results["crossing_omega"] = tr.crossing_point.s.imag


def _start_state(cfg: RunConfig, scale: float = 1.0) -> ModeVector:
    p = cfg.params()
    if p.is_line:
        raise DomainError(f"{cfg.command} needs a finite L")
    return ModeVector(scale * ModeVector.basis(1, p.L, cfg.n_modes).coeffs, p.L)


def _pair_grid(beta0: float, beta_max: float, step: float) -> np.ndarray:
    """Gains on a step lattice strictly above beta0, where the first complex pair exists."""
    start = (math.floor(beta0 / step) + 1) * step
    return np.arange(start, beta_max + 1e-9, step)


def cmd_vie(run: Run) -> None:
    cfg = run.cfg
    p = cfg.params()
    prob = VieProblem(p, _start_state(cfg))
    traj = solve_vie(prob, cfg.T, cfg.dt)
    rep = lyapunov(prob, traj, reference_q(p.x0))
    run.csv("vie.csv", [("t", "time"), ("y", "temperature"), ("W", "1"), ("V", "1"), ("R", "1")],
            zip(traj.t, traj.y, rep.W, rep.V, rep.R))
    run.results.update(relative_residual=rep.relative_residual, y_final=float(traj.y[-1]))
    run.checks.append(Check("lyapunov_relative_residual", rep.relative_residual, 0.0, _tol(cfg, 1e-6),
                            provenance="property"))
    run.checks.append(Check("W1_min_nonnegative", float(np.min(rep.W1) >= 0), 1.0, 0.0, provenance="property"))
    run.checks.append(Check("W2_min_nonnegative", float(np.min(rep.W2) >= 0), 1.0, 0.0, provenance="property"))


def cmd_simulate(run: Run) -> None:
    cfg = run.cfg
    p = cfg.params()
    res = simulate(_start_state(cfg, 0.05), p, cfg.T, cfg.dt, cfg.n_modes)
    run.csv("simulate.csv", [("t", "time"), ("y", "temperature")], zip(res.t, res.y))
    run.results.update(classification=res.classification, period=res.period, amplitude=res.amplitude,
                       period_cv=res.period_cv)


def _sweep_delta(d: float):
    c = critical_params_delta(d)
    return (d, c.omega1, c.beta1, c.q, c.product)


def cmd_sweep(run: Run) -> None:
    cfg = run.cfg
    if cfg.grid == "delta":
        grid = cfg.deltas or tuple(np.round(np.arange(1, 20) * 0.05, 12))
        cols = [("delta", "1"), ("omega1", "1/time"), ("beta1", "1"), ("q", "time"), ("product", "1")]
        fn = _sweep_delta
    elif cfg.grid == "L":
        grid = cfg.Ls or (4.0, 8.0, 16.0)
        x0, m = cfg.x0, cfg.m
        cols = [("L", "length"), ("omega1", "1/time"), ("beta1", "1"), ("discrete_beta", "1"),
                ("discrete_omega", "1/time")]

        def fn(L):
            w1, b1 = crossing_params(ProblemParams(L, x0))
            tr = crossing_scan_discrete(m, L, x0, np.arange(66.0, 74.01, 0.5))
            if tr.crossing_point is None:
                raise SearchError("no discrete crossing in [66, 74]")
            return (L, w1, b1, tr.crossing_beta, tr.crossing_point.s.imag)
    else:
        p = cfg.params()
        grid = cfg.betas or tuple(np.arange(3.0, 73.0, 0.5))
        grid = tuple(b for b in grid if b * p.x0 > math.pi)
        tr = trace_pair(grid, p)
        lookup = {pt.beta: pt for pt in tr.points}
        cols = [("beta", "1"), ("re_s", "1/time"), ("im_s", "1/time"), ("residual", "1")]

        def fn(b):
            if b not in lookup:
                raise SearchError(f"continuation lost the pair before beta={b}")
            pt = lookup[b]
            return (b, pt.s.real, pt.s.imag, pt.residual)
    rows = ordered_map(fn, list(grid))
    failed = [(g, v) for g, (ok, v) in zip(grid, rows) if not ok]
    run.csv(f"sweep_{cfg.grid}.csv", cols + [("status", "1")],
            [tuple(v) + ("ok",) if ok else (g,) + ("",) * (len(cols) - 1) + (v,)
             for g, (ok, v) in zip(grid, rows)])
    run.results.update(rows=len(grid), failed=len(failed))
    run.checks.append(Check("failed_rows", float(len(failed)), 0.0, 0.0, provenance="property"))


def cmd_figures(run: Run) -> None:
    cfg = run.cfg
    m, L, x0 = cfg.m, 4.0, 1.0
    # first eigenfunction of A and of its transpose over beta
    betas = np.round(np.arange(0.0, 3.01, 0.25), 12)
    for adj, name in ((False, "fig1_eigenfunctions.csv"), (True, "fig2_adjoint_eigenfunctions.csv")):
        sw = first_eigenfunction_sweep(m, L, x0, betas, adjoint=adj)
        cols = [("x", "length")] + [(f"v_beta={b:g}", "1/sqrt(length)") for b in sw.betas]
        run.csv(name, cols, zip(sw.grid.points, *sw.vectors))
        run.results[f"sign_loss_beta_{'adjoint' if adj else 'operator'}"] = sw.sign_loss_beta
    # low eigenvalues of A_{L,beta} through the first merge of real eigenvalues
    rows = []
    for b in np.round(np.arange(0.0, 6.001, 0.1), 12):
        mus = eigenvalues_within(ProblemParams(L, x0, b), 2.0)
        rows += [(b, i, mu.real, mu.imag) for i, mu in enumerate(mus)]
    run.csv("fig_merging.csv", [("beta", "1"), ("index", "1"), ("re_mu", "1/time"), ("im_mu", "1/time")], rows)
    for Lv in (4.0, 8.0, 16.0):
        run.results[f"merge_beta_L{Lv:g}"] = merge_beta(Lv, x0)
    # first complex pair for L = 4, 8, 16 over beta in [3, 73)
    rows = []
    grid = np.arange(3.0, 73.0, 0.25)
    grid = grid[grid * x0 > math.pi]
    for Lv in (4.0, 8.0, 16.0):
        tr = trace_pair(grid, ProblemParams(Lv, x0))
        rows += [(Lv, pt.beta, pt.s.real, pt.s.imag) for pt in tr.points]
        run.results[f"crossing_beta_L{Lv:g}"] = tr.crossing_beta
    run.csv("fig3_crossing.csv", [("L", "length"), ("beta", "1"), ("re_s", "1/time"), ("im_s", "1/time")], rows)
    # line Popov curve with its tangent line
    c = critical_params(ProblemParams("inf", x0))
    w = np.geomspace(1e-2, 1e3, 1500)
    x, y = line_curve(x0, w)
    run.csv("fig4_popov_line.csv", [("omega", "1/time"), ("x", "length*time"), ("y", "length"),
                                    ("tangent_y", "length")], zip(w, x, y, (x + 1 / c.beta1) / c.q))
    # delta family curves
    rows = []
    for d in np.round(np.arange(0.1, 0.91, 0.1), 12):
        p = ProblemParams(1.0, 1.0 - d)
        wd = np.geomspace(1e-1, 1e4, 800)
        xd, yd = curve_arrays(p, wd)
        rows += list(zip([d] * wd.size, wd, xd, yd))
    run.csv("fig5_popov_delta.csv", [("delta", "1"), ("omega", "1/time"), ("x", "length*time"),
                                     ("y", "length")], rows)
    rows = [_sweep_delta(d) for d in np.round(np.arange(1, 50) * 0.02, 12)]
    run.csv("fig6_critical_delta.csv", [("delta", "1"), ("omega1", "1/time"), ("beta1", "1"), ("q", "time"),
                                        ("product", "1")], rows)
    ys = critical_points(40.0)
    run.csv("critical_inequality.csv", [("y", "1"), ("value", "1")], zip(ys, critical_inequality(ys)))
    run.checks.append(Check("critical_inequality_min", float(np.min(critical_inequality(ys)) >= -1e-9),
                            1.0, 0.0, provenance="property"))
    if cfg.all:
        p = ProblemParams(L, x0)
        bc = critical_params_interval(p).beta1
        bs = [bc - 3.0, bc - 2.0] + list(bc + np.linspace(0.5, 5.0, 10))
        scan = hopf_scan(p, bs, 400.0, cfg.dt, beta_ref=bc, fit_window=(bc + 0.5, bc + 5.0))
        run.csv("hopf_scan.csv", [("beta", "1"), ("amplitude", "temperature"), ("period", "time"),
                                  ("classification", "1")],
                zip(scan.betas, [a if a is not None else float("nan") for a in scan.amplitudes],
                    [v if v is not None else float("nan") for v in scan.periods], scan.classifications))
        run.results.update(hopf_beta_fit=scan.beta_fit, hopf_r2=scan.r2, hopf_slope=scan.slope)


def cmd_selftest(run: Run) -> None:
    for r in run_all(echo=lambda s: None):
        print(r.line())
        for ch in r.checks:
            ch.name = f"c{r.number:02d}.{ch.name}"
            run.checks.append(ch)
        run.results[f"criterion_{r.number:02d}"] = "pass" if r.passed else "fail"


HANDLERS = {"kernels": cmd_kernels, "spectrum": cmd_spectrum, "popov": cmd_popov, "discretize": cmd_discretize,
            "vie": cmd_vie, "simulate": cmd_simulate, "sweep": cmd_sweep, "figures": cmd_figures,
            "selftest": cmd_selftest}


# ---------------------------------------------------------------- parsing

def _grid_arg(text: str):
    try:
        return parse_grid(text)
    except ConfigError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def make_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="INI file with [params], [numerics], [grids], [output]")
    common.add_argument("--L", help='half-length of the interval, or "inf" for the line')
    common.add_argument("--x0", type=float, help="sensor position")
    common.add_argument("--beta", type=float, help="feedback gain")
    common.add_argument("--m", type=int, help="grid level (2^m - 1 points)")
    common.add_argument("--delta", type=float, help="relative sensor distance to the boundary")
    common.add_argument("--tol", type=float, help="tolerance for the embedded checks")
    common.add_argument("--T", type=float, help="time horizon")
    common.add_argument("--dt", type=float, help="time step")
    common.add_argument("--n-modes", dest="n_modes", type=int, help="number of sine modes")
    common.add_argument("--beta-max", dest="beta_max", type=float, help="largest gain on trajectories")
    common.add_argument("--betas", type=_grid_arg, help="gain grid, a,b,c or start:stop:step")
    common.add_argument("--deltas", type=_grid_arg, help="delta grid")
    common.add_argument("--Ls", type=_grid_arg, help="half-length grid")
    common.add_argument("--grid", choices=("delta", "L", "beta"), help="sweep axis")
    common.add_argument("--out", help="output directory")
    common.add_argument("--line", action="store_const", const=True, help="use the whole line (L = inf)")
    common.add_argument("--interval", action="store_const", const=True, help="use a finite interval")
    common.add_argument("--check", action="store_const", const=True, help="add criterion checks")
    common.add_argument("--all", action="store_const", const=True, help="include slow artifacts")
    parser = argparse.ArgumentParser(prog="thermoscope", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common])
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    file_values = load_file(args.config) if args.config else {}
    flags = {k: v for k, v in vars(args).items() if k not in ("command", "config", "interval")}
    if args.line and args.interval:
        raise ConfigError("--line and --interval are exclusive")
    if args.line:
        if args.L is not None and args.L.strip().lower() not in ("inf", "infinity"):
            raise ConfigError("--line conflicts with a finite --L")
        flags["L"] = "inf"
    if args.interval and str(flags.get("L") or file_values.get("L", "4")).strip().lower() in ("inf", "infinity"):
        raise ConfigError("--interval needs a finite --L")
    return build(args.command, file_values, flags)


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    try:
        cfg = config_from_args(args)
        run = Run(cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    try:
        HANDLERS[cfg.command](run)
        return run.finish()
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except DomainError as exc:
        print(f"invalid parameters for {cfg.command}: {exc}", file=sys.stderr)
        return 2
    except (SearchError, ComputationError, PoleError, SeriesBudgetError, ArithmeticError) as exc:
        print(f"computation failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
