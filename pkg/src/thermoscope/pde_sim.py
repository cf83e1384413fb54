"""Spectral Galerkin simulation of u_t + A_L u = -f(beta u(x0)) delta_0.

Each sine mode obeys
    du_n/dt = -lambda_n^2 u_n - f(beta y(t)) phi_n(0),   y(t) = sum_n u_n phi_n(x0),
and is advanced with the exponential Euler (ETD1) step
    u_n <- exp(-lambda_n^2 dt) u_n - f(beta y) phi_n(0) (1 - exp(-lambda_n^2 dt)) / lambda_n^2.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numba
import numpy as np

from .errors import ComputationError, DomainError
from .kernels import ProblemParams
from .modes import ModeVector, phi, phi_at, wavenumbers
from .volterra import Nonlinearity, Trajectory, VieProblem, solve_vie, time_grid

_KINDS = {"tanh": 0, "clipped-identity": 1, "identity": 2}


@numba.njit(cache=True)
def _etd_loop(c, E, B, px0, beta, nsteps, kind, snap_every, snaps):
    y = np.empty(nsteps + 1)
    k = 0
    for n in range(nsteps + 1):
        yn = 0.0
        for i in range(c.size):
            yn += px0[i] * c[i]
        y[n] = yn
        if snap_every > 0 and n % snap_every == 0:
            snaps[k, :] = c
            k += 1
        if n == nsteps:
            break
        w = beta * yn
        if kind == 0:
            fv = math.tanh(w)
        elif kind == 1:
            fv = min(1.0, max(-1.0, w))
        else:
            fv = w
        for i in range(c.size):
            c[i] = E[i] * c[i] - fv * B[i]
    return y


def _python_loop(c, E, B, px0, beta, nsteps, f, snap_every, snaps):
    y = np.empty(nsteps + 1)
    k = 0
    for n in range(nsteps + 1):
        y[n] = px0 @ c
        if snap_every > 0 and n % snap_every == 0:
            snaps[k] = c
            k += 1
        if n == nsteps:
            break
        c = E * c - float(f(beta * y[n])) * B
    return y


@dataclass
class SimResult:
    trajectory: Trajectory
    classification: str  # "decayed", "limit_cycle" or "undecided"
    period: Optional[float] = None
    amplitude: Optional[float] = None
    period_cv: Optional[float] = None
    final_modes: Optional[ModeVector] = None

    @property
    def t(self):
        return self.trajectory.t

    @property
    def y(self):
        return self.trajectory.y


@dataclass(frozen=True)
class CycleCriteria:
    transient_fraction: float = 0.5
    min_crossings: int = 5
    max_period_cv: float = 0.02
    decay_threshold: float = 1e-6  # relative to max |y| over the run
    settle_tol: float = 0.05  # allowed amplitude drift across the kept window


def upward_crossings(t: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Times where y crosses zero from below, by linear interpolation."""
    i = np.nonzero((y[:-1] < 0) & (y[1:] >= 0))[0]
    return t[i] - y[i] * (t[i + 1] - t[i]) / (y[i + 1] - y[i])


def classify(t: np.ndarray, y: np.ndarray, crit: CycleCriteria = CycleCriteria()):
    """Return (classification, period, amplitude, period_cv) for a sampled signal."""
    scale = float(np.max(np.abs(y))) if y.size else 0.0
    T = t[-1] - t[0]
    tail = t >= t[-1] - 0.1 * T
    if scale == 0.0 or np.max(np.abs(y[tail])) < crit.decay_threshold * scale:
        return "decayed", None, 0.0, None
    keep = t >= t[0] + crit.transient_fraction * T
    tk, yk = t[keep], y[keep]
    tc = upward_crossings(tk, yk)
    if tc.size < crit.min_crossings:
        return "undecided", None, None, None
    periods = np.diff(tc)
    period = float(np.mean(periods))
    cv = float(np.std(periods) / period)
    half = tk.size // 2
    a1 = 0.5 * (np.max(yk[:half]) - np.min(yk[:half]))
    a2 = 0.5 * (np.max(yk[half:]) - np.min(yk[half:]))
    last = tk >= tk[-1] - 3.0 * period
    amp = float(0.5 * (np.max(yk[last]) - np.min(yk[last])))
    if cv < crit.max_period_cv and abs(a2 / a1 - 1.0) < crit.settle_tol:
        return "limit_cycle", period, amp, cv
    return "undecided", period, amp, cv


def simulate(u0: ModeVector, params: ProblemParams, T: float, dt: float = 1e-3,
             n_modes: Optional[int] = None, f: Optional[Nonlinearity] = None,
             snapshot_every: int = 0, criteria: CycleCriteria = CycleCriteria()) -> SimResult:
    """Integrate the mode system with ETD1 and classify the long-time behaviour of y."""
    if params.is_line:
        raise DomainError("simulation needs a finite L")
    if abs(u0.L - params.L) > 1e-12 * params.L:
        raise DomainError("mode vector and params use different L")
    f = f or Nonlinearity.tanh()
    n = n_modes or u0.n_modes
    c = u0.resized(n).coeffs.copy()
    t = time_grid(T, dt)
    nsteps = t.size - 1
    mu = wavenumbers(params.L, n) ** 2
    E = np.exp(-mu * dt)
    B = phi_at(0.0, params.L, n) * (-np.expm1(-mu * dt)) / mu
    px0 = phi_at(params.x0, params.L, n)
    n_snap = nsteps // snapshot_every + 1 if snapshot_every > 0 else 0
    snaps = np.zeros((n_snap, n))
    if f.name in _KINDS:
        y = _etd_loop(c, E, B, px0, params.beta, nsteps, _KINDS[f.name], snapshot_every, snaps)
    else:
        y = _python_loop(c, E, B, px0, params.beta, nsteps, f, snapshot_every, snaps)
    if not np.all(np.isfinite(y)):
        bad = int(np.argmin(np.isfinite(y)))
        raise ComputationError(f"simulation blew up; last valid index {bad - 1}")
    traj = Trajectory(t, y, snaps if n_snap else None,
                      t[::snapshot_every] if n_snap else None)
    cls, period, amp, cv = classify(t, y, criteria)
    return SimResult(traj, cls, period, amp, cv, ModeVector(c, params.L))


@dataclass
class ConsistencyReport:
    gap: float
    relative_gap: float
    y_pde: np.ndarray
    y_vie: np.ndarray


def trace_consistency(u0: ModeVector, params: ProblemParams, T: float, dt: float = 1e-3,
                      n_modes: int = 128, f: Optional[Nonlinearity] = None) -> ConsistencyReport:
    """Sup-norm gap between the simulated trace u(t, x0) and the Volterra solution."""
    f = f or Nonlinearity.tanh()
    sim = simulate(u0, params, T, dt, n_modes, f)
    vie = solve_vie(VieProblem(params, u0.resized(n_modes), f), T, dt)
    gap = float(np.max(np.abs(sim.y - vie.y)))
    scale = float(np.max(np.abs(vie.y)))
    return ConsistencyReport(gap, gap / scale if scale > 0 else 0.0, sim.y, vie.y)


@dataclass
class HopfScan:
    betas: np.ndarray
    amplitudes: List[Optional[float]]
    periods: List[Optional[float]]
    classifications: List[str]
    beta_ref: float
    beta_fit: Optional[float] = None
    slope: Optional[float] = None
    r2: Optional[float] = None
    fit_betas: np.ndarray = field(default_factory=lambda: np.zeros(0))
    excluded: List[float] = field(default_factory=list)


def hopf_scan(params: ProblemParams, betas: Sequence[float], T: float, dt: float = 1e-3,
              beta_ref: Optional[float] = None, n_modes: int = 128,
              u0: Optional[ModeVector] = None, fit_window: Optional[tuple] = None,
              continuation: bool = True) -> HopfScan:
    """Steady amplitude of y(t) per beta and a linear fit of amplitude^2 against beta.

    Betas are run in increasing order. With continuation, each supercritical run
    starts from the final state of the previous limit cycle, which shortens the
    transient near onset. The fit uses limit-cycle nodes with beta > beta_ref
    (or inside fit_window) and reports the zero of the fitted line.
    """
    betas = np.sort(np.asarray(betas, dtype=float))
    if beta_ref is None:
        from .popov import critical_params_interval
        beta_ref = critical_params_interval(params).beta1
    start = u0 if u0 is not None else ModeVector.basis(1, params.L, n_modes).resized(n_modes)
    start = ModeVector(0.05 * start.coeffs, params.L) if u0 is None else start
    scan = HopfScan(betas, [], [], [], beta_ref)
    prev_state = None
    for b in betas:
        init = prev_state if (continuation and prev_state is not None) else start
        res = simulate(init, params.with_beta(b), T, dt, n_modes)
        scan.classifications.append(res.classification)
        scan.periods.append(res.period)
        scan.amplitudes.append(0.0 if res.classification == "decayed" else res.amplitude)
        prev_state = res.final_modes if res.classification == "limit_cycle" else None
        if res.classification == "undecided":
            scan.excluded.append(float(b))
    lo, hi = fit_window if fit_window is not None else (beta_ref, math.inf)
    sel = [i for i, b in enumerate(betas)
           if lo <= b <= hi and scan.classifications[i] == "limit_cycle"]
    if len(sel) >= 3:
        xb = betas[sel]
        a2 = np.array([scan.amplitudes[i] for i in sel]) ** 2
        slope, icpt = np.polyfit(xb, a2, 1)
        pred = slope * xb + icpt
        ss_res = float(np.sum((a2 - pred) ** 2))
        ss_tot = float(np.sum((a2 - a2.mean()) ** 2))
        scan.slope = float(slope)
        scan.r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 0.0
        scan.beta_fit = float(-icpt / slope) if slope != 0 else None
        scan.fit_betas = xb
    return scan


def eventual_positivity_probe(params: ProblemParams, u0: ModeVector, T: float, dt: float = 1e-3,
                              n_modes: int = 128, n_samples: int = 401, snapshot_every: int = 100,
                              rel_tol: float = 1e-9) -> Optional[float]:
    """First snapshot time after which the linear solution is nonnegative on the sample grid.

    Uses linear feedback f(w) = w. Samples exclude the boundary points, where u
    vanishes; values above -rel_tol * max|u(t)| count as nonnegative.
    Returns None if the solution is still negative somewhere at the horizon.
    """
    sim = simulate(u0, params, T, dt, n_modes, Nonlinearity.identity(), snapshot_every)
    x = np.linspace(-params.L, params.L, n_samples)[1:-1]
    k = np.arange(1, n_modes + 1)
    Phi = phi(k[None, :], x[:, None], params.L)
    U = sim.trajectory.snapshots @ Phi.T
    ok = np.min(U, axis=1) >= -rel_tol * np.max(np.abs(U), axis=1)
    if not ok[-1]:
        return None
    bad = np.nonzero(~ok)[0]
    idx = 0 if bad.size == 0 else bad[-1] + 1
    return float(sim.trajectory.snapshot_times[idx])
