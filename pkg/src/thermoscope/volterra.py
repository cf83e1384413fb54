"""Nonlinear Volterra equation y = g + a * f(beta y) for the trace y(t) = u(t, x0).

The kernel a(t) = -k_L(t, x0) vanishes with all its derivatives at t = 0, so
the trapezoidal convolution rule has a zero diagonal weight and the scheme is
explicit.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, List, Optional

import numpy as np
from scipy import integrate

from .errors import ComputationError, DomainError
from .kernels import ProblemParams, SeriesControl, forcing, kernel_a
from .modes import ModeVector


def _logcosh(x):
    ax = np.abs(x)
    return ax + np.log1p(np.exp(-2.0 * ax)) - math.log(2.0)


@dataclass(frozen=True)
class Nonlinearity:
    """Feedback nonlinearity with f(0) = 0 and f'(0) = 1.

    antiderivative, when given, is any primitive P of f with P(0) = 0; it is
    used for F_beta(z) = int_0^z f(beta s) ds = P(beta z)/beta.
    """

    f: Callable
    f_prime: Callable
    bound: float
    lipschitz: float
    antiderivative: Optional[Callable] = None
    name: str = "custom"

    def __post_init__(self):
        if abs(float(self.f(0.0))) > 1e-14:
            raise DomainError(f"{self.name}: f(0) must vanish")
        if abs(float(self.f_prime(0.0)) - 1.0) > 1e-10:
            raise DomainError(f"{self.name}: f'(0) must equal 1")
        h = 1e-6
        if abs((float(self.f(h)) - float(self.f(-h))) / (2 * h) - 1.0) > 1e-6:
            raise DomainError(f"{self.name}: f_prime(0) disagrees with f")
        if not (self.bound > 0 and self.lipschitz > 0):
            raise DomainError(f"{self.name}: bound and Lipschitz constant must be positive")
        w = np.linspace(-50.0, 50.0, 2001)
        if np.any(np.abs(self.f(w)) > self.bound * (1 + 1e-12)):
            raise DomainError(f"{self.name}: |f| exceeds the declared bound")

    def __call__(self, w):
        return self.f(w)

    def F_beta(self, z, beta: float):
        """int_0^z f(beta s) ds."""
        z = np.asarray(z, dtype=float)
        if beta == 0.0:
            return np.zeros_like(z)
        if self.antiderivative is not None:
            return self.antiderivative(beta * z) / beta
        out = np.array([integrate.quad(lambda s: float(self.f(beta * s)), 0.0, float(v))[0]
                        for v in np.ravel(z)])
        return out.reshape(z.shape)

    @classmethod
    def tanh(cls) -> "Nonlinearity":
        return cls(np.tanh, lambda w: 1.0 / np.cosh(w) ** 2, 1.0, 1.0, _logcosh, "tanh")

    @classmethod
    def clipped_identity(cls) -> "Nonlinearity":
        return cls(lambda w: np.clip(w, -1.0, 1.0),
                   lambda w: np.where(np.abs(w) <= 1.0, 1.0, 0.0), 1.0, 1.0,
                   lambda w: np.where(np.abs(w) <= 1.0, 0.5 * np.square(w), np.abs(w) - 0.5),
                   "clipped-identity")

    @classmethod
    def identity(cls) -> "Nonlinearity":
        """Linear feedback (unbounded); used for the linear semigroup."""
        return cls(lambda w: np.asarray(w, dtype=float), lambda w: np.ones_like(np.asarray(w, dtype=float)),
                   math.inf, 1.0, lambda w: 0.5 * np.square(w), "identity")


def sector_check(f: Nonlinearity, beta: float, w_grid) -> bool:
    """True iff f(beta w)(w - f(beta w)/beta) > 0 at every node (w != 0)."""
    w = np.asarray(w_grid, dtype=float)
    if np.any(w == 0):
        raise DomainError("sector grid must exclude 0")
    fw = f(beta * w)
    return bool(np.all(fw * (w - fw / beta) > 0))


@dataclass
class Trajectory:
    t: np.ndarray
    y: np.ndarray
    snapshots: Optional[np.ndarray] = None  # rows are mode coefficient vectors
    snapshot_times: Optional[np.ndarray] = None

    @property
    def dt(self) -> float:
        return float(self.t[1] - self.t[0])


@dataclass
class VieProblem:
    params: ProblemParams
    u0: ModeVector
    f: Nonlinearity = field(default_factory=Nonlinearity.tanh)
    ctl: SeriesControl = field(default_factory=SeriesControl)

    def __post_init__(self):
        if self.params.is_line:
            raise DomainError("the Volterra solver is for finite L")

    def g(self, t, derivative: bool = False):
        return forcing(t, self.params, self.u0, self.ctl, derivative)

    def a(self, t, derivative: bool = False):
        return kernel_a(t, self.params, self.ctl, derivative)


def time_grid(T: float, dt: float) -> np.ndarray:
    if not (dt > 0 and T > 0):
        raise DomainError("need T > 0 and dt > 0")
    n = int(round(T / dt))
    if abs(n * dt - T) > 1e-9 * T:
        raise DomainError("T must be a multiple of dt")
    return np.arange(n + 1) * dt


def trap_convolution(a: np.ndarray, h: np.ndarray, dt: float) -> np.ndarray:
    """c_n = dt [sum_{j=0}^n a_{n-j} h_j - (a_n h_0 + a_0 h_n)/2] for all n."""
    c = np.convolve(a, h)[: a.size]
    return dt * (c - 0.5 * (a * h[0] + a[0] * h))


def solve_vie(problem: VieProblem, T: float, dt: float) -> Trajectory:
    """Explicit trapezoidal convolution quadrature (second order)."""
    t = time_grid(T, dt)
    beta = problem.params.beta
    g = np.asarray(problem.g(t), dtype=float)
    a = np.asarray(problem.a(t), dtype=float)
    y = np.empty_like(g)
    F = np.empty_like(g)
    y[0] = g[0]
    F[0] = problem.f(beta * y[0])
    for n in range(1, t.size):
        s = 0.5 * a[n] * F[0]
        if n > 1:
            s += np.dot(a[n - 1:0:-1], F[1:n])
        y[n] = g[n] + dt * s
        if not math.isfinite(y[n]):
            raise ComputationError(f"non-finite value at step {n}; last valid index {n - 1}")
        F[n] = problem.f(beta * y[n])
    return Trajectory(t, y)


@dataclass
class PicardReport:
    deviation: float
    deviations: List[float]
    gaps: List[float]


def picard_verify(problem: VieProblem, T_short: float, n_iter: int, dt: float = 1e-3) -> PicardReport:
    """Picard iterates y_{k+1} = g + a * f(beta y_k), y_0 = g, against solve_vie."""
    ref = solve_vie(problem, T_short, dt)
    beta = problem.params.beta
    g = np.asarray(problem.g(ref.t), dtype=float)
    a = np.asarray(problem.a(ref.t), dtype=float)
    y = g.copy()
    devs = [float(np.max(np.abs(y - ref.y)))]
    gaps = []
    for _ in range(n_iter):
        y_new = g + trap_convolution(a, problem.f(beta * y), dt)
        if not np.all(np.isfinite(y_new)):
            raise ComputationError("Picard iteration diverged")
        gaps.append(float(np.max(np.abs(y_new - y))))
        y = y_new
        devs.append(float(np.max(np.abs(y - ref.y))))
    return PicardReport(devs[-1], devs, gaps)


@dataclass
class LyapunovReport:
    t: np.ndarray
    W1: np.ndarray
    W2: np.ndarray
    W: np.ndarray
    V: np.ndarray
    R: np.ndarray
    J: np.ndarray
    residual: float

    @property
    def relative_residual(self) -> float:
        return self.residual / max(float(np.max(np.abs(self.W))), np.finfo(float).tiny)


def _cumulative(h: np.ndarray, dt: float) -> np.ndarray:
    return integrate.cumulative_trapezoid(h, dx=dt, initial=0.0)


def lyapunov(problem: VieProblem, traj: Trajectory, q: float) -> LyapunovReport:
    """W = W1 + W2 and its split W = V + R along a computed trajectory.

    W1 = int f(beta y)(y - f(beta y)/beta),  W2 = q F_beta(y(t)),
    V  = int f(beta y)(g + q g') + q F_beta(y(0)),
    R  = int f(beta y) J,  J = (a + q a') * f(beta y) - f(beta y)/beta.
    """
    beta = problem.params.beta
    t, y = traj.t, traj.y
    dt = traj.dt
    fy = problem.f(beta * y)
    if beta == 0.0:
        z = np.zeros_like(t)
        return LyapunovReport(t, z, z, z, z, z, z, 0.0)
    g = np.asarray(problem.g(t), dtype=float)
    gd = np.asarray(problem.g(t, derivative=True), dtype=float)
    a = np.asarray(problem.a(t), dtype=float)
    ad = np.asarray(problem.a(t, derivative=True), dtype=float)
    J = trap_convolution(a + q * ad, fy, dt) - fy / beta
    W1 = _cumulative(fy * (y - fy / beta), dt)
    W2 = q * problem.f.F_beta(y, beta)
    V = _cumulative(fy * (g + q * gd), dt) + q * problem.f.F_beta(y[0], beta)
    R = _cumulative(fy * J, dt)
    W = W1 + W2
    return LyapunovReport(t, W1, W2, W, V, R, J, float(np.max(np.abs(W - V - R))))
