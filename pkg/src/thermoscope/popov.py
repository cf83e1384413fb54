"""Popov curves, critical gains and tangent lines for the transfer function G.

The Popov curve is Gamma(omega) = (Re G(i omega), omega Im G(i omega)). A line
with inverse slope q through (-1/beta, 0) certifies absolute stability when
F_{q,beta}(x, y) = y - x/q - 1/(q beta) stays nonpositive along the curve.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy import optimize

from .constants import B_PI, C_PI, D_PI
from .errors import DomainError, SearchError
from .kernels import ProblemParams, kernel_fourier, transfer_function
from .spectrum import crossing_params


@dataclass
class PopovSample:
    omega: float
    x: float
    y: float


@dataclass(frozen=True)
class PopovLine:
    """Line y = (x + 1/beta)/q; F < 0 strictly below it."""

    q: float
    beta: float

    def __post_init__(self):
        if not (self.q > 0 and self.beta > 0):
            raise DomainError("PopovLine needs q > 0 and beta > 0")

    def F(self, x, y):
        return y - x / self.q - 1.0 / (self.q * self.beta)


@dataclass
class CriticalParams:
    omega1: float
    beta1: float
    q: float

    @property
    def product(self) -> float:
        return self.omega1 * self.q

    @property
    def inv_q(self) -> float:
        return 1.0 / self.q


@dataclass
class CriterionReport:
    max_F: float
    argmax_omega: float
    satisfied: bool
    window: Tuple[float, float]
    tail_ok: bool = True


@dataclass
class PopovSetPoint:
    k: int
    omega: float
    G: float
    family: str  # "+" when G(i omega) < 0, "-" otherwise


# -------------------------------------------------------------- curves

def curve_arrays(params: ProblemParams, omega) -> Tuple[np.ndarray, np.ndarray]:
    omega = np.asarray(omega, dtype=float)
    if np.any(omega <= 0):
        raise DomainError("Popov curve needs omega > 0")
    g = transfer_function(params, 1j * omega)
    return np.real(g), omega * np.imag(g)


def popov_curve(params: ProblemParams, omega_grid: Sequence[float]) -> List[PopovSample]:
    x, y = curve_arrays(params, omega_grid)
    x, y = np.atleast_1d(x), np.atleast_1d(y)
    return [PopovSample(float(w), float(a), float(b)) for w, a, b in zip(np.atleast_1d(omega_grid), x, y)]


def line_curve(x0: float, omega) -> Tuple[np.ndarray, np.ndarray]:
    """Closed-form line-case curve, a = x0 sqrt(omega/2):
    x = exp(-a)(cos a - sin a)/(2 sqrt(2 omega)),  y = -sqrt(omega/2) exp(-a)(cos a + sin a)/2.
    """
    omega = np.asarray(omega, dtype=float)
    a = x0 * np.sqrt(omega / 2.0)
    alpha = 1.0 / math.sqrt(2.0)
    x = alpha / (2.0 * np.sqrt(omega)) * np.exp(-a) * (np.cos(a) - np.sin(a))
    y = -alpha * np.sqrt(omega) / 2.0 * np.exp(-a) * (np.cos(a) + np.sin(a))
    return x, y


def popov_set_line(x0: float, k_max: int = 8) -> List[PopovSetPoint]:
    """Real-axis crossings omega_k = (4k-1)^2 pi^2 / (8 x0^2) of the line-case curve."""
    p = ProblemParams("inf", x0)
    out = []
    for k in range(1, k_max + 1):
        w = (4 * k - 1) ** 2 * math.pi**2 / (8.0 * x0**2)
        g = transfer_function(p, 1j * w).real
        out.append(PopovSetPoint(k, w, g, "+" if g < 0 else "-"))
    return out


def critical_params_line(x0: float) -> CriticalParams:
    if not x0 > 0:
        raise DomainError("x0 must be positive")
    return CriticalParams(B_PI / x0**2, C_PI / x0, x0**2 / D_PI)


# ------------------------------------------------------- interval family

@dataclass
class DeltaTerms:
    A1: np.ndarray
    A2: np.ndarray
    B1: np.ndarray
    B2: np.ndarray
    D: np.ndarray

    def dot(self):
        return self.A1 * self.B1 + self.A2 * self.B2

    def det(self):
        return self.A1 * self.B2 - self.A2 * self.B1


def delta_terms(delta: float, omega, scaled: bool = False) -> DeltaTerms:
    """A, B, D of G_delta(i omega) = sinh(delta r)/(2 r cosh r), r = sqrt(i omega).

    Re G_delta = <A,B>/D and Im G_delta = det(A,B)/D. With scaled=True, A, B and D
    are multiplied by exp(-delta u), exp(-u), exp(-2u) (u = sqrt(omega/2)) so the
    signs survive where the raw forms overflow.
    """
    omega = np.asarray(omega, dtype=float)
    u = np.sqrt(omega / 2.0)
    du = delta * u
    if scaled:
        ch_d, sh_d = (1 + np.exp(-2 * du)) / 2, (1 - np.exp(-2 * du)) / 2
        ch, sh = (1 + np.exp(-2 * u)) / 2, (1 - np.exp(-2 * u)) / 2
        D = 2 * u * (np.cos(2 * u) * np.exp(-2 * u) + (1 + np.exp(-4 * u)) / 2)
    else:
        ch_d, sh_d = np.cosh(du), np.sinh(du)
        ch, sh = np.cosh(u), np.sinh(u)
        D = np.sqrt(2 * omega) * (np.cos(np.sqrt(2 * omega)) + np.cosh(np.sqrt(2 * omega)))
    A1 = ch_d * np.sin(du)
    A2 = np.cos(du) * sh_d
    B1 = np.cos(u) * ch + np.sin(u) * sh
    B2 = np.cos(u) * ch - np.sin(u) * sh
    return DeltaTerms(A1, A2, B1, B2, D)


def delta_crossing(delta: float) -> float:
    """First omega with det(A,B) = 0 and <A,B> < 0 for the delta family (L = 1)."""
    if not 0 < delta < 1:
        raise DomainError("delta must lie in (0, 1)")
    x0 = 1.0 - delta
    h = min(0.005, 0.05 * x0)
    u_hi = 8.0 * math.pi / x0 + 10.0
    f = lambda uu: float(delta_terms(delta, 2 * uu * uu, scaled=True).det())
    start = h
    while start < u_hi:
        u = np.arange(start, min(start + 50.0, u_hi) + h, h)
        t = delta_terms(delta, 2 * u * u, scaled=True)
        det = t.det()
        idx = np.nonzero(np.sign(det[:-1]) * np.sign(det[1:]) < 0)[0]
        for i in idx:
            ur = optimize.brentq(f, u[i], u[i + 1], xtol=1e-15, rtol=1e-15)
            w = 2 * ur * ur
            if float(delta_terms(delta, w, scaled=True).dot()) < 0:
                return w
        start = u[-1]
    raise SearchError("no admissible zero of det(A,B)", window=(2 * h * h, 2 * u_hi**2))


def critical_params_delta(delta: float) -> CriticalParams:
    """omega1, beta1 and q of G_delta from the A, B, D decomposition.

    1/q = omega1 (det(A',B) + det(A,B')) / (<A',B> + <A,B'> - <A,B> D'/D) at omega1,
    with derivatives taken by central differences of step omega1 * 1e-6.
    """
    w1 = delta_crossing(delta)
    t = delta_terms(delta, w1)
    if not np.all(np.isfinite([t.A1, t.A2, t.B1, t.B2, t.D])):
        raise SearchError(f"A, B, D overflow at omega1={w1:.6g}")
    h = w1 * 1e-6
    tp, tm = delta_terms(delta, w1 + h), delta_terms(delta, w1 - h)
    dA1, dA2 = (tp.A1 - tm.A1) / (2 * h), (tp.A2 - tm.A2) / (2 * h)
    dB1, dB2 = (tp.B1 - tm.B1) / (2 * h), (tp.B2 - tm.B2) / (2 * h)
    dD = (tp.D - tm.D) / (2 * h)
    ddet = (dA1 * t.B2 - dA2 * t.B1) + (t.A1 * dB2 - t.A2 * dB1)
    ddot = (dA1 * t.B1 + dA2 * t.B2) + (t.A1 * dB1 + t.A2 * dB2)
    inv_q = w1 * ddet / (ddot - t.dot() * dD / t.D)
    beta = -t.D / t.dot()
    return CriticalParams(float(w1), float(beta), float(1.0 / inv_q))


def critical_params_interval(params: ProblemParams) -> CriticalParams:
    """Critical parameters for finite L by rescaling to the delta family.

    G_{L,x0}(i omega) = L G_delta(i omega L^2) with delta = (L - x0)/L, hence
    omega1 = omega1_delta / L^2, beta1 = beta_delta / L and q = q_delta L^2.
    """
    if params.is_line:
        raise DomainError("critical_params_interval needs a finite L")
    L = params.L
    c = critical_params_delta((L - params.x0) / L)
    return CriticalParams(c.omega1 / L**2, c.beta1 / L, c.q * L**2)


def critical_params(params: ProblemParams) -> CriticalParams:
    if params.is_line:
        return critical_params_line(params.x0)
    return critical_params_interval(params)


# ------------------------------------------------------- criterion check

def _omega1(params: ProblemParams) -> float:
    if params.is_line:
        return B_PI / params.x0**2
    return crossing_params(params)[0]


def _tail_ok(params: ProblemParams, line: PopovLine, w_max: float) -> bool:
    """Beyond w_max the bound |y| + |x|/q stays below 1/(q beta), so F < 0 there."""
    w = np.geomspace(w_max, 1e4 * w_max, 400)
    x, y = curve_arrays(params, w)
    return bool(np.all(np.abs(y) + np.abs(x) / line.q < 1.0 / (line.q * line.beta)))


def _maximize(fun, omega: np.ndarray, values: np.ndarray) -> Tuple[float, float]:
    """Global max of fun over a grid, refined by golden-section search at every interior local max."""
    best_i = int(np.argmax(values))
    best = (float(values[best_i]), float(omega[best_i]))
    interior = np.nonzero((values[1:-1] >= values[:-2]) & (values[1:-1] >= values[2:]))[0] + 1
    for i in interior:
        a, b, c = np.log(omega[i - 1]), np.log(omega[i]), np.log(omega[i + 1])
        try:
            r = optimize.minimize_scalar(lambda lw: -fun(math.exp(lw)), bracket=(a, b, c),
                                         method="golden", tol=1e-12)
        except ValueError:
            continue
        if a <= r.x <= c and -r.fun > best[0]:
            best = (float(-r.fun), float(math.exp(r.x)))
    return best


def verify_criterion(params: ProblemParams, line: PopovLine,
                     omega_window: Optional[Tuple[float, float]] = None,
                     n_grid: int = 2000, tol: float = 1e-10) -> CriterionReport:
    """Maximum of F_{q,beta}(Gamma(omega)) over a log grid with local refinement."""
    if omega_window is None:
        w1 = _omega1(params)
        omega_window = (1e-4 * w1, 40.0 * w1)
    lo, hi = omega_window
    w = np.geomspace(lo, hi, n_grid)
    x, y = curve_arrays(params, w)
    F = line.F(x, y)

    def fun(om):
        xx, yy = curve_arrays(params, om)
        return float(line.F(xx, yy))

    max_F, arg = _maximize(fun, w, F)
    tail = _tail_ok(params, line, hi)
    return CriterionReport(max_F, arg, bool(max_F <= tol and tail), (lo, hi), tail)


def transform_inequality(params: ProblemParams, q: float, beta: float, omega: float) -> float:
    """Re a_hat + q Re a_hat' - 1/beta from the kernel transforms; equals q F_{q,beta}(Gamma(omega))."""
    fv = kernel_fourier(params, omega)
    return fv.a_hat.real + q * fv.a_prime_hat.real - 1.0 / beta


@dataclass
class BetaHat:
    beta_hat: float
    M: float
    argmax_omega: float
    q: float


def reference_q(x0: float) -> float:
    """q(x0) = x0^2 / d_pi, the inverse slope of the line-case tangent."""
    return x0**2 / D_PI


def beta_hat(params: ProblemParams, n_grid: int = 4000) -> BetaHat:
    """beta_hat = 1/(M q(x0)) with M = max over omega of omega Im G - Re G / q(x0)."""
    if params.is_line:
        raise DomainError("beta_hat is defined for finite L")
    q = reference_q(params.x0)
    w1 = _omega1(params)
    w = np.geomspace(1e-6 * w1, 1e3 * w1, n_grid)

    def H(om):
        x, y = curve_arrays(params, om)
        return y - x / q

    M, arg = _maximize(lambda om: float(H(om)), w, H(w))
    return BetaHat(1.0 / (M * q), M, arg, q)


# ------------------------------------------------------------- T function

def t_pole() -> float:
    """Unique real root y_s of 2y^3 - y^2 - d_pi/2."""
    return optimize.brentq(lambda y: 2 * y**3 - y**2 - D_PI / 2, 0.0, 3.0, xtol=1e-15, rtol=1e-15)


def t_function(y):
    """T(y) = (y^2 - d_pi y - d_pi/2)/(2y^3 - y^2 - d_pi/2)."""
    y = np.asarray(y, dtype=float)
    den = 2 * y**3 - y**2 - D_PI / 2
    if np.any(np.abs(den) < 1e-14):
        raise DomainError("T evaluated at its pole")
    out = (y**2 - D_PI * y - D_PI / 2) / den
    return out.item() if out.ndim == 0 else out


def critical_inequality(y):
    """2 cos(y) y^2 (1+T) + d_pi cos(y)(1-T) + 4 (d_pi/c_pi) y e^y.

    Equals -4 y e^y F at a critical point of F along the line-case curve with
    x0 = 1 and y = sqrt(omega/2); it must be nonnegative there and vanishes at 3 pi/4.
    """
    y = np.asarray(y, dtype=float)
    T = t_function(y)
    return 2 * np.cos(y) * y**2 * (1 + T) + D_PI * np.cos(y) * (1 - T) + 4 * D_PI / C_PI * y * np.exp(y)


def critical_points(y_max: float = 40.0, n_grid: int = 200_000) -> np.ndarray:
    """Solutions y > y_s of tan(y) = T(y), found as zeros of sin(y) - T(y) cos(y)."""
    ys = t_pole()
    y = np.linspace(ys + 1e-9, y_max, n_grid)
    h = lambda v: np.sin(v) - t_function(v) * np.cos(v)
    hv = h(y)
    idx = np.nonzero(np.sign(hv[:-1]) * np.sign(hv[1:]) < 0)[0]
    roots = []
    return np.array([optimize.brentq(h, y[i], y[i + 1], xtol=1e-15) for i in idx])
