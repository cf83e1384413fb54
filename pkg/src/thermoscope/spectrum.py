"""Eigenvalues of the rank-one perturbed Laplacian from its characteristic functions.

Two variables appear below. On the line and for K_L, lam = sqrt(s) where s is
an eigenvalue of -A_beta. For H_L the variable is the square root of an
eigenvalue mu = lam^2 of A_{L,beta}, so s = -mu and J_L(lam) = H_L(i lam).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from scipy import optimize

from .errors import DomainError, SearchError
from .kernels import LINE, ProblemParams, transfer_function, _out


@dataclass
class CharacteristicPoint:
    lam: complex
    beta: float
    residual: float

    @property
    def s(self) -> complex:
        return self.lam * self.lam


@dataclass
class EigenTrajectory:
    """Path of the upper-half-plane member of a conjugate eigenvalue pair."""

    betas: np.ndarray
    points: List[CharacteristicPoint]
    branch_id: str = "first-pair"
    crossing_beta: Optional[float] = None
    crossing_point: Optional[CharacteristicPoint] = None
    diagnostic: str = ""

    @property
    def s_values(self) -> np.ndarray:
        return np.array([p.s for p in self.points])


@dataclass
class RaySearchResult:
    m: float
    gamma0: float
    beta_onset: float
    gamma: Optional[float] = None


@dataclass
class RealRoot:
    k: int
    family: str  # "+" or "-"
    s: float
    beta: float


# --------------------------------------------------------------- functions

def characteristic_line(lam, beta: float, x0: float):
    """2 lam + beta exp(-x0 lam); zeros with Re lam > 0 are sqrt of eigenvalues of -A_beta."""
    lam = np.asarray(lam, dtype=complex)
    return _out(2.0 * lam + beta * np.exp(-x0 * lam))


def _sin_over(lam, a):
    """sin(lam a)/lam with the value a at lam = 0."""
    return a * np.sinc(lam * a / np.pi)


def characteristic_interval(lam, params: ProblemParams):
    """(sin(lam L), H_L, J_L, K_L) at lam for the interval problem."""
    if params.is_line:
        raise DomainError("characteristic_interval needs a finite L")
    lam = np.asarray(lam, dtype=complex)
    L, x0, beta = params.L, params.x0, params.beta
    L0 = L - x0
    with np.errstate(all="ignore"):  # J and K overflow far from the real axis
        sin_f = np.sin(lam * L)
        H = 2.0 * np.cos(lam * L) + beta * _sin_over(lam, L0)
        J = 2.0 * np.cosh(lam * L) + beta * _sin_over(1j * lam, L0)
        K = 1.0 + beta * _sin_over(1j * lam, L0) / (2.0 * np.cosh(lam * L))
    return _out(sin_f), _out(H), _out(J), _out(K)


def k_function(lam, params: ProblemParams):
    """1 + beta G(lam^2) in overflow-free form (lam in the closed right half-plane)."""
    lam = np.asarray(lam, dtype=complex)
    x0, beta = params.x0, params.beta
    if params.is_line:
        g = np.exp(-lam * x0) / (2.0 * lam)
    else:
        L = params.L
        g = np.exp(-lam * x0) * (1.0 - np.exp(-2.0 * lam * (L - x0))) / (2.0 * lam * (1.0 + np.exp(-2.0 * lam * L)))
    return _out(1.0 + beta * g)


def z_functions(alpha: float, params: ProblemParams) -> Tuple[Optional[float], float]:
    """Zero-locating factors of Im G on the ray lam = alpha (1 + i).

    z_inf = -cos(alpha x0) - sin(alpha x0). For finite L,
        z_L = sin(L0 a)[cos(L a) - th(L a) sin(L a)] - th(L0 a) cos(L0 a)[cos(L a) + th(L a) sin(L a)]
    with L0 = L - x0 and th = tanh; Im G(2 i alpha^2) equals z_L times a positive factor.
    """
    if not alpha > 0:
        raise DomainError("alpha must be positive")
    x0 = params.x0
    z_inf = -math.cos(alpha * x0) - math.sin(alpha * x0)
    if params.is_line:
        return None, z_inf
    L = params.L
    a0 = (L - x0) * alpha
    aL = L * alpha
    th_L, th_0 = math.tanh(aL), math.tanh(a0)
    z_L = (math.sin(a0) * (math.cos(aL) - th_L * math.sin(aL))
           - th_0 * math.cos(a0) * (math.cos(aL) + th_L * math.sin(aL)))
    return z_L, z_inf


def z_prefactor(alpha: float, params: ProblemParams) -> float:
    """Positive factor with Im G(2 i alpha^2) = z_prefactor * z_L."""
    L, x0 = params.L, params.x0
    num = math.exp(-x0 * alpha) + math.exp((x0 - 2 * L) * alpha)
    den = (1 + math.exp(-2 * L * alpha)) * (math.cos(L * alpha) ** 2 + math.tanh(L * alpha) ** 2 * math.sin(L * alpha) ** 2)
    return num / den / (4 * alpha)


# ------------------------------------------------------------ line spectrum

def ray_angle(m: float) -> float:
    """gamma0 = pi - arctan(m), with m = inf giving pi/2."""
    return math.pi / 2 if math.isinf(m) else math.pi - math.atan(m)


def onset_gain(m: float, x0: float = 1.0) -> float:
    """Phi(m)/x0: smallest gain with a root of 2 lam + beta e^{-x0 lam} on the ray Im = m Re."""
    g0 = ray_angle(m)
    damp = 0.0 if math.isinf(m) else g0 / m
    return 2.0 * g0 * math.exp(damp) / math.sin(g0) / x0


def ray_search(m: float, beta: float, x0: float = 1.0) -> RaySearchResult:
    """Smallest gamma in [gamma0, pi) with 2 gamma = beta x0 e^{-gamma/m} sin(gamma), if any.

    The problem is solved in units x0 = 1 (roots scale like lam/x0, gains like beta x0).
    """
    if not m > 0:
        raise DomainError("slope m must be positive")
    if not beta > 0:
        raise DomainError("ray_search needs beta > 0")
    b = beta * x0
    g0 = ray_angle(m)
    res = RaySearchResult(m, g0, onset_gain(m))
    inv_m = 0.0 if math.isinf(m) else 1.0 / m

    def h(g):
        return 2.0 * g - b * math.exp(-g * inv_m) * math.sin(g)

    grid = np.linspace(g0, math.pi, 401)
    vals = np.array([h(g) for g in grid])
    if vals[0] == 0.0:
        res.gamma = g0
        return res
    idx = np.nonzero(np.sign(vals[:-1]) != np.sign(vals[1:]))[0]
    if idx.size:
        i = idx[0]
        res.gamma = optimize.brentq(h, grid[i], grid[i + 1], xtol=1e-14)
    return res


def line_pair_point(beta: float, x0: float = 1.0) -> CharacteristicPoint:
    """Exact upper member of the first complex pair on the line for beta > pi/x0.

    Solves Phi(m) = beta x0 for m; the root is lam = gamma0 (1/m + i) / x0.
    """
    b = beta * x0
    if not b > math.pi:
        raise DomainError("the first complex pair exists only for beta x0 > pi")
    # log Phi decreases from +inf (m -> 0) to log pi (m -> inf); solve in log m
    def f(lm):
        g0 = ray_angle(math.exp(lm))
        return math.log(2.0 * g0 / math.sin(g0)) + g0 * math.exp(-lm) - math.log(b)

    lo, hi = -10.0, 10.0
    while f(hi) > 0 and hi < 600:
        hi *= 2
    lm = optimize.brentq(f, lo, hi, xtol=1e-15, rtol=1e-15)
    m = math.exp(lm)
    g0 = ray_angle(m)
    lam = complex(g0 / m, g0) / x0
    return CharacteristicPoint(lam, beta, abs(characteristic_line(lam, beta, x0)))


def real_spectrum_line(x0: float, k_max: int = 8) -> List[RealRoot]:
    """Negative real eigenvalues s_k^+ (beta > 0) and s_k^- (beta < 0), k = 0..k_max."""
    if not x0 > 0:
        raise DomainError("x0 must be positive")
    out = []
    for k in range(k_max + 1):
        a, b = 4 * k + 1, 4 * k + 3
        out.append(RealRoot(k, "+", -(a * math.pi) ** 2 / (4 * x0**2), a * math.pi / x0))
        out.append(RealRoot(k, "-", -(b * math.pi) ** 2 / (4 * x0**2), -b * math.pi / x0))
    return out


# ------------------------------------------------------------------ Newton

def newton(f: Callable[[complex], complex], z0: complex, tol: float = 1e-13,
           max_iter: int = 60) -> Tuple[complex, float, bool]:
    """Complex Newton with central-difference derivative and step halving."""
    z = complex(z0)
    fz = f(z)
    for _ in range(max_iter):
        h = 1e-6 * max(1.0, abs(z))
        d = (f(z + h) - f(z - h)) / (2 * h)
        if d == 0 or not np.isfinite(d):
            return z, abs(fz), False
        step = fz / d
        lam = 1.0
        while True:
            zn = z - lam * step
            fn = f(zn)
            if np.isfinite(fn) and abs(fn) < abs(fz) or lam < 1e-6:
                break
            lam *= 0.5
        z, fz = zn, fn
        if abs(lam * step) <= tol * max(1.0, abs(z)):
            return z, abs(fz), True
    return z, abs(fz), abs(fz) < 1e-9


def _char(params: ProblemParams, beta: float):
    if params.is_line:
        return lambda lam: characteristic_line(lam, beta, params.x0)
    p = params.with_beta(beta)
    return lambda lam: k_function(lam, p)


def seed_pair(params: ProblemParams, beta: float) -> CharacteristicPoint:
    """First complex pair at beta, polished from the line solution."""
    guess = line_pair_point(beta, params.x0)
    if params.is_line:
        return guess
    z, res, ok = newton(_char(params, beta), guess.lam)
    if not ok:
        raise SearchError(f"Newton failed to seed the first pair at beta={beta}")
    return CharacteristicPoint(z, beta, res)


def trace_pair(betas: Sequence[float], params: ProblemParams,
               seed: Optional[CharacteristicPoint] = None, tol: float = 1e-8) -> EigenTrajectory:
    """Continue the first complex pair over a monotone beta grid.

    Newton continuation on K_L (finite L) or the line characteristic function,
    with a secant predictor. The first beta where Re s turns nonnegative is
    bisected until |Re s| < tol.
    """
    betas = np.asarray(betas, dtype=float)
    if betas.size and np.any(np.diff(betas) <= 0):
        raise DomainError("beta grid must be increasing")
    if seed is None:
        seed = seed_pair(params, float(betas[0]))
    traj = EigenTrajectory(betas=betas, points=[])
    prev: List[CharacteristicPoint] = []
    lam = seed.lam
    for b in betas:
        guess = lam
        if len(prev) >= 2:
            p1, p2 = prev[-2], prev[-1]
            guess = p2.lam + (p2.lam - p1.lam) * (b - p2.beta) / (p2.beta - p1.beta)
        z, res, ok = newton(_char(params, b), guess)
        if not ok or z.real < 0:
            traj.diagnostic = f"continuation diverged at beta={b:.6g} (residual {res:.3g})"
            traj.betas = betas[: len(traj.points)]
            break
        if z.imag < 0:
            z = z.conjugate()
        pt = CharacteristicPoint(z, float(b), res)
        traj.points.append(pt)
        prev.append(pt)
        lam = z
    pts = traj.points
    for a, c in zip(pts[:-1], pts[1:]):
        if a.s.real < 0 <= c.s.real:
            traj.crossing_point = _bisect_crossing(params, a, c, tol)
            traj.crossing_beta = traj.crossing_point.beta
            break
    return traj


def _bisect_crossing(params, a: CharacteristicPoint, c: CharacteristicPoint, tol: float) -> CharacteristicPoint:
    lo, hi = a, c
    for _ in range(200):
        bm = 0.5 * (lo.beta + hi.beta)
        w = (bm - lo.beta) / (hi.beta - lo.beta)
        z, res, _ = newton(_char(params, bm), lo.lam + w * (hi.lam - lo.lam))
        mid = CharacteristicPoint(z, bm, res)
        if abs(mid.s.real) < tol or hi.beta - lo.beta < 1e-14 * hi.beta:
            return mid
        if mid.s.real < 0:
            lo = mid
        else:
            hi = mid
    return mid


# --------------------------------------------------------- crossing on iR

def crossing_params(params: ProblemParams, u_max: Optional[float] = None) -> Tuple[float, float]:
    """(omega1, beta1): first omega > 0 with Im G(i omega) = 0 and Re G(i omega) < 0.

    The scan runs in u = sqrt(omega/2), in which G oscillates with bounded frequency.
    """
    x0 = params.x0
    L = None if params.is_line else params.L
    if u_max is None:
        u_max = 8.0 * math.pi / x0 + 10.0
    h = min(0.005, 0.05 * x0, 0.05 / L if L else 1.0)
    u = np.arange(h, u_max + h, h)
    g = transfer_function(params, 2j * u * u)
    im = g.imag
    idx = np.nonzero(np.sign(im[:-1]) * np.sign(im[1:]) < 0)[0]
    f = lambda uu: transfer_function(params, 2j * uu * uu).imag
    for i in idx:
        ur = optimize.brentq(f, u[i], u[i + 1], xtol=1e-15, rtol=1e-15)
        w = 2 * ur * ur
        re = transfer_function(params, 1j * w).real
        if re < 0:
            return w, -1.0 / re
    raise SearchError("no zero of Im G(i omega) with Re G < 0", window=(2 * h * h, 2 * u_max**2))


# ------------------------------------------------------- interval spectrum

def interval_eigenvalues(params: ProblemParams, n: int, radius: Optional[float] = None) -> np.ndarray:
    """The n smallest-modulus eigenvalues mu of A_{L,beta} from sin(lam L) H_L(lam) = 0.

    beta-independent roots lam = k pi / L are added directly. Roots of H_L are
    found by Newton from a grid covering the closed first quadrant of lam; H_L
    is even in lam and real on the real axis, so conjugates complete the set.
    The search radius doubles until it holds at least n eigenvalues.
    """
    if params.is_line:
        raise DomainError("interval_eigenvalues needs a finite L")
    L = params.L
    if radius is None:
        radius = (n + 3) * math.pi / (2 * L)
    mus = eigenvalues_within(params, radius)
    while mus.size < n:
        radius *= 2
        mus = eigenvalues_within(params, radius)
    return mus[:n]


def eigenvalues_within(params: ProblemParams, radius: float) -> np.ndarray:
    """All eigenvalues mu of A_{L,beta} with |sqrt(mu)| <= radius, sorted by modulus."""
    L = params.L
    H = lambda z: characteristic_interval(z, params)[1]
    roots: List[complex] = []
    step = math.pi / (2 * L)
    grid = np.arange(step / 2, radius + step, step)
    for a in grid:
        for b in np.concatenate([[0.0], grid]):
            z, res, ok = newton(H, complex(a, b), tol=1e-15)
            if not ok or res > 1e-9:
                continue
            z = complex(abs(z.real), abs(z.imag))  # evenness and conjugation
            if abs(z) > radius or z.real < 1e-12:
                continue
            if abs(z.imag) < 1e-10:
                z = complex(z.real, 0.0)
            if all(abs(z - r) > 1e-7 * max(1.0, abs(z)) for r in roots):
                roots.append(z)
    mus = []
    for z in roots:
        mu = z * z
        mus.append(mu)
        if abs(mu.imag) > 0:
            mus.append(mu.conjugate())
    k = 1
    while k * math.pi / L <= radius:
        mus.append(complex((k * math.pi / L) ** 2, 0.0))
        k += 1
    return np.array(sorted(mus, key=lambda v: (round(abs(v), 9), v.imag)))


def real_root_count(params: ProblemParams, lam_max: float, n_grid: int = 20000) -> int:
    """Number of sign changes of H_L on (0, lam_max] (simple real eigenvalues of A)."""
    lam = np.linspace(1e-9, lam_max, n_grid)
    h = np.real(characteristic_interval(lam, params)[1])
    return int(np.count_nonzero(np.sign(h[:-1]) * np.sign(h[1:]) < 0))


def _merge_window(L: float, x0: float) -> float:
    """Right end lam = j pi/(L - x0) >= pi/x0 of a window holding at least two roots at beta = 0.

    There sin(lam (L - x0)) = 0, so H_L = 2 cos(lam L) for every beta and no root
    can cross the window edge; the count of real roots then only changes by merging.
    The bound pi/x0 keeps the first merge, which happens near lam = pi/(2 x0) for
    large L, well inside the window.
    """
    L0 = L - x0
    j = max(1, math.ceil(L0 / x0 - 1e-12))
    while True:
        lam = j * math.pi / L0
        if abs(math.cos(lam * L)) > 1e-6 and real_root_count(ProblemParams(L, x0, 0.0), lam) >= 2:
            return lam
        j += 1


def merge_beta(L: float, x0: float, beta_hi: float = 20.0, tol: float = 1e-8) -> float:
    """First gain at which two real roots of H_L collide and leave the real axis.

    Detection only: bisection on the number of sign changes of H_L in a window
    whose right end H_L cannot cross (see _merge_window).
    """
    lam_max = _merge_window(L, x0)
    base = real_root_count(ProblemParams(L, x0, 0.0), lam_max)
    if real_root_count(ProblemParams(L, x0, beta_hi), lam_max) >= base:
        raise SearchError("no merge of real eigenvalues below beta_hi", window=(0.0, beta_hi))
    lo, hi = 0.0, beta_hi
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if real_root_count(ProblemParams(L, x0, mid), lam_max) >= base:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
