"""Resolvent kernels, Green's functions, heat kernels and transfer functions.

Everything here is a pure function of its arguments. Complex spectral
parameters use the principal square root (Re sqrt(s) >= 0); values on the
cut (-inf, 0] are rejected instead of being approached as a limit.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from .errors import BranchCutError, DomainError, PoleError, SeriesBudgetError
from .modes import ModeVector, phi_at, wavenumbers


class Domain(enum.Enum):
    LINE = "inf"

    def __repr__(self):
        return "LINE"


LINE = Domain.LINE


def parse_length(value) -> Union[float, Domain]:
    """Accept a positive number, 'inf', math.inf or LINE."""
    if value is LINE:
        return LINE
    if isinstance(value, str):
        if value.strip().lower() in ("inf", "infinity", "+inf", "line"):
            return LINE
        value = float(value)
    value = float(value)
    if math.isinf(value) and value > 0:
        return LINE
    if not (math.isfinite(value) and value > 0):
        raise DomainError(f"half-length must be positive, got {value!r}")
    return value


@dataclass(frozen=True)
class ProblemParams:
    """Half-length L (finite or LINE), sensor position x0 and feedback gain beta."""

    L: Union[float, Domain]
    x0: float
    beta: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "L", parse_length(self.L))
        x0 = float(self.x0)
        if not (math.isfinite(x0) and x0 > 0):
            raise DomainError(f"x0 must be positive, got {x0!r}")
        if self.L is not LINE and not x0 < self.L:
            raise DomainError(f"x0={x0} must lie inside (0, L={self.L})")
        object.__setattr__(self, "x0", x0)
        object.__setattr__(self, "beta", float(self.beta))

    @property
    def is_line(self) -> bool:
        return self.L is LINE

    def with_beta(self, beta: float) -> "ProblemParams":
        return ProblemParams(self.L, self.x0, beta)


def default_crossover(L: float) -> float:
    return 0.1 * (2.0 * L / math.pi) ** 2


@dataclass(frozen=True)
class SeriesControl:
    """Truncation budget and absolute tolerance for kernel series."""

    n_terms: int = 100_000
    tol: float = 1e-16
    t_crossover: Optional[float] = None

    def __post_init__(self):
        if int(self.n_terms) < 1:
            raise ValueError("n_terms must be >= 1")
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.t_crossover is not None and not self.t_crossover > 0:
            raise ValueError("t_crossover must be positive")

    def crossover(self, L: float) -> float:
        return self.t_crossover if self.t_crossover is not None else default_crossover(L)


MIN_TERMS = 8


@dataclass
class SeriesValue:
    value: np.ndarray
    terms: int
    tail_bound: float = 0.0


# ---------------------------------------------------------------- square root

def on_branch_cut(s) -> np.ndarray:
    s = np.asarray(s, dtype=complex)
    return (s.imag == 0.0) & (s.real <= 0.0)


def principal_sqrt(s):
    """Principal square root; raises BranchCutError on (-inf, 0]."""
    arr = np.asarray(s, dtype=complex)
    if np.any(on_branch_cut(arr)):
        bad = arr[on_branch_cut(arr)] if arr.ndim else arr
        raise BranchCutError(complex(np.ravel(bad)[0]))
    r = np.sqrt(arr)
    return complex(r) if r.ndim == 0 else r


def _out(v):
    v = np.asarray(v)
    return v.item() if v.ndim == 0 else v


# ----------------------------------------------------------- resolvent kernels

def free_resolvent_kernel(s, x):
    """G_s(x) = exp(-sqrt(s)|x|) / (2 sqrt(s)), kernel of (s - d^2/dx^2)^-1 on R."""
    r = principal_sqrt(s)
    return _out(np.exp(-r * np.abs(np.asarray(x, dtype=float))) / (2.0 * r))


def dirichlet_green(s, x, y, L: float):
    """Green's function of s - d^2/dx^2 on (-L, L) with Dirichlet conditions.

    Evaluated as
        exp(-r|x-y|) (1 - exp(-2r(L+min))) (1 - exp(-2r(L-max))) / (2r (1 - exp(-4rL)))
    which equals the sinh/cosh form but cannot overflow.
    """
    if L is LINE or not math.isfinite(L):
        raise DomainError("dirichlet_green needs a finite L")
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if np.any(np.abs(x) > L) or np.any(np.abs(y) > L):
        raise DomainError("x and y must lie in [-L, L]")
    r = principal_sqrt(s)
    lo = np.minimum(x, y)
    hi = np.maximum(x, y)
    num = np.exp(-r * (hi - lo)) * (1.0 - np.exp(-2.0 * r * (L + lo))) * (1.0 - np.exp(-2.0 * r * (L - hi)))
    return _out(num / (2.0 * r * (1.0 - np.exp(-4.0 * r * L))))


def _unperturbed(params: ProblemParams, s, x, y):
    if params.is_line:
        return free_resolvent_kernel(s, np.asarray(x, dtype=float) - np.asarray(y, dtype=float))
    return dirichlet_green(s, x, y, params.L)


def transfer_function(params: ProblemParams, s):
    """G(s) = G_s(x0, 0): Laplace transform of the negated Volterra kernel.

    Finite L: sinh(r(L-x0)) / (2 r cosh(rL)); line: exp(-r x0)/(2r); r = sqrt(s).
    """
    r = principal_sqrt(s)
    x0 = params.x0
    if params.is_line:
        return _out(np.exp(-r * x0) / (2.0 * r))
    L = params.L
    den = 1.0 + np.exp(-2.0 * r * L)
    if np.any(np.abs(den) < 1e-14):
        raise PoleError(s, "cosh(sqrt(s) L)")
    return _out(np.exp(-r * x0) * (1.0 - np.exp(-2.0 * r * (L - x0))) / (2.0 * r * den))


def perturbed_resolvent_kernel(params: ProblemParams, s, x, y):
    """Kernel of (s + A_beta)^-1 for the rank-one perturbed operator.

    G(x,y) - beta G(x0,y) G(x,0) / (1 + beta G(x0,0)), with G the Dirichlet
    Green's function (finite L) or the free kernel G_s(x-y) on the line.
    """
    beta = params.beta
    den = 1.0 + beta * transfer_function(params, s)
    if abs(den) < 1e-13 * (1.0 + abs(beta * transfer_function(params, s))):
        raise PoleError(s, "1 + beta G_s(x0, 0)")
    base = _unperturbed(params, s, x, y)
    if beta == 0.0:
        return base
    corr = _unperturbed(params, s, params.x0, y) * _unperturbed(params, s, x, 0.0)
    return _out(base - beta * corr / den)


# ----------------------------------------------------------------- heat kernel

def _check_heat_args(t, x, L):
    if L is LINE or not math.isfinite(L):
        raise DomainError("heat kernel needs a finite L")
    t = np.asarray(t, dtype=float)
    if np.any(~(t > 0)):
        raise DomainError("heat kernel needs t > 0")
    if np.any(np.abs(np.asarray(x, dtype=float)) > L):
        raise DomainError("|x| must not exceed L")
    return t


def heat_kernel_eigen(t, x, L: float, ctl: SeriesControl = SeriesControl(),
                      derivative: bool = False) -> SeriesValue:
    """Alternating eigen-series of k_L(t, x) = (exp(-t A_L) delta_0)(x).

    Only odd modes contribute since phi_k(0) vanishes for even k. With
    derivative=True the time derivative is summed term by term.
    """
    t = _check_heat_args(t, x, L)
    x = np.asarray(x, dtype=float)
    tmin = float(np.min(t))
    total = np.zeros(np.broadcast(t, x).shape)
    k = 0
    block = 32
    while True:
        ks = np.arange(k, k + block)
        n = 2 * ks + 1
        mu = (n * np.pi / (2.0 * L)) ** 2
        sign = np.where(ks % 2 == 0, 1.0, -1.0)
        tt = np.asarray(t)[..., None]
        terms = sign * np.exp(-tt * mu) * np.sin(n * np.pi * (x[..., None] + L) / (2.0 * L)) / L
        if derivative:
            terms = -mu * terms
        total = total + terms.sum(axis=-1)
        k += block
        mu_next = ((2 * k + 1) * np.pi / (2.0 * L)) ** 2
        bound = math.exp(-tmin * mu_next) / L
        if derivative:
            bound *= mu_next
        if bound < ctl.tol and k >= MIN_TERMS and (not derivative or tmin * mu_next > 1.0):
            return SeriesValue(_out(total), k, bound)
        if k >= ctl.n_terms:
            raise SeriesBudgetError(f"eigen-series needs more than {ctl.n_terms} terms at t={tmin}")


def heat_kernel_images(t, x, L: float, ctl: SeriesControl = SeriesControl(),
                       derivative: bool = False) -> SeriesValue:
    """Method-of-images sum for the same kernel.

    Gaussians (4 pi t)^-1/2 exp(-(x-c)^2/(4t)) enter with + at c = 4Ln and
    with - at c = 4Ln + 2L, n in Z (odd 4L-periodic extension).
    """
    t = _check_heat_args(t, x, L)
    x = np.asarray(x, dtype=float)
    tmax = float(np.max(t))
    tmin = float(np.min(t))

    def shell(n_list):
        acc = 0.0
        for n in n_list:
            for c, sgn in ((4.0 * L * n, 1.0), (4.0 * L * n + 2.0 * L, -1.0)):
                z = x - c
                g = np.exp(-z * z / (4.0 * t)) / np.sqrt(4.0 * np.pi * t)
                if derivative:
                    g = g * (z * z / (4.0 * t * t) - 0.5 / t)
                acc = acc + sgn * g
        return acc

    total = shell([0])
    terms = 2
    N = 0
    while True:
        N += 1
        # nearest centre of shell N to any |x| <= L is at distance (4N - 3) L
        d = (4 * N - 3) * L
        bound = 4.0 * math.exp(-d * d / (4.0 * tmax)) / math.sqrt(4.0 * math.pi * tmin)
        if derivative:
            bound *= d * d / (4.0 * tmin * tmin) + 0.5 / tmin
        if bound < ctl.tol and terms >= MIN_TERMS:
            return SeriesValue(_out(total), terms, bound)
        total = total + shell([N, -N])
        terms += 4
        if terms > ctl.n_terms:
            raise SeriesBudgetError(f"image sum needs more than {ctl.n_terms} terms at t={tmax}")


def heat_kernel(t, x, L: float, ctl: SeriesControl = SeriesControl(), derivative: bool = False):
    """k_L(t, x): image sum below the crossover time, eigen-series above it."""
    t = _check_heat_args(t, x, L)
    tc = ctl.crossover(L)
    if t.ndim == 0:
        fn = heat_kernel_images if t < tc else heat_kernel_eigen
        return fn(t, x, L, ctl, derivative).value
    out = np.empty(np.broadcast(t, np.asarray(x, dtype=float)).shape)
    small = t < tc
    xb = np.broadcast_to(np.asarray(x, dtype=float), out.shape)
    if np.any(small):
        out[small] = heat_kernel_images(t[small], xb[small], L, ctl, derivative).value
    if np.any(~small):
        out[~small] = heat_kernel_eigen(t[~small], xb[~small], L, ctl, derivative).value
    return out


def theta1(q: float, z, tol: float = 1e-16, n_terms: int = 100_000):
    """Jacobi theta_1(z, q) = 2 sum_k (-1)^k q^((k+1/2)^2) sin((2k+1) z)."""
    if not 0.0 < q < 1.0:
        raise DomainError("theta1 needs a nome in (0, 1)")
    z = np.asarray(z, dtype=float)
    total = np.zeros_like(z)
    lq = math.log(q)
    for k in range(n_terms):
        w = math.exp(lq * (k + 0.5) ** 2)
        total = total + 2.0 * (-1) ** k * w * np.sin((2 * k + 1) * z)
        if k + 1 >= MIN_TERMS and 2.0 * math.exp(lq * (k + 1.5) ** 2) < tol:
            return _out(total)
    raise SeriesBudgetError("theta1 budget exhausted")


def theta3(q: float, z, tol: float = 1e-16, n_terms: int = 100_000):
    """Jacobi theta_3(z, q) = sum_n q^(n^2) exp(2inz) = 1 + 2 sum_n q^(n^2) cos(2nz)."""
    if not 0.0 < q < 1.0:
        raise DomainError("theta3 needs a nome in (0, 1)")
    z = np.asarray(z, dtype=float)
    total = np.ones_like(z)
    lq = math.log(q)
    for n in range(1, n_terms):
        total = total + 2.0 * math.exp(lq * n * n) * np.cos(2 * n * z)
        if n >= MIN_TERMS and 2.0 * math.exp(lq * (n + 1) ** 2) < tol:
            return _out(total)
    raise SeriesBudgetError("theta3 budget exhausted")


def kernel_nome(t: float, L: float) -> float:
    """Nome q = exp(-pi^2 t / L^2) for which k_L(t, x0) = theta1(q, alpha) / (2L)."""
    return math.exp(-math.pi**2 * t / L**2)


def sensor_angle(L: float, x0: float) -> float:
    """alpha = pi (x0 + L) / (2L)."""
    return math.pi * (x0 + L) / (2.0 * L)


def heat_kernel_theta(t: float, x: float, L: float, tol: float = 1e-16) -> float:
    """k_L from the 4L-periodic kernel written with theta_3.

    k_L(t,x) = (1/4L) [theta3(pi x/(4L), q) - theta3(pi (x-2L)/(4L), q)], q = exp(-pi^2 t/(4L^2)).
    """
    q = math.exp(-math.pi**2 * t / (4.0 * L * L))
    return (theta3(q, math.pi * x / (4 * L), tol) - theta3(q, math.pi * (x - 2 * L) / (4 * L), tol)) / (4.0 * L)


# ---------------------------------------------------------- Volterra kernel

def kernel_a(t, params: ProblemParams, ctl: SeriesControl = SeriesControl(), derivative: bool = False):
    """a_L(t) = -k_L(t, x0) for t >= 0 (a_L and all derivatives vanish at t = 0)."""
    if params.is_line:
        raise DomainError("the Volterra kernel is only used for finite L")
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise DomainError("kernel needs t >= 0")
    out = np.zeros(t.shape)
    pos = t > 0
    if np.any(pos):
        out[pos] = -heat_kernel(t[pos], params.x0, params.L, ctl, derivative)
    return _out(out)


@dataclass
class FourierValue:
    a_hat: complex
    a_prime_hat: complex
    terms: int
    tail_bound: float


FOURIER_CONTROL = SeriesControl(n_terms=20_000_000, tol=1e-12)


def kernel_fourier(params: ProblemParams, omega: float, ctl: SeriesControl = FOURIER_CONTROL) -> FourierValue:
    """Fourier transforms of a_L and a_L' from the eigen-series.

    a_hat(w) = -(1/L) sum_k (-1)^k sin((2k+1) alpha) / (i w + lambda_{2k+1}^2),
    a_prime_hat = i w a_hat. The tail after N terms is bounded by summation by
    parts: 2 / (L |cos alpha| lambda_{2N+1}^2).
    """
    if params.is_line:
        raise DomainError("kernel_fourier needs a finite L")
    omega = float(omega)
    if omega == 0.0:
        raise DomainError("kernel_fourier needs omega != 0")
    L = params.L
    alpha = sensor_angle(L, params.x0)
    cos_a = abs(math.cos(alpha))
    total = 0j
    k = 0
    chunk = 1 << 18
    while True:
        ks = np.arange(k, k + chunk, dtype=float)
        n = 2.0 * ks + 1.0
        mu = (n * np.pi / (2.0 * L)) ** 2
        sign = 1.0 - 2.0 * (ks % 2)
        total += np.sum(sign * np.sin(n * alpha) / (1j * omega + mu))
        k += chunk
        mu_next = ((2 * k + 1) * math.pi / (2.0 * L)) ** 2
        bound = 2.0 / (L * cos_a * mu_next) if cos_a > 0 else math.inf
        if (bound < ctl.tol and k >= MIN_TERMS) or k >= ctl.n_terms:
            break
    if bound >= ctl.tol and k >= ctl.n_terms and not math.isfinite(bound):
        raise SeriesBudgetError("kernel_fourier tail bound unavailable for this sensor position")
    a_hat = -total / L
    return FourierValue(complex(a_hat), complex(1j * omega * a_hat), k, bound)


# ---------------------------------------------------------------- forcing

def forcing(t, params: ProblemParams, u0: ModeVector, ctl: SeriesControl = SeriesControl(),
            derivative: bool = False):
    """g_L(t) = sum_k <u0, phi_k> phi_k(x0) exp(-t lambda_k^2) (or its t-derivative).

    The mode vector is finite, so the sum is exact up to modes whose term bound
    stays below ctl.tol over the whole time grid; those are dropped.
    """
    if params.is_line:
        raise DomainError("forcing is defined for finite L")
    if abs(u0.L - params.L) > 1e-12 * params.L:
        raise DomainError("mode vector and params use different L")
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise DomainError("forcing needs t >= 0")
    mu = wavenumbers(u0.L, u0.n_modes) ** 2
    w = u0.coeffs * phi_at(params.x0, params.L, u0.n_modes)
    if derivative:
        w = -w * mu
    tmin = float(np.min(t)) if t.size else 0.0
    keep = np.abs(w) * np.exp(-tmin * mu) >= ctl.tol * 1e-3
    w, mu = w[keep], mu[keep]
    if w.size == 0:
        return _out(np.zeros(t.shape))
    out = np.exp(-np.multiply.outer(t, mu)) @ w
    return _out(out)
