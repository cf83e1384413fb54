"""Spectral (discrete sine transform) discretization of the perturbed operator.

On the grid x_j = -L + j 2L/2^m, j = 1..2^m-1, the sampled eigenfunctions form
S(k, j) = phi_k(x_j), and with the trapezoid weight w = 2L/2^m we have
w S^T S = I. The unperturbed operator is A = w S^T diag(mu_k) S, and the
feedback adds the rank-one term beta w delta_0 delta_{x0}^T, where
delta_y = S^T phi(y) is the spectral approximation of a point mass at y.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Union

import numpy as np

from .errors import ComputationError, DomainError
from .kernels import ProblemParams
from .modes import phi_at, wavenumbers
from .spectrum import CharacteristicPoint, EigenTrajectory


@dataclass(frozen=True)
class SpectralGrid:
    m: int
    L: float

    def __post_init__(self):
        if self.m < 2:
            raise DomainError("grid level m must be >= 2")
        if not (math.isfinite(self.L) and self.L > 0):
            raise DomainError("grid needs a finite positive L")

    @property
    def n(self) -> int:
        return 2**self.m - 1

    @property
    def weight(self) -> float:
        return 2.0 * self.L / 2**self.m

    @property
    def points(self) -> np.ndarray:
        return -self.L + np.arange(1, 2**self.m) * self.weight


def dst_matrix(grid: SpectralGrid) -> np.ndarray:
    """S(k, j) = phi_k(x_j), rows indexed by mode k = 1..n."""
    k = np.arange(1, grid.n + 1)
    return np.sin(np.outer(k, np.arange(1, grid.n + 1)) * np.pi / 2**grid.m) / np.sqrt(grid.L)


def spectral_delta(grid: SpectralGrid, y: float) -> np.ndarray:
    """delta_y on the grid: sum_k phi_k(y) phi_k(x_j)."""
    return dst_matrix(grid).T @ phi_at(y, grid.L, grid.n)


@dataclass
class DiscreteOperator:
    matrix: np.ndarray
    params: ProblemParams
    grid: SpectralGrid

    def transpose(self) -> "DiscreteOperator":
        return DiscreteOperator(self.matrix.T.copy(), self.params, self.grid)


def build_operator(m: int, params: ProblemParams) -> DiscreteOperator:
    if params.is_line:
        raise DomainError("the discretization needs a finite L")
    grid = SpectralGrid(m, params.L)
    S = dst_matrix(grid)
    w = grid.weight
    mu = wavenumbers(grid.L, grid.n) ** 2
    A = w * (S.T * mu) @ S
    A = 0.5 * (A + A.T)  # exactly symmetric before the perturbation
    if params.beta != 0.0:
        d0 = S.T @ phi_at(0.0, grid.L, grid.n)
        dx = S.T @ phi_at(params.x0, grid.L, grid.n)
        A = A + params.beta * w * np.outer(d0, dx)
    return DiscreteOperator(A, params, grid)


@dataclass
class EigenPair:
    value: complex
    vector: np.ndarray
    residual: float


def eig(op: Union[DiscreteOperator, np.ndarray], tol: float = 1e-8) -> List[EigenPair]:
    """All eigenpairs of a dense real matrix (LAPACK Hessenberg QR), sorted by (Re, |Im|, Im).

    Each pair satisfies ||A v - lambda v|| / ||v|| <= tol ||A||.
    """
    A = op.matrix if isinstance(op, DiscreteOperator) else np.asarray(op, dtype=float)
    if not np.all(np.isfinite(A)):
        raise DomainError("matrix has non-finite entries")
    try:
        vals, vecs = np.linalg.eig(A)
    except np.linalg.LinAlgError as exc:
        raise ComputationError(f"eigensolver failed for a {A.shape[0]}x{A.shape[1]} matrix") from exc
    norm = max(np.linalg.norm(A, 2), np.finfo(float).tiny)
    order = np.lexsort((vals.imag, np.abs(vals.imag), vals.real))
    out = []
    for i in order:
        v = vecs[:, i]
        r = np.linalg.norm(A @ v - vals[i] * v) / np.linalg.norm(v)
        if r > tol * norm:
            raise ComputationError(f"eigenpair residual {r:.3g} too large for a {A.shape[0]}x{A.shape[1]} matrix")
        out.append(EigenPair(complex(vals[i]), v, float(r)))
    return out


# ---------------------------------------------------------- resolvents

def resolvent_kernel_dense(op: DiscreteOperator, s: complex, x_index: int, y: float) -> complex:
    """((s I + A)^-1 delta_y)(x_j) from a dense solve."""
    d = spectral_delta(op.grid, y)
    u = np.linalg.solve(s * np.eye(op.grid.n) + op.matrix, d.astype(complex))
    return complex(u[x_index])


def modal_resolvent_kernel(m: int, params: ProblemParams, s: complex, x: float, y: float) -> complex:
    """Same discrete resolvent kernel in modal coordinates.

    S A S^-1 = diag(mu) + beta phi(0) phi(x0)^T, so the kernel is
    phi(x)^T (s + diag(mu) + beta phi(0) phi(x0)^T)^-1 phi(y), evaluated with
    the Sherman-Morrison formula in O(2^m) operations.
    """
    n = 2**m - 1
    L = params.L
    mu = wavenumbers(L, n) ** 2
    r = 1.0 / (s + mu)
    px, py = phi_at(x, L, n), phi_at(y, L, n)
    p0, pz = phi_at(0.0, L, n), phi_at(params.x0, L, n)
    base = np.sum(px * r * py)
    num = np.sum(px * r * p0) * np.sum(pz * r * py)
    return complex(base - params.beta * num / (1.0 + params.beta * np.sum(pz * r * p0)))


# ------------------------------------------------------ eigenfunctions

@dataclass
class EigenfunctionSweep:
    grid: SpectralGrid
    betas: np.ndarray
    values: List[float]
    vectors: List[np.ndarray]
    sign_loss_beta: Optional[float] = None
    terminus_beta: Optional[float] = None
    adjoint: bool = False


def first_eigenfunction(op: DiscreteOperator) -> EigenPair:
    pairs = eig(op)
    return pairs[0]


def first_eigenfunction_sweep(m: int, L: float, x0: float, betas: Sequence[float],
                              adjoint: bool = False, sign_tol: float = 1e-10) -> EigenfunctionSweep:
    """First eigenfunction of A^m_{L,beta} (or its transpose) for each beta.

    Vectors are normalized to w sum v^2 = 1 with v > 0 next to x = -L. The sweep
    records the first beta where some entry turns negative and stops at the
    first beta where the smallest-real-part eigenvalue is complex.
    """
    grid = SpectralGrid(m, L)
    sw = EigenfunctionSweep(grid, np.asarray(betas, dtype=float), [], [], adjoint=adjoint)
    for b in sw.betas:
        op = build_operator(m, ProblemParams(L, x0, b))
        if adjoint:
            op = op.transpose()
        pair = first_eigenfunction(op)
        if abs(pair.value.imag) > 1e-10 * max(1.0, abs(pair.value)):
            sw.terminus_beta = float(b)
            sw.betas = sw.betas[: len(sw.values)]
            break
        v = np.real(pair.vector)
        v = v / math.sqrt(grid.weight * np.sum(v * v))
        if v[0] < 0:
            v = -v
        sw.values.append(pair.value.real)
        sw.vectors.append(v)
        if sw.sign_loss_beta is None and np.min(v) < -sign_tol * np.max(np.abs(v)):
            sw.sign_loss_beta = float(b)
    return sw


# -------------------------------------------------------- axis crossing

def _rightmost_pair(op: DiscreteOperator, prev: Optional[complex]):
    """Upper member (Im s > 0) of the complex pair of s = -mu with the largest Re s."""
    pairs = eig(op)
    scale = max(1.0, max(abs(p.value) for p in pairs))
    cands = [(-p.value, p.residual) for p in pairs if -p.value.imag > 1e-9 * scale]
    if not cands:
        return None, ""
    cands.sort(key=lambda c: -c[0].real)
    diag = ""
    if len(cands) > 1 and abs(cands[0][0].real - cands[1][0].real) < 1e-6 * scale:
        if prev is not None:
            cands.sort(key=lambda c: abs(c[0] - prev))
        diag = "ambiguous rightmost pair: " + ", ".join(f"{c[0]:.6g}" for c in cands[:3])
    return cands[0], diag


def _point(s: complex, beta: float, residual: float) -> CharacteristicPoint:
    lam = np.sqrt(complex(s))
    return CharacteristicPoint(complex(lam), float(beta), float(residual))


def crossing_scan_discrete(m: int, L: float, x0: float, beta_grid: Sequence[float],
                           tol: float = 1e-8) -> EigenTrajectory:
    """Rightmost complex pair of -A^m_{L,beta} over beta and its imaginary-axis crossing."""
    betas = np.asarray(beta_grid, dtype=float)
    traj = EigenTrajectory(betas=betas, points=[], branch_id="discrete-first-pair")
    prev = None
    used = []
    for b in betas:
        c, diag = _rightmost_pair(build_operator(m, ProblemParams(L, x0, b)), prev)
        if diag:
            traj.diagnostic = f"beta={b:.6g}: {diag}"
        if c is None:
            continue
        traj.points.append(_point(c[0], b, c[1]))
        used.append(b)
        prev = c[0]
    traj.betas = np.array(used)
    pts = traj.points
    for a, c in zip(pts[:-1], pts[1:]):
        if a.s.real < 0 <= c.s.real:
            lo, hi = a, c
            while True:
                bm = 0.5 * (lo.beta + hi.beta)
                cm, _ = _rightmost_pair(build_operator(m, ProblemParams(L, x0, bm)), lo.s)
                mid = _point(cm[0], bm, cm[1])
                if abs(mid.s.real) < tol or hi.beta - lo.beta < 1e-13 * bm:
                    break
                if mid.s.real < 0:
                    lo = mid
                else:
                    hi = mid
            traj.crossing_point = mid
            traj.crossing_beta = mid.beta
            break
    return traj
