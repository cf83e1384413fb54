"""Sine eigenbasis of the Dirichlet Laplacian on (-L, L)."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy import fft


def wavenumbers(L: float, n_modes: int) -> np.ndarray:
    """lambda_k = k*pi/(2L) for k = 1..n_modes; the eigenvalues are lambda_k**2."""
    return np.arange(1, n_modes + 1) * np.pi / (2.0 * L)


def phi(k, x, L: float):
    """Normalized eigenfunction (1/sqrt L) sin(k pi (x+L)/(2L)), broadcasting over k and x."""
    k = np.asarray(k)
    x = np.asarray(x, dtype=float)
    return np.sin(k * np.pi * (x + L) / (2.0 * L)) / np.sqrt(L)


def phi_at(x: float, L: float, n_modes: int) -> np.ndarray:
    """Vector (phi_1(x), ..., phi_n(x))."""
    return phi(np.arange(1, n_modes + 1), x, L)


@dataclass(frozen=True)
class ModeVector:
    """Coefficients <u, phi_k>, k = 1..n_modes, of a function on (-L, L)."""

    coeffs: np.ndarray
    L: float

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=float)
        if c.ndim != 1 or c.size == 0:
            raise ValueError("coeffs must be a non-empty 1-D array")
        if not np.all(np.isfinite(c)):
            raise ValueError("coeffs must be finite")
        if not (np.isfinite(self.L) and self.L > 0):
            raise ValueError("ModeVector needs a finite positive L")
        object.__setattr__(self, "coeffs", c)

    @property
    def n_modes(self) -> int:
        return self.coeffs.size

    @property
    def eigenvalues(self) -> np.ndarray:
        return wavenumbers(self.L, self.n_modes) ** 2

    def h1_norm(self) -> float:
        """Weighted norm sqrt(sum (1 + k^2) c_k^2), equivalent to the H1 norm."""
        k = np.arange(1, self.n_modes + 1)
        return float(np.sqrt(np.sum((1.0 + k**2) * self.coeffs**2)))

    def tail_norm(self, n: int) -> float:
        """Weighted norm of the modes beyond index n."""
        k = np.arange(1, self.n_modes + 1)
        sel = k > n
        return float(np.sqrt(np.sum((1.0 + k[sel] ** 2) * self.coeffs[sel] ** 2)))

    def evaluate(self, x) -> np.ndarray:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        k = np.arange(1, self.n_modes + 1)
        return phi(k[None, :], x[:, None], self.L) @ self.coeffs

    def resized(self, n_modes: int) -> "ModeVector":
        c = np.zeros(n_modes)
        n = min(n_modes, self.n_modes)
        c[:n] = self.coeffs[:n]
        return ModeVector(c, self.L)

    @classmethod
    def zeros(cls, L: float, n_modes: int) -> "ModeVector":
        return cls(np.zeros(n_modes), L)

    @classmethod
    def basis(cls, k: int, L: float, n_modes: int) -> "ModeVector":
        if not 1 <= k <= n_modes:
            raise ValueError("mode index out of range")
        c = np.zeros(n_modes)
        c[k - 1] = 1.0
        return cls(c, L)

    @classmethod
    def from_function(cls, u: Callable, L: float, n_modes: int,
                      n_quad: Optional[int] = None) -> "ModeVector":
        """Project u onto the first n_modes eigenfunctions (trapezoid rule via DST-I)."""
        M = n_quad or max(4 * n_modes, 4096)
        x = -L + np.arange(1, M) * (2.0 * L / M)
        vals = np.asarray(u(x), dtype=float)
        y = fft.dst(vals, type=1)
        c = (2.0 * L / M) / np.sqrt(L) * 0.5 * y[:n_modes]
        if c.size < n_modes:
            c = np.concatenate([c, np.zeros(n_modes - c.size)])
        return cls(c, L)
