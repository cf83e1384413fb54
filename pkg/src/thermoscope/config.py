"""Run configuration: an INI file of key=value sections, overridden by command-line flags."""
from __future__ import annotations

import configparser
import math
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Dict, List, Optional, Tuple

from .errors import DomainError
from .kernels import ProblemParams, parse_length


class ConfigError(ValueError):
    """Malformed or unknown configuration entry."""


def parse_grid(text: str) -> Tuple[float, ...]:
    """Comma list "a,b,c" or range "start:stop:step" (stop excluded)."""
    text = text.strip()
    if not text:
        raise ConfigError("empty grid")
    try:
        if ":" in text:
            parts = [float(v) for v in text.split(":")]
            if len(parts) != 3 or parts[2] <= 0 or parts[1] <= parts[0]:
                raise ConfigError(f"bad range grid {text!r}")
            start, stop, step = parts
            n = int(math.ceil((stop - start) / step - 1e-9))
            return tuple(start + i * step for i in range(n))
        return tuple(float(v) for v in text.split(","))
    except ValueError as exc:
        raise ConfigError(f"bad grid {text!r}") from exc


@dataclass
class RunConfig:
    command: str = "selftest"
    L: str = "4"
    x0: float = 1.0
    beta: float = 5.0
    m: int = 8
    delta: float = 0.5
    tol: Optional[float] = None
    T: float = 20.0
    dt: float = 1e-3
    n_modes: int = 128
    beta_max: float = 80.0
    betas: Optional[Tuple[float, ...]] = None
    deltas: Optional[Tuple[float, ...]] = None
    Ls: Optional[Tuple[float, ...]] = None
    grid: str = "delta"
    out: str = "results"
    line: bool = False
    check: bool = False
    all: bool = False

    def params(self, beta: Optional[float] = None) -> ProblemParams:
        try:
            return ProblemParams(self.L, self.x0, self.beta if beta is None else beta)
        except DomainError as exc:
            raise ConfigError(str(exc)) from exc

    def validate(self) -> "RunConfig":
        try:
            parse_length(self.L)
        except (DomainError, ValueError) as exc:
            raise ConfigError(f"bad L {self.L!r}") from exc
        if not self.x0 > 0:
            raise ConfigError("x0 must be positive")
        if self.m < 2 or self.m > 12:
            raise ConfigError("m must lie in [2, 12]")
        if not 0 < self.delta < 1:
            raise ConfigError("delta must lie in (0, 1)")
        if self.tol is not None and not self.tol > 0:
            raise ConfigError("tol must be positive")
        if not (self.T > 0 and self.dt > 0):
            raise ConfigError("T and dt must be positive")
        if self.n_modes < 1:
            raise ConfigError("n_modes must be positive")
        if self.grid not in ("delta", "L", "beta"):
            raise ConfigError("grid must be one of delta, L, beta")
        for name in ("betas", "deltas", "Ls"):
            g = getattr(self, name)
            if g is not None and len(g) == 0:
                raise ConfigError(f"{name} grid is empty")
        return self


# section -> allowed keys; values are parsed by the RunConfig field type
SECTIONS: Dict[str, Tuple[str, ...]] = {
    "params": ("L", "x0", "beta"),
    "numerics": ("m", "delta", "tol", "T", "dt", "n_modes", "beta_max"),
    "grids": ("betas", "deltas", "Ls", "grid"),
    "output": ("out",),
}

_TYPES = {f.name: f.type for f in fields(RunConfig)}


def _convert(key: str, raw: str):
    kind = _TYPES[key]
    try:
        if key in ("betas", "deltas", "Ls"):
            return parse_grid(raw)
        if "float" in kind:
            return float(raw)
        if "int" in kind:
            return int(raw)
        return raw.strip()
    except ValueError as exc:
        raise ConfigError(f"bad value for {key}: {raw!r}") from exc


def load_file(path: Path) -> Dict[str, object]:
    cp = configparser.ConfigParser(interpolation=None)
    cp.optionxform = str  # keys are case-sensitive (L vs l)
    try:
        with open(path, encoding="utf-8") as fh:
            cp.read_file(fh)
    except (OSError, configparser.Error) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    out: Dict[str, object] = {}
    for sec in cp.sections():
        if sec not in SECTIONS:
            raise ConfigError(f"unknown section [{sec}]")
        for key, raw in cp.items(sec):
            if key not in SECTIONS[sec]:
                raise ConfigError(f"unknown key {key!r} in [{sec}]")
            out[key] = _convert(key, raw)
    return out


def build(command: str, file_values: Dict[str, object], flag_values: Dict[str, object]) -> RunConfig:
    """Defaults, then the file, then explicitly given flags."""
    cfg = replace(RunConfig(command=command), **file_values)
    cfg = replace(cfg, **{k: v for k, v in flag_values.items() if v is not None})
    return cfg.validate()
