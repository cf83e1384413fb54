"""Deterministic CSV and JSON emission."""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple

import jsonschema


def fmt(v) -> str:
    """17 significant digits for floats; integers and strings unchanged."""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return format(v, ".17g")
    if v is None:
        return ""
    try:
        return format(float(v), ".17g")
    except (TypeError, ValueError):
        return str(v)


def write_csv(path: Path, columns: Sequence[Tuple[str, str]], rows: Iterable[Sequence]) -> Path:
    """CSV with LF line endings and a 'name [unit]' header."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([f"{name} [{unit}]" for name, unit in columns])
        for row in rows:
            w.writerow([fmt(v) for v in row])
    return path


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, float):
        if math.isnan(obj) or math.isinf(obj):
            return None if math.isnan(obj) else ("inf" if obj > 0 else "-inf")
        return float(fmt(obj))
    if hasattr(obj, "item"):
        return _clean(obj.item())
    return obj


def load_schema() -> dict:
    text = resources.files("thermoscope").joinpath("schemas/summary.schema.json").read_text()
    return json.loads(text)


def write_json(path: Path, summary: dict) -> Path:
    """Validate against the shipped schema and write with sorted keys."""
    data = _clean(summary)
    jsonschema.validate(data, load_schema())
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="\n", encoding="utf-8") as fh:
        fh.write(json.dumps(data, indent=2, sort_keys=True) + "\n")
    return path


@dataclass
class Check:
    """One comparison row: reference vs computed with its provenance tag."""

    name: str
    computed: float
    reference: Optional[float] = None
    tol: Optional[float] = None
    unit: str = "1"
    provenance: str = "derived"
    passed: Optional[bool] = None
    relative: bool = False

    def __post_init__(self):
        if self.passed is None and self.reference is not None and self.tol is not None:
            self.passed = bool(self.error() <= self.tol)

    def abs_error(self) -> Optional[float]:
        if self.reference is None:
            return None
        return abs(float(self.computed) - float(self.reference))

    def rel_error(self) -> Optional[float]:
        if self.reference is None or self.reference == 0:
            return None
        return self.abs_error() / abs(float(self.reference))

    def error(self) -> float:
        return self.rel_error() if self.relative else self.abs_error()

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "computed": float(self.computed),
            "reference": None if self.reference is None else float(self.reference),
            "abs_error": self.abs_error(),
            "rel_error": self.rel_error(),
            "tol": self.tol,
            "unit": self.unit,
            "provenance": self.provenance,
            "passed": bool(self.passed) if self.passed is not None else True,
        }


def summary(command: str, params: Dict[str, Any], results: Dict[str, Any], checks: List[Check],
            artifacts: List[str]) -> dict:
    ok = all(c.as_dict()["passed"] for c in checks)
    return {
        "command": command,
        "params": params,
        "results": results,
        "checks": [c.as_dict() for c in checks],
        "artifacts": sorted(artifacts),
        "status": "pass" if ok else "fail",
    }
