"""Scaling fits and verification reports."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np

CSV_COLUMNS = ("label", "parameter", "lhs", "rhs", "ratio", "pass")


@dataclass(frozen=True)
class ScalingFit:
    """Least-squares line ``log m = exponent * log p + log_intercept``."""

    exponent: float
    log_intercept: float
    r_squared: float
    n_points: int

    def to_dict(self) -> dict:
        return {
            "exponent": self.exponent,
            "log_intercept": self.log_intercept,
            "r_squared": self.r_squared,
            "n_points": self.n_points,
        }


def fit_scaling(pairs: Sequence[tuple[float, float]]) -> ScalingFit:
    """Fit a power law through ``(parameter, measure)`` pairs on log-log axes.

    Raises
    ------
    ValueError
        With fewer than three pairs or any nonpositive entry.
    """
    arr = np.asarray(pairs, dtype=float).reshape(-1, 2)
    if len(arr) < 3:
        raise ValueError(f"need at least 3 pairs for a scaling fit, got {len(arr)}")
    if np.any(~np.isfinite(arr)) or np.any(arr <= 0):
        raise ValueError("scaling fit needs finite positive parameters and measures")
    x, y = np.log(arr[:, 0]), np.log(arr[:, 1])
    slope, icept = np.polyfit(x, y, 1)
    resid = y - (slope * x + icept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0 else 1.0 - float(np.sum(resid**2)) / ss_tot
    return ScalingFit(float(slope), float(icept), float(min(max(r2, 0.0), 1.0)), len(arr))


def try_fit(pairs) -> ScalingFit | None:
    """``fit_scaling`` or ``None`` when there are too few usable pairs."""
    pairs = [(p, m) for p, m in pairs if p > 0 and m > 0]
    return fit_scaling(pairs) if len(pairs) >= 3 else None


def geometric_grid(lo: float, hi: float, n: int | None = None, per_decade: int = 8) -> np.ndarray:
    """Geometric grid from ``lo`` to ``hi``; ``n`` points or ``per_decade`` per decade."""
    if n is None:
        n = max(2, int(math.ceil(per_decade * math.log10(hi / lo))) + 1)
    return np.geomspace(lo, hi, n)


@dataclass(frozen=True)
class Row:
    label: str
    parameter: Any
    lhs: float
    rhs: float
    passed: bool
    tolerance: float = 0.0

    @property
    def ratio(self) -> float:
        if self.rhs == 0:
            return math.inf if self.lhs else math.nan
        return self.lhs / self.rhs

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "parameter": _jsonable(self.parameter),
            "lhs": _jsonable(self.lhs),
            "rhs": _jsonable(self.rhs),
            "ratio": _jsonable(self.ratio),
            "tolerance": _jsonable(self.tolerance),
            "pass": bool(self.passed),
        }


@dataclass(frozen=True)
class Check:
    """A report-level assertion that is not tied to one parameter value."""

    name: str
    value: float
    target: str
    passed: bool

    def to_dict(self) -> dict:
        return {"name": self.name, "value": _jsonable(self.value), "target": self.target, "pass": bool(self.passed)}


@dataclass
class VerificationReport:
    statement: str
    rows: list[Row]
    fit: ScalingFit | None = None
    checks: list[Check] = field(default_factory=list)
    extra: dict = field(default_factory=dict)
    seed: int = 0

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.rows) and all(c.passed for c in self.checks)

    def first_failure(self) -> str | None:
        for r in self.rows:
            if not r.passed:
                return f"row {r.label} parameter={r.parameter}: lhs={r.lhs:.6g} rhs={r.rhs:.6g} ratio={r.ratio:.6g}"
        for c in self.checks:
            if not c.passed:
                return f"check {c.name}: value={c.value!r} target {c.target}"
        return None

    def check(self, name: str) -> Check:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def to_dict(self) -> dict:
        return {
            "statement": self.statement,
            "seed": self.seed,
            "pass": self.passed,
            "fit": None if self.fit is None else self.fit.to_dict(),
            "rows": [r.to_dict() for r in self.rows],
            "checks": [c.to_dict() for c in self.checks],
            "extra": _jsonable(self.extra),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2, ensure_ascii=False) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for r in self.rows:
            w.writerow([r.label, _fmt(r.parameter), _fmt(r.lhs), _fmt(r.rhs), _fmt(r.ratio), "true" if r.passed else "false"])
        return buf.getvalue()


def report_from_json(text: str) -> dict:
    return json.loads(text)


def rows_from_csv(text: str) -> list[dict]:
    out = []
    for rec in csv.DictReader(io.StringIO(text)):
        rec = dict(rec)
        for k in ("lhs", "rhs", "ratio"):
            rec[k] = float(rec[k])
        rec["pass"] = rec["pass"] == "true"
        out.append(rec)
    return out


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return str(v)


def _jsonable(v):
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, np.ndarray):
        return _jsonable(v.tolist())
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return v if math.isfinite(v) else None
    return v
