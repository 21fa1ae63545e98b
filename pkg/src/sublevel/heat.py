"""Explicit heat flow on masked domains.

The domain starts cold (temperature 0) and its boundary layer is held at
temperature 1.  The forward-Euler five-point scheme is used throughout;
under ``dt <= h**2 / 4`` every update is a convex combination of old
values, so the discrete maximum principle holds exactly and is asserted.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, replace

import numpy as np

from .field import AnalyticTestFunction
from .geometry import DomainMask, removed_components

BOUNDARY_VALUE = 1.0


class StabilityError(ValueError):
    """Requested time step exceeds the explicit stability limit."""


class HypothesisError(ValueError):
    """A precondition of a heat-content statement does not hold on the mask."""


@dataclass(frozen=True)
class HeatState:
    """Temperatures on the full grid of ``mask`` at ``time``.

    Non-interior cells hold the boundary value; only interior cells evolve.
    """

    mask: DomainMask
    temps: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        t = np.array(self.temps, dtype=float)
        if t.shape != self.mask.resolution:
            raise ValueError(f"temps shape {t.shape} does not match mask {self.mask.resolution}")
        t.setflags(write=False)
        object.__setattr__(self, "temps", t)

    @classmethod
    def cold(cls, mask: DomainMask) -> "HeatState":
        return cls(mask, np.where(mask.interior, 0.0, BOUNDARY_VALUE), 0.0)

    @property
    def interior_temps(self) -> np.ndarray:
        return self.temps[self.mask.interior]

    @property
    def min_temp(self) -> float:
        return float(self.interior_temps.min())


def stable_dt(mask: DomainMask) -> float:
    """Largest stable explicit step, ``1 / (2 (1/hx^2 + 1/hy^2))`` (``h^2/4`` on square cells)."""
    hx, hy = mask.spacing
    return 0.5 / (1.0 / hx**2 + 1.0 / hy**2)


def _window(mask: DomainMask):
    # interior bounding box plus the surrounding boundary layer
    ii, jj = np.nonzero(mask.interior)
    return slice(ii.min() - 1, ii.max() + 2), slice(jj.min() - 1, jj.max() + 2)


def evolve(state: HeatState, until: float, dt: float | None = None) -> HeatState:
    """Advance ``state`` to time ``until`` with forward Euler.

    The step defaults to the stability limit and is shortened so that an
    integer number of steps lands on ``until``.  A requested ``dt`` above
    the limit raises :class:`StabilityError`.
    """
    if until < state.time:
        raise ValueError(f"until={until} precedes state time {state.time}")
    limit = stable_dt(state.mask)
    if dt is None:
        dt = limit
    elif dt > limit * (1 + 1e-12):
        raise StabilityError(f"dt={dt:.3e} exceeds the explicit limit {limit:.3e}")
    span = until - state.time
    if span == 0:
        return state
    n = max(1, math.ceil(span / dt - 1e-9))
    dt = span / n

    hx, hy = state.mask.spacing
    ax, ay = dt / hx**2, dt / hy**2
    win = _window(state.mask)
    u = np.array(state.temps[win])
    live = state.mask.interior[win][1:-1, 1:-1].astype(float)
    for step in range(n):
        c = u[1:-1, 1:-1]
        lap = ax * (u[2:, 1:-1] + u[:-2, 1:-1] - 2 * c) + ay * (u[1:-1, 2:] + u[1:-1, :-2] - 2 * c)
        lap *= live
        c += lap
        lo, hi = c.min(), c.max()
        if lo < -1e-12 or hi > 1 + 1e-12:
            raise AssertionError(f"maximum principle violated at step {step}: range [{lo}, {hi}]")
    temps = np.array(state.temps)
    temps[win] = u
    return replace(state, temps=temps, time=float(until))


def heat_content(state: HeatState) -> float:
    """``h^2`` times the sum of interior temperatures."""
    hx, hy = state.mask.spacing
    return float(state.interior_temps.sum() * hx * hy)


def heat_series(mask: DomainMask, times) -> list[dict]:
    """Rows ``{time, heat_content, min_temp}`` at increasing ``times``."""
    state = HeatState.cold(mask)
    rows = []
    for t in sorted(float(t) for t in times):
        state = evolve(state, t)
        rows.append({"time": t, "heat_content": heat_content(state), "min_temp": state.min_temp})
    return rows


def series_to_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["time", "heat_content", "min_temp"])
    for r in rows:
        w.writerow([repr(r["time"]), repr(r["heat_content"]), repr(r["min_temp"])])
    return buf.getvalue()


def series_from_csv(text: str) -> list[dict]:
    return [{k: float(v) for k, v in row.items()} for row in csv.DictReader(io.StringIO(text))]


# --------------------------------------------------------------------------
# heat-content ratio


def check_removed_lengths(mask: DomainMask, eps: float) -> list[dict]:
    """Raise unless every removed component has boundary length ``>= sqrt(eps)``.

    A component whose measured length falls short by less than one cell
    width is accepted.
    """
    h = max(mask.spacing)
    holes = removed_components(mask)
    for c in holes:
        if c["length"] + h < math.sqrt(eps):
            raise HypothesisError(
                f"removed component {c['label']} at {c['centroid']} has boundary length "
                f"{c['length']:.4g} < sqrt(eps) = {math.sqrt(eps):.4g}"
            )
    return holes


def boundary_length(mask: DomainMask) -> float:
    return mask.measured_perimeter()


def lemma7_ratios(mask: DomainMask, eps_values, check: bool = True) -> dict[float, float]:
    """``heat_content(eps) / (sqrt(eps) * |boundary|)`` for each ``eps``, sharing one evolution."""
    eps_values = sorted(float(e) for e in eps_values)
    if check:
        check_removed_lengths(mask, eps_values[0])
    per = boundary_length(mask)
    state = HeatState.cold(mask)
    out = {}
    for e in eps_values:
        state = evolve(state, e)
        out[e] = heat_content(state) / (math.sqrt(e) * per)
    return out


def lemma7_ratio(mask: DomainMask, eps: float, check: bool = True) -> float:
    """Heat content at time ``eps`` over ``sqrt(eps)`` times the boundary length.

    For a smooth domain and small ``eps`` this tends to ``2 / sqrt(pi)``,
    the half-space value of the profile ``erfc(x / (2 sqrt(t)))``.
    """
    return lemma7_ratios(mask, [eps], check=check)[float(eps)]


@dataclass(frozen=True)
class Extrapolated:
    value: float
    fine: float
    coarse: float
    resolution: int


def lemma7_ratio_extrapolated(factory, resolution: int, eps_values) -> dict[float, Extrapolated]:
    """Richardson extrapolation ``2 r(N) - r(N/2)`` of the ratio.

    ``factory(N)`` builds the mask at resolution ``N``; the grid error of the
    Dirichlet layer is first order in ``h``.
    """
    fine = lemma7_ratios(factory(resolution), eps_values)
    coarse = lemma7_ratios(factory(resolution // 2), eps_values, check=False)
    return {e: Extrapolated(2 * fine[e] - coarse[e], fine[e], coarse[e], resolution) for e in fine}


# --------------------------------------------------------------------------
# half heating


def coarsen(mask: DomainMask) -> DomainMask:
    """Mask on a grid twice as coarse; a coarse cell is interior if all four children are."""
    inner = mask.interior
    nx, ny = (s // 2 * 2 for s in inner.shape)
    blocks = inner[:nx, :ny].reshape(nx // 2, 2, ny // 2, 2).all(axis=(1, 3))
    (x0, _), (y0, _) = mask.box
    hx, hy = mask.spacing
    box = ((x0, x0 + nx * hx), (y0, y0 + ny * hy))
    return DomainMask.from_interior(blocks, box, pad=True, sdf=mask.sdf, perimeter=mask.perimeter, label=mask.label)


@dataclass(frozen=True)
class HalfHeatingReport:
    passed: bool
    time: float
    min_temp: float
    tolerance: float
    oscillation: float
    c: float
    witness: tuple[float, float]

    def to_dict(self) -> dict:
        return {
            "pass": self.passed,
            "time": self.time,
            "min_temp": self.min_temp,
            "tolerance": self.tolerance,
            "oscillation": self.oscillation,
            "c": self.c,
            "witness": list(self.witness),
        }


def half_heating_check(mask: DomainMask, f: AnalyticTestFunction, eps: float, c: float | None = None) -> HalfHeatingReport:
    """Check that every interior cell reaches temperature 1/2 by ``(8c + 8) eps``.

    Requires ``1 <= lap f <= c`` and ``max f - min f <= 4 (c + 1) eps`` on
    the interior cells; a violated precondition raises
    :class:`HypothesisError` naming a witnessing cell.  The tolerance is
    twice the change in minimum temperature under one grid coarsening.
    """
    pts = mask.points()[mask.interior]
    lap = f.laplacian(pts)
    k = int(np.argmin(lap))
    if lap[k] < 1 - 1e-12:
        raise HypothesisError(f"laplacian {lap[k]:.4g} < 1 at cell {tuple(float(v) for v in pts[k])}")
    c = float(lap.max()) if c is None else float(c)
    if lap.max() > c + 1e-12:
        k = int(np.argmax(lap))
        raise HypothesisError(f"laplacian {lap[k]:.4g} > c = {c:g} at cell {tuple(float(v) for v in pts[k])}")
    vals = f.value(pts)
    lo, hi = int(np.argmin(vals)), int(np.argmax(vals))
    osc = float(vals[hi] - vals[lo])
    if osc > 4 * (c + 1) * eps:
        raise HypothesisError(
            f"oscillation {osc:.4g} exceeds 4(c+1)eps = {4 * (c + 1) * eps:.4g}: "
            f"min at cell {tuple(float(v) for v in pts[lo])}, max at cell {tuple(float(v) for v in pts[hi])}"
        )
    t = (8 * c + 8) * eps
    fine = evolve(HeatState.cold(mask), t)
    try:
        coarse_min = evolve(HeatState.cold(coarsen(mask)), t).min_temp
        tol = 2 * abs(fine.min_temp - coarse_min)
    except (ValueError, IndexError):
        # the coarse grid lost every interior cell
        tol = 0.0
    k = int(np.argmin(fine.interior_temps))
    return HalfHeatingReport(
        passed=fine.min_temp >= 0.5 - tol,
        time=t,
        min_temp=fine.min_temp,
        tolerance=tol,
        oscillation=osc,
        c=c,
        witness=tuple(float(v) for v in pts[k]),
    )

