"""Executable version of the level-set argument for ``1 <= lap u <= c``.

The stages are: pick two short level curves by pigeonholing the coarea
integral, split the region between them into components, classify the
components below the lower level by boundary length, and check the
depth, exit-time and heat-content bounds on the assembled domain.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from ..field import AnalyticTestFunction, GridField, grid_points, sample
from ..geometry import DomainMask, decompose, level_length
from ..heat import HypothesisError, half_heating_check, lemma7_ratio
from ..stochastic import WalkConfig, exit_times_many

UNIT_SQUARE = ((0.0, 1.0), (0.0, 1.0))


# --------------------------------------------------------------------------
# weighted gradient integral


@dataclass(frozen=True)
class GradientIntegral:
    value: float
    truncation_estimate: float
    excluded_area: float
    resolution: int

    @property
    def divergence_suspected(self) -> bool:
        return self.truncation_estimate > 0.1 * self.value

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "truncation_estimate": self.truncation_estimate,
            "excluded_area": self.excluded_area,
            "divergence_suspected": self.divergence_suspected,
            "resolution": self.resolution,
        }


def _integrand(f: AnalyticTestFunction, pts: np.ndarray, alpha: float):
    v = f.value(pts)
    g = np.linalg.norm(f.gradient(pts), axis=-1)
    with np.errstate(divide="ignore", invalid="ignore"):
        w = np.where(g == 0, 0.0, g / np.abs(v) ** alpha)
    return v, w


def gradient_integral(
    f: AnalyticTestFunction, alpha: float, box=UNIT_SQUARE, resolution: int = 512, sub: int = 8
) -> GradientIntegral:
    """Midpoint rule for ``int |grad f| / |f|**alpha`` over ``box``.

    Cells with ``|f| < h`` are split into ``sub x sub`` children.  Children
    with ``|f| < h**2`` are left out; their area times the largest
    integrand value seen among them is returned as the truncation
    estimate.
    """
    if alpha <= 0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    res = (resolution, resolution)
    pts = grid_points(box, res)
    hx, hy = ((hi - lo) / n for (lo, hi), n in zip(box, res))
    h = max(hx, hy)
    v, w = _integrand(f, pts, alpha)
    near = np.abs(v) < h
    total = float(w[~near].sum() * hx * hy)

    # children of the near-zero cells, in fixed order
    centres = pts[near]
    offs = (np.arange(sub) + 0.5) / sub - 0.5
    ox, oy = np.meshgrid(offs * hx, offs * hy, indexing="ij")
    kids = (centres[:, None, :] + np.stack([ox.ravel(), oy.ravel()], axis=1)[None]).reshape(-1, 2)
    vk, wk = _integrand(f, kids, alpha)
    dA = hx * hy / sub**2
    cut = np.abs(vk) < h * h
    total += float(wk[~cut].sum() * dA)
    excluded = float(cut.sum() * dA)
    trunc = 0.0
    if cut.any():
        finite = wk[cut][np.isfinite(wk[cut])]
        peak = finite.max() if finite.size else (wk[~cut].max() if (~cut).any() else 0.0)
        trunc = excluded * float(peak)
    return GradientIntegral(total, trunc, excluded, resolution)


@dataclass(frozen=True)
class RefinementCheck:
    coarse: GradientIntegral
    fine: GradientIntegral

    @property
    def change(self) -> float:
        return abs(self.fine.value - self.coarse.value) / max(abs(self.coarse.value), 1e-300)

    @property
    def stable(self) -> bool:
        return self.change < 0.02


def gradient_integral_refinement(f, alpha, box=UNIT_SQUARE, resolution: int = 512) -> RefinementCheck:
    return RefinementCheck(
        gradient_integral(f, alpha, box, resolution), gradient_integral(f, alpha, box, 2 * resolution)
    )


# --------------------------------------------------------------------------
# pigeonholed levels


@dataclass(frozen=True)
class PigeonholeLevels:
    t1: float
    t2: float
    length1: float
    length2: float
    bound: float
    lower_band: list[tuple[float, float]]
    upper_band: list[tuple[float, float]]
    tolerance: float

    @property
    def ok(self) -> bool:
        return max(self.length1, self.length2) <= self.bound * (1 + self.tolerance)


def scan_levels(eps: float, n_scan: int, sign: int) -> np.ndarray:
    # eps * (1 + k / n_scan), k = 1..n_scan-1; doubling n_scan gives a superset
    k = np.arange(1, n_scan)
    return sign * eps * (1 + k / n_scan)


def pigeonhole_levels(
    f: AnalyticTestFunction,
    eps: float,
    n_scan: int = 16,
    alpha: float = 1.0,
    box=UNIT_SQUARE,
    resolution: int = 512,
    integral: float | None = None,
    g: GridField | None = None,
) -> PigeonholeLevels:
    """Shortest level curves in ``(-2 eps, -eps)`` and ``(eps, 2 eps)``.

    Each band is scanned at ``n_scan - 1`` equally spaced interior levels.
    Both minimal lengths are compared with ``(2 eps)**(alpha - 1)`` times
    the weighted gradient integral, allowing 2% for discretisation.  A
    band with no crossing yields length 0.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    if n_scan < 8:
        raise ValueError(f"n_scan must be >= 8, got {n_scan}")
    if g is None:
        g = sample(f, box, resolution)
    if integral is None:
        integral = gradient_integral(f, alpha, box, resolution).value
    bound = (2 * eps) ** (alpha - 1) * integral
    upper = [(float(t), level_length(g, float(t))) for t in scan_levels(eps, n_scan, +1)]
    lower = [(float(t), level_length(g, float(t))) for t in scan_levels(eps, n_scan, -1)]
    t2, l2 = min(upper, key=lambda p: (p[1], p[0]))
    t1, l1 = min(lower, key=lambda p: (p[1], -p[0]))
    return PigeonholeLevels(t1, t2, l1, l2, bound, lower, upper, 0.02)


# --------------------------------------------------------------------------
# components and the assembled domain


@dataclass(frozen=True)
class SmallComponent:
    length: float
    min_v: float
    depth_bound: float
    touches_edge: bool
    passed: bool


@dataclass
class PipelineResult:
    eps: float
    c: float
    levels: PigeonholeLevels
    resolution: int
    n_regions: int
    n_small: int
    n_large: int
    small: list[SmallComponent]
    omega_cells: int
    v_range: tuple[float, float]
    exit_sup: float | None = None
    exit_sup_stderr: float | None = None
    exit_bound: float | None = None
    lemma7: float | None = None
    lemma7_fine: float | None = None
    lemma7_coarse: float | None = None
    half_heating: dict | None = None
    notes: list[str] = field(default_factory=list)

    @property
    def lemma5_ok(self) -> bool:
        return all(s.passed for s in self.small if not s.touches_edge)

    @property
    def lemma6_ok(self) -> bool:
        if self.exit_sup is None:
            return True
        return self.exit_sup <= self.exit_bound + 3 * self.exit_sup_stderr

    def to_dict(self) -> dict:
        return {
            "eps": self.eps,
            "c": self.c,
            "t1": self.levels.t1,
            "t2": self.levels.t2,
            "length1": self.levels.length1,
            "length2": self.levels.length2,
            "step1_bound": self.levels.bound,
            "resolution": self.resolution,
            "regions": self.n_regions,
            "small": self.n_small,
            "large": self.n_large,
            "lemma5_ok": self.lemma5_ok,
            "omega_cells": self.omega_cells,
            "v_range": list(self.v_range),
            "exit_sup": self.exit_sup,
            "exit_sup_stderr": self.exit_sup_stderr,
            "exit_bound": self.exit_bound,
            "lemma6_ok": self.lemma6_ok,
            "lemma7": self.lemma7,
            "lemma7_fine": self.lemma7_fine,
            "lemma7_coarse": self.lemma7_coarse,
            "half_heating": self.half_heating,
            "notes": list(self.notes),
        }


def pipeline_resolution(eps: float, box=UNIT_SQUARE, cells_per_root: float = 8.0, lo: int = 128, hi: int = 1024) -> int:
    """Grid fine enough to put ``cells_per_root`` cells across ``sqrt(eps)``."""
    side = max(b - a for a, b in box)
    n = int(math.ceil(cells_per_root * side / math.sqrt(eps)))
    n += n % 2
    return int(min(max(n, lo), hi))


def _edge_contact(comp: np.ndarray, spacing) -> float:
    hx, hy = spacing
    return float(comp[0].sum() * hy + comp[-1].sum() * hy + comp[:, 0].sum() * hx + comp[:, -1].sum() * hx)


def _classify(gv: GridField, t_top: float, sqrt_eps: float, c: float, eps: float, tol: float):
    """Regions ``A``, and within them the components of ``{v <= 0}`` split by length."""
    regions = decompose(gv, t_top)
    low = decompose(gv, 0.0)
    h = max(gv.spacing)
    keep = regions.labels > 0
    small, large_cells = [], np.zeros_like(keep)
    for k, comp in enumerate(low.components, start=1):
        cells = low.labels == k
        touches = comp.touches_outer_boundary
        length = comp.boundary_length + (_edge_contact(cells, gv.spacing) if touches else 0.0)
        # ties within one cell width count as large
        if length < sqrt_eps - h:
            bound = -4 * c * min(eps, length**2)
            small.append(SmallComponent(length, comp.min_value, bound, touches, comp.min_value >= bound - tol))
        else:
            large_cells |= cells
    omega = keep & ~large_cells
    return regions, small, omega, len(low.components) - len(small)


def omega_mask(f: AnalyticTestFunction, t1: float, t2: float, eps: float, c: float, box, resolution: int):
    """The assembled domain at ``resolution``: regions minus their large low components."""
    g = sample(f, box, resolution)
    gv = g.with_samples(g.samples - t1)
    tol = 2 * max(gv.spacing) * _max_grad(f, g)
    regions, small, omega, n_large = _classify(gv, t2 - t1, math.sqrt(eps), c, eps, tol)
    mask = DomainMask.from_interior(omega, box, pad=True, label=f"omega(eps={eps:g})") if omega.any() else None
    return gv, regions, small, omega, n_large, mask


def _max_grad(f, g: GridField) -> float:
    return float(np.linalg.norm(f.gradient(g.points()), axis=-1).max())


def run_pipeline(
    f: AnalyticTestFunction,
    eps: float,
    c: float,
    alpha: float = 1.0,
    integral: float | None = None,
    box=UNIT_SQUARE,
    resolution: int | None = None,
    cfg: WalkConfig | None = None,
    n_probes: int = 4,
    n_scan: int = 16,
) -> PipelineResult:
    """Run every stage of the argument at one ``eps``.

    The exit-time probes are the deepest cells of the assembled domain,
    taken from distinct components where possible.  The heat-content ratio
    is Richardson-extrapolated from this resolution and half of it.
    """
    N = resolution or pipeline_resolution(eps, box)
    g = sample(f, box, N)
    lv = pigeonhole_levels(f, eps, n_scan, alpha, box, N, integral=integral, g=g)
    gv, regions, small, omega, n_large, mask = omega_mask(f, lv.t1, lv.t2, eps, c, box, N)
    v_in = gv.samples[omega]
    res = PipelineResult(
        eps=eps,
        c=c,
        levels=lv,
        resolution=N,
        n_regions=len(regions.components),
        n_small=len(small),
        n_large=n_large,
        small=small,
        omega_cells=int(omega.sum()),
        v_range=(float(v_in.min()), float(v_in.max())) if v_in.size else (0.0, 0.0),
    )
    if mask is None:
        res.notes.append("assembled domain is empty")
        return res

    # exit times on the assembled domain
    cfg = cfg or WalkConfig(n_paths=2000)
    h = min(mask.spacing)
    cfg = cfg.replace(dt=min(cfg.dt, 0.25 * h * h), max_time=max(cfg.max_time, 100 * eps))
    probes = _deepest_points(mask, n_probes)
    ests = exit_times_many(mask, probes, cfg)
    top = max(ests, key=lambda e: e.mean)
    res.exit_sup, res.exit_sup_stderr = top.mean, top.stderr
    res.exit_bound = (4 * c + 4) * eps

    vf = f.shifted(-lv.t1)
    try:
        rep = half_heating_check(mask, vf, eps, c=c)
        res.half_heating = rep.to_dict()
    except HypothesisError as exc:
        res.notes.append(f"half heating precondition: {exc}")

    try:
        fine = lemma7_ratio(mask, eps)
        coarse_mask = omega_mask(f, lv.t1, lv.t2, eps, c, box, N // 2)[-1]
        coarse = lemma7_ratio(coarse_mask, eps, check=False) if coarse_mask is not None else fine
        res.lemma7_fine, res.lemma7_coarse = fine, coarse
        res.lemma7 = 2 * fine - coarse
    except HypothesisError as exc:
        res.notes.append(f"heat-content hypothesis: {exc}")
    return res



def _deepest_points(mask: DomainMask, k: int) -> list[tuple[float, float]]:
    inner = mask.interior
    d = ndimage.distance_transform_edt(inner, sampling=mask.spacing)
    labels, n = ndimage.label(inner)
    pts = mask.points()
    # deepest cell per component, components ordered by depth
    idx = ndimage.maximum_position(d, labels, index=np.arange(1, n + 1))
    depth = np.array([d[i] for i in idx])
    order = np.argsort(-depth, kind="stable")[:k]
    return [tuple(float(v) for v in pts[idx[i]]) for i in order]
