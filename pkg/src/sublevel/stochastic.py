"""Brownian motion on masked domains.

Walks use the generator-Delta convention: each coordinate increment over a
step ``dt`` is Gaussian with variance ``2*dt``.  Under this convention the
expected exit time ``m(x) = E tau_x`` solves ``Delta m = -1`` with zero
boundary values, so on a ball of radius ``r`` in ``R^n`` the exit time from
the centre is ``r**2 / (2n)``.

Random numbers come from Philox streams keyed by ``(seed, chunk index)``
with a fixed chunk size, so every estimate is a pure function of its
inputs and seed, whatever the number of worker threads.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np
from scipy.special import erfc

from .field import AnalyticTestFunction
from .geometry import DomainMask, distance_features

GENERATOR_CONVENTION = "increments with per-coordinate variance 2*dt"


@dataclass(frozen=True)
class WalkConfig:
    dt: float = 1e-3
    max_time: float = 10.0
    n_paths: int = 10_000
    seed: int = 0
    chunk_size: int = 1 << 16
    bridge: bool = True
    workers: int = 1
    generator_convention: str = field(default=GENERATOR_CONVENTION, init=False)

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if not self.max_time > 0:
            raise ValueError(f"max_time must be positive, got {self.max_time}")
        if self.n_paths < 1:
            raise ValueError("n_paths must be >= 1")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")

    def replace(self, **kw) -> "WalkConfig":
        d = {k: v for k, v in asdict(self).items() if k != "generator_convention"}
        d.update(kw)
        return WalkConfig(**d)


# --------------------------------------------------------------------------
# analytic domains (any dimension)


@dataclass(frozen=True)
class Ball:
    center: tuple[float, ...]
    radius: float

    @property
    def dim(self) -> int:
        return len(self.center)

    def sdf(self, p) -> np.ndarray:
        return self.radius - np.linalg.norm(np.asarray(p, float) - np.asarray(self.center), axis=-1)

    def contains(self, p) -> np.ndarray:
        return self.sdf(p) > 0

    def distance_to_boundary(self, p) -> np.ndarray:
        return np.abs(self.sdf(p))


@dataclass(frozen=True)
class Cube:
    lo: tuple[float, ...]
    hi: tuple[float, ...]

    @property
    def dim(self) -> int:
        return len(self.lo)

    def sdf(self, p) -> np.ndarray:
        p = np.asarray(p, float)
        return np.minimum(p - np.asarray(self.lo), np.asarray(self.hi) - p).min(axis=-1)

    def contains(self, p) -> np.ndarray:
        return self.sdf(p) > 0

    def distance_to_boundary(self, p) -> np.ndarray:
        return np.abs(self.sdf(p))


def _check_domain(domain, cfg: WalkConfig):
    if isinstance(domain, DomainMask) and domain.sdf is None:
        h = min(domain.spacing)
        if cfg.dt > h * h / 4 * (1 + 1e-12):
            raise ValueError(f"dt={cfg.dt:g} exceeds (min spacing)^2/4 = {h * h / 4:g} for a grid mask")


# --------------------------------------------------------------------------
# core simulation


@dataclass
class _LevelPaths:
    tau: np.ndarray
    stop: np.ndarray
    integral: np.ndarray
    truncated: np.ndarray


def _philox(seed: int, chunk: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=(int(chunk) << 64) | int(seed)))


def _simulate_chunk(domain, starts, cfg: WalkConfig, chunk: int, levels: int, integrand):
    rng = _philox(cfg.seed, chunk)
    m, d = starts.shape
    dt_fine = cfg.dt / 2 ** (levels - 1)
    ratio = [2 ** (levels - 1 - lv) for lv in range(levels)]
    pos = [starts.copy() for _ in range(levels)]
    acc = [np.zeros_like(starts) for _ in range(levels)]
    alive = [np.ones(m, bool) for _ in range(levels)]
    nsteps = [np.zeros(m, np.int64) for _ in range(levels)]
    integ = [np.zeros(m) for _ in range(levels)]
    trunc = [np.zeros(m, bool) for _ in range(levels)]
    max_steps = [int(math.ceil(cfg.max_time / (dt_fine * r) - 1e-9)) for r in ratio]
    # one uniform per coarse step drives every level's bridge tests: each
    # level consumes it sequentially, W -> (W - p) / (1 - p) after a
    # non-crossing, which keeps every level's law exact and the levels coupled
    bridge_u = [np.zeros(m) for _ in range(levels)]
    idx = np.arange(m)
    k = 0
    scale = math.sqrt(2.0 * dt_fine)
    while idx.size:
        k += 1
        xi = rng.standard_normal((idx.size, d)) * scale
        if cfg.bridge and (k - 1) % ratio[0] == 0:
            v = rng.random(idx.size)
            for lv in range(levels):
                bridge_u[lv][idx] = v
        for lv in range(levels):
            acc[lv][idx] += xi
            if k % ratio[lv]:
                continue
            dt = dt_fine * ratio[lv]
            sel = idx[alive[lv][idx]]
            x0 = pos[lv][sel]
            x1 = x0 + acc[lv][sel]
            acc[lv][idx] = 0.0
            if integrand is not None:
                integ[lv][sel] += integrand(x0) * dt
            hit = ~domain.contains(x1)
            if cfg.bridge:
                ins = np.flatnonzero(~hit)
                d0 = domain.distance_to_boundary(x0[ins])
                d1 = domain.distance_to_boundary(x1[ins])
                p = np.exp(-d0 * d1 / dt)
                w = bridge_u[lv][sel[ins]]
                crossed = w < p
                hit[ins] = crossed
                with np.errstate(divide="ignore", invalid="ignore"):
                    bridge_u[lv][sel[ins]] = np.where(crossed, w, (w - p) / (1.0 - p))
            nsteps[lv][sel] += 1
            pos[lv][sel] = x1
            alive[lv][sel[hit]] = False
            late = sel[~hit][nsteps[lv][sel[~hit]] >= max_steps[lv]]
            alive[lv][late] = False
            trunc[lv][late] = True
        keep = np.zeros(idx.size, bool)
        for lv in range(levels):
            keep |= alive[lv][idx]
        idx = idx[keep]
    return [
        _LevelPaths(nsteps[lv] * dt_fine * ratio[lv], pos[lv], integ[lv], trunc[lv])
        for lv in range(levels)
    ]


def _simulate(domain, starts, cfg: WalkConfig, levels: int = 1, integrand=None) -> list[_LevelPaths]:
    """Run ``cfg.n_paths`` walks from every start point; results ordered by start."""
    starts = np.atleast_2d(np.asarray(starts, dtype=float))
    if starts.shape[1] != domain.dim:
        raise ValueError(f"start points have dimension {starts.shape[1]}, domain {domain.dim}")
    if not np.all(domain.contains(starts)):
        bad = starts[~domain.contains(starts)][0]
        raise ValueError(f"start point {bad.tolist()} is not interior to the domain")
    _check_domain(domain, cfg)
    flat = np.repeat(starts, cfg.n_paths, axis=0)
    bounds = list(range(0, len(flat), cfg.chunk_size)) + [len(flat)]
    jobs = [(c, flat[a:b]) for c, (a, b) in enumerate(zip(bounds[:-1], bounds[1:]))]

    def run(job):
        c, s = job
        return _simulate_chunk(domain, s, cfg, c, levels, integrand)

    if cfg.workers > 1:
        with ThreadPoolExecutor(cfg.workers) as pool:
            parts = list(pool.map(run, jobs))
    else:
        parts = [run(j) for j in jobs]
    return [
        _LevelPaths(*(np.concatenate([getattr(p[lv], f) for p in parts]) for f in ("tau", "stop", "integral", "truncated")))
        for lv in range(levels)
    ]


# --------------------------------------------------------------------------
# exit times


@dataclass(frozen=True)
class ExitTimeEstimate:
    mean: float
    stderr: float
    absorbed_fraction: float
    n_paths: int
    x0: tuple[float, ...] = ()
    dt: float = 0.0
    seed: int = 0

    @property
    def lower_bound(self) -> bool:
        """True when some paths hit ``max_time``; the mean then underestimates."""
        return self.absorbed_fraction < 1.0

    def to_row(self) -> dict:
        return {
            "x0": list(self.x0),
            "mean": self.mean,
            "stderr": self.stderr,
            "absorbed_fraction": self.absorbed_fraction,
            "dt": self.dt,
            "n_paths": self.n_paths,
            "seed": self.seed,
        }


def _estimate(tau, trunc, x0, dt, seed) -> ExitTimeEstimate:
    n = tau.size
    sd = float(tau.std(ddof=1)) if n > 1 else 0.0
    return ExitTimeEstimate(
        mean=float(tau.mean()),
        stderr=sd / math.sqrt(n),
        absorbed_fraction=float(1.0 - trunc.mean()),
        n_paths=n,
        x0=tuple(float(v) for v in np.atleast_1d(x0)),
        dt=dt,
        seed=seed,
    )


def exit_times(mask, x0, cfg: WalkConfig) -> ExitTimeEstimate:
    """Monte Carlo estimate of ``E tau_x0`` for the walk absorbed at the boundary."""
    return exit_times_many(mask, [x0], cfg)[0]


def exit_times_many(mask, points, cfg: WalkConfig) -> list[ExitTimeEstimate]:
    pts = np.atleast_2d(np.asarray(points, float))
    (lp,) = _simulate(mask, pts, cfg)
    n = cfg.n_paths
    return [_estimate(lp.tau[i * n:(i + 1) * n], lp.truncated[i * n:(i + 1) * n], p, cfg.dt, cfg.seed) for i, p in enumerate(pts)]


def exit_times_to_json(estimates: Sequence[ExitTimeEstimate]) -> str:
    return json.dumps([e.to_row() for e in estimates], sort_keys=True)


@dataclass(frozen=True)
class Refinement:
    """Coupled estimates at ``dt, dt/2, dt/4, ...`` driven by one Brownian path per walk."""

    estimates: list[ExitTimeEstimate]
    differences: list[float]

    @property
    def finest(self) -> ExitTimeEstimate:
        return self.estimates[-1]

    @property
    def bias(self) -> float:
        """Bias of the finest estimate, taken as its gap to the next-coarser level."""
        return abs(self.differences[-1])

    @property
    def pairwise_shrink(self) -> list[float]:
        """Ratios of successive level differences (2 for first-order bias)."""
        d = np.abs(self.differences)
        return list(d[:-1] / d[1:])

    @property
    def shrink(self) -> float:
        """Per-halving shrink factor from a log-linear fit over all level differences.

        With two differences this is the plain ratio.
        """
        d = np.abs(np.asarray(self.differences))
        if np.any(d == 0):
            return float("nan")
        slope = np.polyfit(np.arange(d.size), np.log(d), 1)[0]
        return float(np.exp(-slope))


def exit_time_refinement(mask, x0, cfg: WalkConfig, levels: int = 4) -> Refinement:
    """Exit-time means at ``cfg.dt / 2**l`` for ``l < levels`` on shared paths.

    Coupling makes the level differences far less noisy than independent
    runs would, so the shrink of the time-step bias is measurable at
    ``1e5`` paths.
    """
    if levels < 2:
        raise ValueError("need at least two levels")
    runs = _simulate(mask, np.atleast_2d(x0), cfg, levels=levels)
    ests = [_estimate(r.tau, r.truncated, x0, cfg.dt / 2**lv, cfg.seed) for lv, r in enumerate(runs)]
    diffs = [float(np.mean(runs[lv].tau - runs[lv + 1].tau)) for lv in range(levels - 1)]
    return Refinement(ests, diffs)


def hitting_probability(mask, x0, t: float, cfg: WalkConfig) -> tuple[float, float]:
    """``P(tau_x0 <= t)`` and its standard error."""
    est = exit_times(mask, x0, cfg.replace(max_time=t))
    p = est.absorbed_fraction
    return p, math.sqrt(max(p * (1 - p), 0.0) / est.n_paths)


def hitting_probabilities(mask, points, t: float, cfg: WalkConfig) -> np.ndarray:
    return np.array([e.absorbed_fraction for e in exit_times_many(mask, points, cfg.replace(max_time=t))])


# --------------------------------------------------------------------------
# Feynman-Kac


@dataclass(frozen=True)
class FeynmanKacEstimate:
    estimate: float
    stderr: float
    boundary_term: float
    integral_term: float
    target: float
    bias: float
    biased: bool
    coarse_estimate: float

    @property
    def error(self) -> float:
        return abs(self.estimate - self.target)

    def within(self, k: float = 3.0) -> bool:
        return self.error <= k * self.stderr + self.bias


def feynman_kac(f: AnalyticTestFunction, mask, x0, cfg: WalkConfig) -> FeynmanKacEstimate:
    """Estimate ``E f(w(tau)) - E int_0^tau (Lap f)(w(s)) ds`` from ``x0``.

    The boundary term evaluates ``f`` where each walk stopped and the time
    integral is a left-point sum along the walk.  A coupled run at twice
    the step gives the bias estimate (``|fine - coarse|``).  Walks still
    alive at ``max_time`` mark the estimate as biased.
    """
    coarse, fine = _simulate(mask, np.atleast_2d(x0), cfg.replace(dt=2 * cfg.dt), levels=2, integrand=f.laplacian)
    y_fine = f.value(fine.stop) - fine.integral
    y_coarse = f.value(coarse.stop) - coarse.integral
    n = y_fine.size
    est = float(y_fine.mean())
    return FeynmanKacEstimate(
        estimate=est,
        stderr=float(y_fine.std(ddof=1) / math.sqrt(n)) if n > 1 else 0.0,
        boundary_term=float(f.value(fine.stop).mean()),
        integral_term=float(fine.integral.mean()),
        target=float(f.value(np.asarray(x0, float))),
        bias=abs(est - float(y_coarse.mean())),
        biased=bool(fine.truncated.any()),
        coarse_estimate=float(y_coarse.mean()),
    )


# --------------------------------------------------------------------------
# inradius bound


@dataclass(frozen=True)
class ExitTimeBound:
    sup_estimate: float
    sup_stderr: float
    inradius: float
    inrad_bound: float
    probes: list[ExitTimeEstimate]

    @property
    def ok(self) -> bool:
        return self.sup_estimate <= self.inrad_bound + 3 * self.sup_stderr


def max_exit_time_bound(mask: DomainMask, cfg: WalkConfig, probe_points=None) -> ExitTimeBound:
    """Compare the largest probed exit time with ``4 * inradius**2``.

    Without explicit probes the deepest interior point is used.
    """
    feats = distance_features(mask)
    if probe_points is None:
        probe_points = [feats.inradius_point]
    ests = exit_times_many(mask, probe_points, cfg)
    top = max(ests, key=lambda e: e.mean)
    return ExitTimeBound(top.mean, top.stderr, feats.inradius, 4 * feats.inradius**2, ests)


# --------------------------------------------------------------------------
# reflection principle (standard Brownian motion, variance t)


def reflection_tail(d: float, t: float) -> float:
    """``P(max_{s<=t} B(s) >= d) = 2 P(B(t) >= d)`` for standard Brownian motion."""
    if d < 0:
        raise ValueError("distance must be nonnegative")
    if t <= 0:
        raise ValueError("time must be positive")
    return float(erfc(d / math.sqrt(2.0 * t)))


def reflection_tail_mc(d: float, t: float, n_paths: int = 1_000_000, seed: int = 0, n_steps: int = 8, chunk_size: int = 1 << 18):
    """Monte Carlo ``P(max_{s<=t} B(s) >= d)`` with exact per-step bridge maxima.

    Returns the estimate and its binomial standard error.
    """
    delta = t / n_steps
    hits = 0
    for c, a in enumerate(range(0, n_paths, chunk_size)):
        m = min(chunk_size, n_paths - a)
        rng = _philox(seed, c)
        b = np.zeros(m)
        top = np.zeros(m)
        for _ in range(n_steps):
            nb = b + rng.standard_normal(m) * math.sqrt(delta)
            u = rng.random(m)
            bridge_max = 0.5 * (b + nb + np.sqrt((nb - b) ** 2 - 2 * delta * np.log1p(-u)))
            top = np.maximum(top, bridge_max)
            b = nb
        hits += int(np.count_nonzero(top >= d))
    p = hits / n_paths
    return p, math.sqrt(p * (1 - p) / n_paths)
