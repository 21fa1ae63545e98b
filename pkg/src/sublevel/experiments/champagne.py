"""Champagne domains: a disk with many small disjoint disks removed."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..field import grid_points
from ..geometry import DomainMask, _padded_box


class PlacementError(RuntimeError):
    def __init__(self, achieved: int, requested: int):
        super().__init__(f"placed only {achieved} of {requested} bubbles before hitting the retry cap")
        self.achieved = achieved
        self.requested = requested


@dataclass(frozen=True)
class ChampagneSpec:
    """Outer disk of ``outer_radius`` at the origin minus ``bubbles`` disks.

    ``radius_law`` is ``"uniform"`` (every bubble has ``r_b``) or
    ``"power"`` (radii in ``[r_min, r_b]`` with density proportional to
    ``r**-power``).  Bubbles keep ``min_separation`` from each other and
    from the outer circle.
    """

    outer_radius: float = 1.0
    bubbles: int = 50
    r_b: float = 0.02
    radius_law: str = "uniform"
    r_min: float = 0.01
    power: float = 2.0
    seed: int = 0
    min_separation: float = 0.01
    retry_cap: int = 10_000

    def __post_init__(self):
        if self.outer_radius <= 0 or self.r_b <= 0:
            raise ValueError("radii must be positive")
        if self.bubbles < 0:
            raise ValueError("bubble count must be >= 0")
        if self.radius_law not in ("uniform", "power"):
            raise ValueError(f"unknown radius law {self.radius_law!r}")
        if self.radius_law == "power" and not 0 < self.r_min <= self.r_b:
            raise ValueError("power law needs 0 < r_min <= r_b")

    def _radius(self, rng: np.random.Generator) -> float:
        if self.radius_law == "uniform":
            return self.r_b
        # inverse transform for density ~ r**-power on [r_min, r_b]
        u = rng.random()
        a, b, p = self.r_min, self.r_b, self.power
        if abs(p - 1) < 1e-12:
            return a * (b / a) ** u
        e = 1 - p
        return (a**e + u * (b**e - a**e)) ** (1 / e)

    def place(self) -> tuple[np.ndarray, np.ndarray]:
        """Bubble centres and radii by sequential rejection sampling.

        The first ``k`` bubbles do not depend on the requested count, so
        specs differing only in ``bubbles`` give nested domains.
        """
        rng = np.random.Generator(np.random.Philox(key=self.seed))
        centres, radii = [], []
        R, sep = self.outer_radius, self.min_separation
        for _ in range(self.bubbles):
            r = self._radius(rng)
            reach = R - r - sep
            if reach <= 0:
                raise PlacementError(len(radii), self.bubbles)
            for _attempt in range(self.retry_cap):
                # uniform point in the disk of radius `reach`
                rho = reach * math.sqrt(rng.random())
                phi = 2 * math.pi * rng.random()
                c = np.array([rho * math.cos(phi), rho * math.sin(phi)])
                if not centres or np.all(
                    np.linalg.norm(np.asarray(centres) - c, axis=1) >= np.asarray(radii) + r + sep
                ):
                    centres.append(c)
                    radii.append(r)
                    break
            else:
                raise PlacementError(len(radii), self.bubbles)
        return np.asarray(centres).reshape(-1, 2), np.asarray(radii)


def champagne_sdf(R: float, centres: np.ndarray, radii: np.ndarray):
    """Signed distance to the champagne boundary, positive inside."""

    def sdf(p):
        p = np.asarray(p, dtype=float)
        d = R - np.linalg.norm(p, axis=-1)
        if len(radii):
            flat = p.reshape(-1, 2)
            # chunk over points to keep the (points x bubbles) block small
            out = np.empty(len(flat))
            step = max(1, 4_000_000 // len(radii))
            for s in range(0, len(flat), step):
                q = flat[s : s + step]
                dist = np.sqrt(((q[:, None, :] - centres[None]) ** 2).sum(-1)) - radii
                out[s : s + step] = dist.min(axis=1)
            d = np.minimum(d, out.reshape(p.shape[:-1]))
        return d

    return sdf


def make_champagne(spec: ChampagneSpec, resolution: int = 512) -> DomainMask:
    """Rasterise a champagne domain; the mask keeps the exact signed distance and perimeter."""
    centres, radii = spec.place()
    R = spec.outer_radius
    box = _padded_box((-R, -R), (R, R), resolution)
    pts = grid_points(box, (resolution, resolution))
    inner = R - np.linalg.norm(pts, axis=-1) > 0
    (x0, _), (y0, _) = box
    h = (box[0][1] - box[0][0]) / resolution
    for c, r in zip(centres, radii):
        # only touch the cells under the bubble's bounding square
        i0, i1 = max(int((c[0] - r - x0) / h) - 1, 0), min(int((c[0] + r - x0) / h) + 2, resolution)
        j0, j1 = max(int((c[1] - r - y0) / h) - 1, 0), min(int((c[1] + r - y0) / h) + 2, resolution)
        patch = pts[i0:i1, j0:j1]
        inner[i0:i1, j0:j1] &= np.linalg.norm(patch - c, axis=-1) - r > 0
    return DomainMask.from_interior(
        inner,
        box,
        sdf=champagne_sdf(R, centres, radii),
        perimeter=float(2 * math.pi * (R + radii.sum())),
        label=f"champagne(n={spec.bubbles},r_b={spec.r_b:g},seed={spec.seed})",
    )
