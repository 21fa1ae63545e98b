"""Analytic test functions and grid sampling primitives.

Every catalog member carries exact evaluators for value, gradient,
Laplacian and (where meaningful) Hessian.  Evaluators are vectorised:
they accept an array of points with trailing dimension ``dim`` and return
arrays over the leading axes.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

Evaluator = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class AnalyticTestFunction:
    """A scalar function on R^n with exact derivative evaluators."""

    id: str
    dim: int
    value: Evaluator
    gradient: Evaluator
    laplacian: Evaluator
    hessian: Evaluator | None = None
    params: dict = field(default_factory=dict, compare=False)

    def __call__(self, points) -> np.ndarray:
        return self.value(_as_points(points, self.dim))

    def shifted(self, c: float) -> "AnalyticTestFunction":
        """Return ``f + c``; derivatives are unchanged."""
        value = self.value
        return AnalyticTestFunction(
            id=f"{self.id}{c:+g}",
            dim=self.dim,
            value=lambda x: value(x) + c,
            gradient=self.gradient,
            laplacian=self.laplacian,
            hessian=self.hessian,
            params={**self.params, "shift": c},
        )

    def scaled(self, s: float) -> "AnalyticTestFunction":
        """Return ``s * f``."""
        v, g, lap, hes = self.value, self.gradient, self.laplacian, self.hessian
        return AnalyticTestFunction(
            id=f"{s:g}*{self.id}",
            dim=self.dim,
            value=lambda x: s * v(x),
            gradient=lambda x: s * g(x),
            laplacian=lambda x: s * lap(x),
            hessian=None if hes is None else (lambda x: s * hes(x)),
            params={**self.params, "scale": s * self.params.get("scale", 1.0)},
        )


def _as_points(points, dim: int) -> np.ndarray:
    x = np.asarray(points, dtype=float)
    if x.ndim == 0 or x.shape[-1] != dim:
        if dim == 1 and (x.ndim == 0 or x.shape[-1] != 1):
            return x[..., None]
        raise ValueError(f"expected points with trailing dimension {dim}, got shape {x.shape}")
    return x


def _wrap(dim, fn):
    return lambda x: fn(_as_points(x, dim))


# --------------------------------------------------------------------------
# catalog


def monomial_1d(k: int) -> AnalyticTestFunction:
    """``x**k / k!`` on the real line."""
    k = int(k)
    if k < 1:
        raise ValueError(f"monomial degree must be >= 1, got {k}")

    def _power(x, p, fact):
        if p < 0:
            return np.zeros_like(x[..., 0])
        return x[..., 0] ** p / math.factorial(fact)

    return AnalyticTestFunction(
        id=f"monomial_1d:k={k}",
        dim=1,
        value=_wrap(1, lambda x: _power(x, k, k)),
        gradient=_wrap(1, lambda x: _power(x, k - 1, k - 1)[..., None]),
        laplacian=_wrap(1, lambda x: _power(x, k - 2, max(k - 2, 0))),
        hessian=_wrap(1, lambda x: _power(x, k - 2, max(k - 2, 0))[..., None, None]),
        params={"k": k},
    )


def quadratic(*a: float) -> AnalyticTestFunction:
    """``sum a_i x_i**2`` with all ``a_i > 0``."""
    if len(a) == 1 and np.ndim(a[0]) == 1:
        a = tuple(a[0])
    coef = np.asarray(a, dtype=float)
    if coef.size < 1:
        raise ValueError("quadratic needs at least one coefficient")
    if np.any(coef <= 0):
        raise ValueError(f"quadratic coefficients must be positive, got {coef.tolist()}")
    n = coef.size
    hess = np.diag(2.0 * coef)
    return AnalyticTestFunction(
        id="quadratic:a=" + ",".join(f"{c:g}" for c in coef),
        dim=n,
        value=_wrap(n, lambda x: np.sum(coef * x * x, axis=-1)),
        gradient=_wrap(n, lambda x: 2.0 * coef * x),
        laplacian=_wrap(n, lambda x: np.full(x.shape[:-1], 2.0 * coef.sum())),
        hessian=_wrap(n, lambda x: np.broadcast_to(hess, x.shape[:-1] + (n, n)).copy()),
        params={"a": coef.tolist()},
    )


def radial_extremal(n: int = 2) -> AnalyticTestFunction:
    """``|x|**2 / (2n)``: the function with Laplacian identically one."""
    n = int(n)
    if n < 1:
        raise ValueError(f"dimension must be >= 1, got {n}")
    eye = np.eye(n) / n
    return AnalyticTestFunction(
        id=f"radial_extremal:n={n}",
        dim=n,
        value=_wrap(n, lambda x: np.sum(x * x, axis=-1) / (2 * n)),
        gradient=_wrap(n, lambda x: x / n),
        laplacian=_wrap(n, lambda x: np.ones(x.shape[:-1])),
        hessian=_wrap(n, lambda x: np.broadcast_to(eye, x.shape[:-1] + (n, n)).copy()),
        params={"n": n},
    )


def eccentric(eps: float) -> AnalyticTestFunction:
    """``x1**2 + eps * x2**2``."""
    f = quadratic(1.0, eps)
    return AnalyticTestFunction(
        id=f"eccentric:eps={eps:g}",
        dim=2,
        value=f.value,
        gradient=f.gradient,
        laplacian=f.laplacian,
        hessian=f.hessian,
        params={"eps": float(eps)},
    )


def sum_sq() -> AnalyticTestFunction:
    f = quadratic(1.0, 1.0)
    return AnalyticTestFunction("sum_sq", 2, f.value, f.gradient, f.laplacian, f.hessian)


def skew() -> AnalyticTestFunction:
    """``x * y``; indefinite Hessian with determinant -1."""
    hess = np.array([[0.0, 1.0], [1.0, 0.0]])
    return AnalyticTestFunction(
        id="skew",
        dim=2,
        value=_wrap(2, lambda x: x[..., 0] * x[..., 1]),
        gradient=_wrap(2, lambda x: x[..., ::-1].copy()),
        laplacian=_wrap(2, lambda x: np.zeros(x.shape[:-1])),
        hessian=_wrap(2, lambda x: np.broadcast_to(hess, x.shape[:-1] + (2, 2)).copy()),
    )


def harmonic_probe(A: float, m: int) -> AnalyticTestFunction:
    """``(x**2 + y**2)/4 + A * Re((x + iy)**m)``.

    The harmonic term leaves the Laplacian at exactly one while adding
    oscillation of tunable amplitude and frequency.
    """
    m = int(m)
    if m < 0:
        raise ValueError(f"harmonic degree must be >= 0, got {m}")
    A = float(A)

    def z(x):
        return x[..., 0] + 1j * x[..., 1]

    def value(x):
        return 0.25 * np.sum(x * x, axis=-1) + A * np.real(z(x) ** m)

    def gradient(x):
        d = m * z(x) ** (m - 1) if m >= 1 else np.zeros(x.shape[:-1], complex)
        return 0.5 * x + A * np.stack([d.real, -d.imag], axis=-1)

    def hessian(x):
        d2 = m * (m - 1) * z(x) ** (m - 2) if m >= 2 else np.zeros(x.shape[:-1], complex)
        hxx, hxy = A * d2.real, -A * d2.imag
        out = np.empty(x.shape[:-1] + (2, 2))
        out[..., 0, 0] = 0.5 + hxx
        out[..., 1, 1] = 0.5 - hxx
        out[..., 0, 1] = out[..., 1, 0] = hxy
        return out

    return AnalyticTestFunction(
        id=f"harmonic_probe:A={A:g},m={m}",
        dim=2,
        value=_wrap(2, value),
        gradient=_wrap(2, gradient),
        laplacian=_wrap(2, lambda x: np.ones(x.shape[:-1])),
        hessian=_wrap(2, hessian),
        params={"A": A, "m": m},
    )


def constant(kappa: float = 0.0, dim: int = 2) -> AnalyticTestFunction:
    kappa, dim = float(kappa), int(dim)
    return AnalyticTestFunction(
        id=f"constant:c={kappa:g},dim={dim}",
        dim=dim,
        value=_wrap(dim, lambda x: np.full(x.shape[:-1], kappa)),
        gradient=_wrap(dim, lambda x: np.zeros(x.shape)),
        laplacian=_wrap(dim, lambda x: np.zeros(x.shape[:-1])),
        hessian=_wrap(dim, lambda x: np.zeros(x.shape + (dim,))),
        params={"c": kappa, "dim": dim},
    )


def linear(*c: float) -> AnalyticTestFunction:
    """``c . x``; defaults to ``x1`` in the plane."""
    coef = np.asarray(c if c else (1.0, 0.0), dtype=float)
    n = coef.size
    return AnalyticTestFunction(
        id="linear:c=" + ",".join(f"{v:g}" for v in coef),
        dim=n,
        value=_wrap(n, lambda x: x @ coef),
        gradient=_wrap(n, lambda x: np.broadcast_to(coef, x.shape).copy()),
        laplacian=_wrap(n, lambda x: np.zeros(x.shape[:-1])),
        hessian=_wrap(n, lambda x: np.zeros(x.shape + (n,))),
        params={"c": coef.tolist()},
    )


_BUILDERS: dict[str, Callable[..., AnalyticTestFunction]] = {
    "monomial_1d": lambda k=2: monomial_1d(int(k)),
    "quadratic": lambda a=(1.0, 1.0): quadratic(*np.atleast_1d(a)),
    "radial_extremal": lambda n=2: radial_extremal(int(n)),
    "eccentric": lambda eps=1e-3: eccentric(float(eps)),
    "skew": lambda: skew(),
    "sum_sq": lambda: sum_sq(),
    "harmonic_probe": lambda A=0.1, m=3: harmonic_probe(float(A), int(m)),
    "constant": lambda c=0.0, dim=2: constant(float(c), int(dim)),
    "linear": lambda c=(1.0, 0.0): linear(*np.atleast_1d(c)),
}


def builtin_catalog() -> list[AnalyticTestFunction]:
    """Representative members of every catalog family."""
    return [
        monomial_1d(2),
        monomial_1d(3),
        quadratic(1.0, 4.0),
        quadratic(0.5, 0.5),
        radial_extremal(2),
        radial_extremal(3),
        eccentric(0.1),
        skew(),
        sum_sq(),
        harmonic_probe(0.1, 3),
        harmonic_probe(1.0, 4),
        constant(1.0),
        linear(1.0, 0.0),
    ]


def catalog_names() -> list[str]:
    return list(_BUILDERS)


_SPEC_RE = re.compile(r"^\s*([A-Za-z_][A-Za-z0-9_]*)\s*(?::(.*))?$")


def parse_function_spec(spec: str) -> AnalyticTestFunction:
    """Build a catalog member from a string such as ``"quadratic:a=1,0.01"``.

    Parameters are ``key=value`` pairs separated by commas; a bare value
    continues the list of the preceding key.  The keys ``shift`` and
    ``scale`` apply to any family.
    """
    m = _SPEC_RE.match(spec)
    if not m:
        raise ValueError(f"malformed function spec {spec!r}")
    name, rest = m.group(1), m.group(2)
    if name not in _BUILDERS:
        raise ValueError(f"unknown function family {name!r}; known: {', '.join(_BUILDERS)}")
    params: dict[str, list[float]] = {}
    key = None
    for token in filter(None, (t.strip() for t in (rest or "").split(","))):
        if "=" in token:
            key, _, token = token.partition("=")
            key = key.strip()
            params[key] = []
        if key is None:
            raise ValueError(f"value {token!r} in {spec!r} has no key")
        try:
            params[key].append(float(token))
        except ValueError:
            raise ValueError(f"non-numeric value {token!r} for {key!r} in {spec!r}") from None
    shift = params.pop("shift", [0.0])[0]
    scale = params.pop("scale", [1.0])[0]
    kwargs = {k: (v[0] if len(v) == 1 else v) for k, v in params.items()}
    try:
        f = _BUILDERS[name](**kwargs)
    except TypeError as exc:
        raise ValueError(f"bad parameters for {name!r}: {exc}") from None
    if scale != 1.0:
        f = f.scaled(scale)
    if shift != 0.0:
        f = f.shifted(shift)
    return f


# --------------------------------------------------------------------------
# grids


Box = tuple[tuple[float, float], ...]


def _normalize_box(box) -> Box:
    b = tuple((float(lo), float(hi)) for lo, hi in box)
    for lo, hi in b:
        if not hi > lo:
            raise ValueError(f"degenerate box axis [{lo}, {hi}]")
    return b


def _normalize_resolution(resolution, dim: int) -> tuple[int, ...]:
    res = (int(resolution),) * dim if np.ndim(resolution) == 0 else tuple(int(r) for r in resolution)
    if len(res) != dim:
        raise ValueError(f"resolution {res} does not match dimension {dim}")
    return res


@dataclass(frozen=True)
class GridField:
    """Samples of a scalar function at the cell centres of a uniform box grid."""

    box: Box
    samples: np.ndarray
    source: AnalyticTestFunction | None = field(default=None, compare=False)

    def __post_init__(self):
        box = _normalize_box(self.box)
        samples = np.asarray(self.samples, dtype=float)
        if samples.ndim != len(box):
            raise ValueError(f"samples have {samples.ndim} axes but box has {len(box)}")
        samples.setflags(write=False)
        object.__setattr__(self, "box", box)
        object.__setattr__(self, "samples", samples)

    @property
    def dim(self) -> int:
        return len(self.box)

    @property
    def resolution(self) -> tuple[int, ...]:
        return self.samples.shape

    @property
    def spacing(self) -> tuple[float, ...]:
        return tuple((hi - lo) / n for (lo, hi), n in zip(self.box, self.resolution))

    @property
    def cell_area(self) -> float:
        return float(np.prod(self.spacing))

    def centers(self, axis: int) -> np.ndarray:
        return cell_centers(self.box[axis], self.resolution[axis])

    def points(self) -> np.ndarray:
        """Cell-centre coordinates, shape ``resolution + (dim,)``."""
        return grid_points(self.box, self.resolution)

    def with_samples(self, samples) -> "GridField":
        return GridField(self.box, samples)


def cell_centers(interval, n: int) -> np.ndarray:
    lo, hi = interval
    h = (hi - lo) / n
    return lo + h * (np.arange(n) + 0.5)


def grid_points(box, resolution) -> np.ndarray:
    """Cell centres of ``box``, shape ``(*resolution, dim)``; an int resolution applies to every axis."""
    if np.isscalar(resolution):
        resolution = (int(resolution),) * len(box)
    axes = [cell_centers(b, n) for b, n in zip(box, resolution)]
    return np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)


def sample(f: AnalyticTestFunction, box, resolution) -> GridField:
    """Evaluate ``f`` at every cell centre of ``box`` split into ``resolution`` cells."""
    box = _normalize_box(box)
    if f.dim != len(box):
        raise ValueError(f"function {f.id} has dimension {f.dim}, box has {len(box)}")
    res = _normalize_resolution(resolution, f.dim)
    if min(res) < 2:
        raise ValueError(f"resolution must be >= 2 per axis, got {res}")
    return GridField(box, f.value(grid_points(box, res)), source=f)


def fd_operators(g: GridField) -> tuple[np.ndarray, np.ndarray]:
    """Finite-difference gradient and Laplacian of a sampled field.

    Central differences in the interior; second-order one-sided stencils
    on the outermost layer (first-order for the second derivative when an
    axis has only three cells).  Both are exact on quadratics.

    Returns
    -------
    grad : ndarray, shape ``resolution + (dim,)``
    lap : ndarray, shape ``resolution``
    """
    if min(g.resolution) < 3:
        raise ValueError(f"fd_operators needs resolution >= 3 per axis, got {g.resolution}")
    u = g.samples
    grads, lap = [], np.zeros_like(u)
    for axis, h in enumerate(g.spacing):
        grads.append(np.gradient(u, h, axis=axis, edge_order=2))
        lap += _second_difference(u, h, axis)
    return np.stack(grads, axis=-1), lap


def _second_difference(u: np.ndarray, h: float, axis: int) -> np.ndarray:
    v = np.moveaxis(u, axis, 0)
    out = np.empty_like(v)
    out[1:-1] = (v[2:] - 2 * v[1:-1] + v[:-2]) / h**2
    if v.shape[0] >= 4:
        out[0] = (2 * v[0] - 5 * v[1] + 4 * v[2] - v[3]) / h**2
        out[-1] = (2 * v[-1] - 5 * v[-2] + 4 * v[-3] - v[-4]) / h**2
    else:
        out[0] = out[-1] = out[1]
    return np.moveaxis(out, 0, axis)


@dataclass
class AmgmReport:
    rows: list[dict]
    worst_slack: float
    skipped: int

    @property
    def ok(self) -> bool:
        return self.worst_slack >= -1e-9 * max(1.0, abs(self.worst_slack))


def amgm_check(f: AnalyticTestFunction, points: Sequence) -> AmgmReport:
    """Check ``det D^2 f <= (Lap f)^n / n^n`` at every convex point.

    Points where the Hessian has a negative eigenvalue are skipped and
    listed with ``skipped=True``; the worst slack is over convex points.
    """
    if f.hessian is None:
        raise ValueError(f"{f.id} has no Hessian evaluator")
    pts = _as_points(points, f.dim).reshape(-1, f.dim)
    n = f.dim
    hess = f.hessian(pts)
    lap = f.laplacian(pts)
    rows, worst, skipped = [], math.inf, 0
    for p, H, L in zip(pts, hess, lap):
        eig = np.linalg.eigvalsh(H)
        det = float(np.prod(eig))
        if eig.min() < -1e-12:
            rows.append({"point": p.tolist(), "det": det, "bound": None, "slack": None, "skipped": True})
            skipped += 1
            continue
        bound = float(L) ** n / n**n
        slack = bound - det
        worst = min(worst, slack)
        rows.append({"point": p.tolist(), "det": det, "bound": bound, "slack": slack, "skipped": False})
    return AmgmReport(rows, worst, skipped)
