"""Convex hulls of i.i.d. planar points, the event Gamma and the U-statistic.

Point ``k`` of a sample is ``(xs[k], ys[k])``; indices are 0-based, so the
defining pair of the event Gamma is points 0 and 1.
"""

from dataclasses import dataclass
from functools import cache

import numpy as np
from numpy.typing import ArrayLike
from scipy.special import expit

from .distributions import DistributionSpec, _quantile, _survival, sample
from .errors import GeometryError

DEFAULT_QUAD_POINTS = 256
MIN_QUAD_POINTS = 8
PANEL_NODES = 8
LOGIT_RANGE = 36.0
GRID_STRETCH = 3.0


@dataclass(frozen=True)
class PointSample:
    xs: np.ndarray
    ys: np.ndarray

    def __post_init__(self):
        xs = np.array(self.xs, dtype=float)
        ys = np.array(self.ys, dtype=float)
        if xs.ndim != 1 or xs.shape != ys.shape:
            raise GeometryError("point coordinates must be two 1-d arrays of equal length")
        if xs.size < 2:
            raise GeometryError(f"a point sample needs n >= 2, got {xs.size}")
        if not (np.all(np.isfinite(xs)) and np.all(np.isfinite(ys))):
            raise GeometryError("point coordinates must be finite")
        xs.setflags(write=False)
        ys.setflags(write=False)
        object.__setattr__(self, "xs", xs)
        object.__setattr__(self, "ys", ys)

    @classmethod
    def from_points(cls, points: ArrayLike) -> "PointSample":
        points = np.asarray(points, dtype=float)
        return cls(points[:, 0], points[:, 1])

    @property
    def n(self) -> int:
        return self.xs.size

    def subset(self, indices) -> "PointSample":
        indices = np.asarray(indices)
        return PointSample(self.xs[indices], self.ys[indices])


@dataclass(frozen=True)
class HullStats:
    hull: tuple[int, ...]
    V0: int | None = None

    @property
    def V(self) -> int:
        return len(self.hull)


@dataclass(frozen=True)
class LineCoeffs:
    A: float
    B: float
    C: float

    def residual(self, x: float, y: float) -> float:
        return self.A * x + self.B * y - self.C


def sample_points(n: int, spec: DistributionSpec, rng: np.random.Generator) -> PointSample:
    """2n draws, x then y for each point."""
    if n < 2:
        raise GeometryError(f"a point sample needs n >= 2, got {n}")
    draws = sample(spec, rng, 2 * n).reshape(n, 2)
    return PointSample(draws[:, 0], draws[:, 1])


def _cross(xs, ys, o: int, a: int, b: int) -> float:
    return (xs[a] - xs[o]) * (ys[b] - ys[o]) - (ys[a] - ys[o]) * (xs[b] - xs[o])


def _interior_of_extremes(xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
    """Points strictly inside the quadrilateral of the four axis-extreme points."""
    corners = [np.argmin(xs), np.argmin(ys), np.argmax(xs), np.argmax(ys)]
    inside = np.ones(xs.size, dtype=bool)
    for start, end in zip(corners, corners[1:] + corners[:1]):
        dx, dy = xs[end] - xs[start], ys[end] - ys[start]
        inside &= dx * (ys - ys[start]) - dy * (xs - xs[start]) > 0.0
    return inside


def _chain(order, xs, ys) -> list[int]:
    chain: list[int] = []
    for k in order:
        while len(chain) >= 2 and _cross(xs, ys, chain[-2], chain[-1], k) <= 0.0:
            chain.pop()
        chain.append(k)
    return chain


def convex_hull(sample: PointSample) -> HullStats:
    """Monotone chain; counterclockwise from the lowest-x point.

    Collinear points inside an edge are dropped and duplicate points keep their
    first index. A sample of identical points gives a single vertex.
    """
    xs, ys = sample.xs, sample.ys
    candidates = np.flatnonzero(~_interior_of_extremes(xs, ys))
    order = candidates[np.lexsort((candidates, ys[candidates], xs[candidates]))]
    distinct = np.ones(order.size, dtype=bool)
    distinct[1:] = (np.diff(xs[order]) != 0.0) | (np.diff(ys[order]) != 0.0)
    order = order[distinct].tolist()
    if len(order) == 1:
        return HullStats((order[0],))
    lower = _chain(order, xs, ys)
    upper = _chain(order[::-1], xs, ys)
    return HullStats(tuple(lower[:-1] + upper[:-1]))


def count_positive_normal_edges(hull_stats: HullStats, sample: PointSample) -> int:
    """V0: counterclockwise edges with dx < 0 and dy > 0, i.e. outward normal > 0."""
    hull = hull_stats.hull
    if len(hull) < 2:
        return 0
    vertices = np.asarray(hull)
    following = np.roll(vertices, -1)
    dx = sample.xs[following] - sample.xs[vertices]
    dy = sample.ys[following] - sample.ys[vertices]
    return int(np.count_nonzero((dx < 0.0) & (dy > 0.0)))


def hull_stats(sample: PointSample) -> HullStats:
    stats = convex_hull(sample)
    return HullStats(stats.hull, count_positive_normal_edges(stats, sample))


def pareto_maxima(sample: PointSample) -> tuple[int, ...]:
    order = np.lexsort((-sample.ys, -sample.xs))
    maxima = []
    best_y = -np.inf
    for k in order:
        if sample.ys[k] > best_y:
            maxima.append(int(k))
            best_y = sample.ys[k]
    return tuple(sorted(maxima))


def line_through_pair(P1: tuple[float, float], P2: tuple[float, float]) -> LineCoeffs:
    (x1, y1), (x2, y2) = P1, P2
    if x1 == x2 and y1 == y2:
        raise GeometryError(f"a line needs two distinct points, got {P1} twice")
    return LineCoeffs(A=y1 - y2, B=x2 - x1, C=x2 * y1 - x1 * y2)


def _gamma_columns(x: np.ndarray, y: np.ndarray, first: int, second: int) -> bool:
    if not (x[first] < x[second] and y[first] > y[second]):
        return False
    A = y[first] - y[second]
    B = x[second] - x[first]
    C = x[second] * y[first] - x[first] * y[second]
    others = np.ones(x.size, dtype=bool)
    others[[first, second]] = False
    return bool(np.all(A * x[others] + B * y[others] < C))


def gamma_indicator(sample: PointSample) -> bool:
    """X1 < X2, Y1 > Y2 and every other point strictly below the line through P1, P2."""
    return _gamma_columns(sample.xs, sample.ys, 0, 1)


@cache
def _panel_rule() -> tuple[np.ndarray, np.ndarray]:
    nodes, weights = np.polynomial.legendre.leggauss(PANEL_NODES)
    return 0.5 * (nodes + 1.0), 0.5 * weights


def _logit_grid(quad_points: int) -> np.ndarray:
    half = max(2, quad_points // (4 * PANEL_NODES))
    stretched = np.sinh(GRID_STRETCH * np.linspace(-1.0, 1.0, 2 * half + 1))
    return LOGIT_RANGE * stretched / np.sinh(GRID_STRETCH)


def _breakpoints(A, B, C, spec: DistributionSpec, grid: np.ndarray) -> np.ndarray:
    """Grid in t = logit(s) plus the images of the same grid read as X-levels.

    Kinks of the integrand sit at images of X-levels (support ends, the mirror
    point of a symmetrized law), so every one of them lands on a breakpoint.
    """
    x_levels = _quantile(spec, expit(grid))
    tail = _survival(spec, (C - A * x_levels) / B)
    images = np.nan_to_num(np.log1p(-tail) - np.log(tail), nan=LOGIT_RANGE)
    images = np.clip(images, -LOGIT_RANGE, LOGIT_RANGE)
    edges = np.concatenate([np.broadcast_to(grid, images.shape), images], axis=1)
    return np.sort(edges, axis=1)


def u_values(
    p1: ArrayLike,
    p2: ArrayLike,
    spec: DistributionSpec,
    quad_points: int = DEFAULT_QUAD_POINTS,
) -> np.ndarray:
    """U for arrays of pairs; ``p1`` and ``p2`` have shape (k, 2).

    Integrates s -> survival((C - B quantile(s)) / A) over t = logit(s) on
    [-LOGIT_RANGE, LOGIT_RANGE] with Gauss-Legendre panels. The mass left outside
    is below 1e-15.
    """
    if quad_points < MIN_QUAD_POINTS:
        raise GeometryError(f"quad_points must be at least {MIN_QUAD_POINTS}, got {quad_points}")
    p1 = np.atleast_2d(np.asarray(p1, dtype=float))
    p2 = np.atleast_2d(np.asarray(p2, dtype=float))
    x1, y1, x2, y2 = p1[:, 0], p1[:, 1], p2[:, 0], p2[:, 1]
    quadrant = (x1 < x2) & (y1 > y2)
    out = np.ones(x1.size)
    if not np.any(quadrant):
        return out

    A = (y1 - y2)[quadrant, None]
    B = (x2 - x1)[quadrant, None]
    C = (x2 * y1 - x1 * y2)[quadrant, None]
    unit_nodes, unit_weights = _panel_rule()
    with np.errstate(over="ignore", under="ignore", invalid="ignore", divide="ignore"):
        edges = _breakpoints(A, B, C, spec, _logit_grid(quad_points))
        left = edges[:, :-1, None]
        width = np.diff(edges, axis=1)[..., None]
        t = left + width * unit_nodes
        s = expit(t)
        heights = _quantile(spec, s)
        integrand = _survival(spec, (C[..., None] - B[..., None] * heights) / A[..., None])
        total = np.sum(integrand * s * expit(-t) * width * unit_weights, axis=(1, 2))
    out[quadrant] = np.clip(total, 0.0, 1.0)
    return out


def u_statistic(
    P1: tuple[float, float],
    P2: tuple[float, float],
    spec: DistributionSpec,
    quad_points: int = DEFAULT_QUAD_POINTS,
) -> float:
    """P(A X + B Y > C | P1, P2) for a fresh point; 1 outside the quadrant X1 < X2, Y1 > Y2."""
    return float(u_values([P1], [P2], spec, quad_points)[0])
