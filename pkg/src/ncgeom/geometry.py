"""Planar primitives under the Boolean (unit-disk) connectivity model."""
from __future__ import annotations

import math
from typing import NamedTuple, Sequence

import numpy as np

#: distance (in units of R) below which a point counts as lying on a hull edge
CONVEX_TOL = 1e-9


class Point2D(NamedTuple):
    x: float
    y: float


def check_radius(r: float) -> float:
    r = float(r)
    if not (r > 0 and math.isfinite(r)):
        raise ValueError(f"radius must be a positive finite number, got {r!r}")
    return r


def distance(a: Sequence[float], b: Sequence[float]) -> float:
    return float(np.hypot(a[0] - b[0], a[1] - b[1]))


def is_connected(a: Sequence[float], b: Sequence[float], r: float) -> bool:
    # exact comparison, no epsilon band: the link rule is a hard threshold
    return distance(a, b) <= r


def distance_matrix(xy: np.ndarray) -> np.ndarray:
    """Pairwise Euclidean distances, computed with the same primitive as :func:`distance`."""
    xy = np.asarray(xy, dtype=np.float64).reshape(-1, 2)
    dx = xy[:, None, 0] - xy[None, :, 0]
    dy = xy[:, None, 1] - xy[None, :, 1]
    return np.hypot(dx, dy)


def connectivity_matrix(xy: np.ndarray, r: float) -> np.ndarray:
    """Boolean adjacency (distance <= r). The diagonal is True."""
    return distance_matrix(xy) <= r


def _cross(o, a, b) -> float:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def convex_hull(points: Sequence[Sequence[float]]) -> list[Point2D]:
    """Extreme points of ``points`` in counter-clockwise order (monotone chain).

    Collinear boundary points are dropped, so an all-collinear input collapses
    to its two endpoints. Duplicates are merged.
    """
    pts = sorted({(float(p[0]), float(p[1])) for p in points})
    if not pts:
        raise ValueError("convex_hull needs at least one point")
    if len(pts) <= 2:
        return [Point2D(*p) for p in pts]
    lower: list[tuple[float, float]] = []
    for p in pts:
        while len(lower) >= 2 and _cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    upper: list[tuple[float, float]] = []
    for p in reversed(pts):
        while len(upper) >= 2 and _cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    hull = lower[:-1] + upper[:-1]
    return [Point2D(*p) for p in hull]


def is_convex_position(points: Sequence[Sequence[float]], tol: float = CONVEX_TOL) -> bool:
    """True iff no point lies strictly inside the convex hull of the set.

    Points within ``tol`` of a hull edge count as boundary points.
    """
    pts = [(float(p[0]), float(p[1])) for p in points]
    if len(pts) <= 3:
        return True
    hull = convex_hull(pts)
    if len(hull) <= 2:
        return True
    edges = []
    for i, a in enumerate(hull):
        b = hull[(i + 1) % len(hull)]
        length = math.hypot(b[0] - a[0], b[1] - a[1])
        edges.append((a, b, length))
    for p in pts:
        # signed distance to each ccw edge; strictly inside means > tol for all of them
        if all(_cross(a, b, p) / length > tol for a, b, length in edges):
            return False
    return True


def perimeter(polygon: Sequence[Sequence[float]]) -> float:
    n = len(polygon)
    if n < 2:
        return 0.0
    return sum(distance(polygon[i], polygon[(i + 1) % n]) for i in range(n))
