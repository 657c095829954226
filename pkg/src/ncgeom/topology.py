"""Node layouts around a relay at the origin: square/cyclic grids and random disks.

Random layouts draw from numpy's Philox counter-based generator keyed by a
``SeedSequence``; the same seed always yields the same cell, bit for bit.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Literal, Sequence

import numpy as np

from .geometry import check_radius, distance_matrix


@dataclass(frozen=True, eq=False)
class Cell:
    """A relay cell: relay at the origin plus the nodes within ``radius`` of it.

    Nodes are kept sorted by id so that index order and id order agree.
    """

    radius: float
    ids: np.ndarray
    xy: np.ndarray

    def __post_init__(self):
        r = check_radius(self.radius)
        ids = np.asarray(self.ids, dtype=np.int64).reshape(-1)
        xy = np.asarray(self.xy, dtype=np.float64).reshape(-1, 2)
        if ids.shape[0] != xy.shape[0]:
            raise ValueError("ids and xy lengths differ")
        if len(np.unique(ids)) != len(ids):
            raise ValueError("node ids must be unique")
        if not np.all(np.isfinite(xy)):
            raise ValueError("node coordinates must be finite")
        if len(ids) and np.any(np.hypot(xy[:, 0], xy[:, 1]) > r):
            raise ValueError("every node must lie within the radius of the relay")
        order = np.argsort(ids, kind="stable")
        ids, xy = ids[order], xy[order]
        ids.setflags(write=False)
        xy.setflags(write=False)
        object.__setattr__(self, "radius", r)
        object.__setattr__(self, "ids", ids)
        object.__setattr__(self, "xy", xy)

    @classmethod
    def from_points(cls, points: Iterable[Sequence[float]], radius: float = 1.0, ids=None) -> "Cell":
        xy = np.asarray(list(points), dtype=np.float64).reshape(-1, 2)
        if ids is None:
            ids = np.arange(len(xy))
        return cls(radius, ids, xy)

    def __len__(self) -> int:
        return len(self.ids)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Cell):
            return NotImplemented
        return (
            self.radius == other.radius
            and np.array_equal(self.ids, other.ids)
            and np.array_equal(self.xy, other.xy)
        )

    def index_of(self, node_id: int) -> int:
        i = int(np.searchsorted(self.ids, node_id))
        if i >= len(self.ids) or self.ids[i] != node_id:
            raise KeyError(f"unknown node id {node_id}")
        return i

    def position(self, node_id: int) -> tuple[float, float]:
        x, y = self.xy[self.index_of(node_id)]
        return float(x), float(y)

    def add_node(self, node_id: int, x: float, y: float) -> "Cell":
        return Cell(self.radius, np.append(self.ids, node_id), np.vstack([self.xy, [[x, y]]]))

    def to_dict(self) -> dict:
        return {
            "radius": self.radius,
            "nodes": [
                {"id": int(i), "x": float(x), "y": float(y)} for i, (x, y) in zip(self.ids, self.xy)
            ],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Cell":
        try:
            nodes = data["nodes"]
            return cls(
                float(data["radius"]),
                [int(n["id"]) for n in nodes],
                [[float(n["x"]), float(n["y"])] for n in nodes],
            )
        except (KeyError, TypeError) as exc:
            raise ValueError(f"malformed topology document: {exc}") from exc

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "Cell":
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True)
class GridSpec:
    separation: float
    kind: Literal["square", "cyclic"] = "square"
    # phase of the square lattice relative to the relay, in units of the pitch
    offset: tuple[float, float] = (0.0, 0.0)
    # per-ring angular phase of the cyclic grid (radians); missing rings use 0
    ring_rotation: tuple[float, ...] = field(default_factory=tuple)

    def __post_init__(self):
        if not self.separation > 0:
            raise ValueError("separation must be positive")
        if self.kind not in ("square", "cyclic"):
            raise ValueError(f"unknown grid kind {self.kind!r}")


@dataclass(frozen=True)
class RandomSpec:
    kind: Literal["uniform-count", "poisson"]
    count: int = 0
    density: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.kind not in ("uniform-count", "poisson"):
            raise ValueError(f"unknown random kind {self.kind!r}")
        if self.kind == "uniform-count" and self.count < 0:
            raise ValueError("count must be non-negative")
        if self.kind == "poisson" and self.density < 0:
            raise ValueError("density must be non-negative")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")


def make_rng(seed: int | np.random.SeedSequence) -> np.random.Generator:
    """Philox-backed generator; the only RNG used for layouts."""
    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(int(seed))
    return np.random.Generator(np.random.Philox(ss))


def _square_lattice(d: float, r: float, offset=(0.0, 0.0)) -> np.ndarray:
    k = int(math.ceil(r / d)) + 2
    ox, oy = offset
    i = np.arange(-k, k + 1, dtype=np.float64)
    gx, gy = np.meshgrid(i + ox, i + oy, indexing="xy")
    xy = np.column_stack([gx.ravel() * d, gy.ravel() * d])
    keep = np.hypot(xy[:, 0], xy[:, 1]) <= r
    # the relay's own site is not a neighbour
    keep &= ~((xy[:, 0] == 0.0) & (xy[:, 1] == 0.0))
    xy = xy[keep]
    order = np.lexsort((xy[:, 0], xy[:, 1]))
    return xy[order]


def gen_square_grid(spec: GridSpec, r: float = 1.0) -> Cell:
    if spec.kind != "square":
        raise ValueError("gen_square_grid needs a square GridSpec")
    r = check_radius(r)
    xy = _square_lattice(spec.separation, r, spec.offset)
    return Cell(r, np.arange(len(xy)), xy)


def cyclic_ring_size(i: int) -> int:
    """Nodes on ring ``i`` of the cyclic grid: floor(2*pi / arccos(1 - 1/(2 i^2)))."""
    if i < 1:
        raise ValueError("ring index starts at 1")
    return floor_ratio(2 * math.pi, math.acos(1 - 1 / (2 * i * i)))


def floor_ratio(num: float, den: float) -> int:
    """floor(num/den), robust to the last-ulp error of exact quotients like 2*pi/(pi/3)."""
    q = num / den
    return int(math.floor(q + 1e-9 * max(1.0, abs(q))))


def gen_cyclic_grid(spec: GridSpec, r: float = 1.0) -> Cell:
    if spec.kind != "cyclic":
        raise ValueError("gen_cyclic_grid needs a cyclic GridSpec")
    r = check_radius(r)
    d = spec.separation
    rings = []
    i = 1
    while i * d <= r:
        m = cyclic_ring_size(i)
        phase = spec.ring_rotation[i - 1] if i - 1 < len(spec.ring_rotation) else 0.0
        theta = phase + 2 * math.pi * np.arange(m) / m
        rho = min(i * d, r)
        rings.append(np.column_stack([rho * np.cos(theta), rho * np.sin(theta)]))
        i += 1
    xy = np.vstack(rings) if rings else np.empty((0, 2))
    return Cell(r, np.arange(len(xy)), xy)


def _uniform_disk(rng: np.random.Generator, n: int, r: float) -> np.ndarray:
    u = rng.random((n, 2))
    rho = r * np.sqrt(u[:, 0])
    theta = 2 * math.pi * u[:, 1]
    xy = np.column_stack([rho * np.cos(theta), rho * np.sin(theta)])
    # cos/sin rounding can push a point a hair past the rim
    norm = np.hypot(xy[:, 0], xy[:, 1])
    over = norm > r
    if np.any(over):
        xy[over] *= (r / norm[over])[:, None]
        xy[over & (np.hypot(xy[:, 0], xy[:, 1]) > r)] *= 1 - 1e-15
    return xy


def gen_uniform(spec: RandomSpec, r: float = 1.0, rng: np.random.Generator | None = None) -> Cell:
    if spec.kind != "uniform-count":
        raise ValueError("gen_uniform needs a uniform-count RandomSpec")
    r = check_radius(r)
    rng = rng or make_rng(spec.seed)
    xy = _uniform_disk(rng, spec.count, r)
    return Cell(r, np.arange(spec.count), xy)


def gen_poisson(spec: RandomSpec, r: float = 1.0, rng: np.random.Generator | None = None) -> Cell:
    if spec.kind != "poisson":
        raise ValueError("gen_poisson needs a poisson RandomSpec")
    r = check_radius(r)
    rng = rng or make_rng(spec.seed)
    n = int(rng.poisson(spec.density * math.pi * r * r)) if spec.density > 0 else 0
    xy = _uniform_disk(rng, n, r)
    return Cell(r, np.arange(n), xy)


def square_grid_count(d: float, r: float = 1.0, offset=(0.0, 0.0)) -> int:
    return len(_square_lattice(d, r, offset))


def square_grid_interval(n: int, r: float = 1.0) -> tuple[float, float]:
    """Open-closed interval ``(lo, hi]`` of pitches whose origin-phase square grid holds ``n`` nodes.

    With the relay on a lattice site the count only depends on the integer
    norms i^2 + j^2 <= (r/d)^2, so the interval is found exactly from those norms.
    Raises ``ValueError`` when no pitch produces exactly ``n`` nodes.
    """
    if n < 0:
        raise ValueError("n must be non-negative")
    if n == 0:
        return (2 * r, math.inf)
    k = 2
    while True:
        axis = np.arange(-k, k + 1) ** 2
        norms = np.add.outer(axis, axis).ravel()
        norms = np.sort(norms[(norms > 0) & (norms <= k * k)])
        if len(norms) > n:
            break
        k *= 2
    values, first = np.unique(norms, return_index=True)
    # counts[j] = number of lattice points with norm <= values[j]
    counts = np.append(first[1:], len(norms))
    hit = np.nonzero(counts == n)[0]
    if len(hit):
        j = int(hit[0])
        # count == n exactly when values[j] <= (r/d)^2 < values[j+1]
        return (r / math.sqrt(values[j + 1]), r / math.sqrt(values[j]))
    raise ValueError(f"no square-grid pitch gives exactly {n} nodes")


def separation_for_count(n: int, r: float = 1.0, probes: int = 1) -> list[float]:
    """Pitches giving exactly ``n`` square-grid nodes, kept clear of the interval ends.

    ``probes`` values are spread evenly over the interior of the admissible
    interval in 1/d^2 space; the first returned value is the largest pitch.
    """
    lo, hi = square_grid_interval(n, r)
    if math.isinf(hi):
        hi = 4 * r
    a, b = (r / hi) ** 2, (r / lo) ** 2
    ts = a + (b - a) * (np.arange(probes) + 0.5) / probes
    return [float(r / math.sqrt(t)) for t in ts]


def pairwise_min_distance(cell: Cell) -> float:
    if len(cell) < 2:
        return math.inf
    dm = distance_matrix(cell.xy)
    np.fill_diagonal(dm, np.inf)
    return float(dm.min())
