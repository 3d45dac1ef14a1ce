"""Edge pixels to simplified polylines.

Every edge pixel becomes a point. A random seed point is joined to its
nearest neighbor when closer than a threshold, then the path greedily grows
from both ends, always consuming the nearest remaining point. Finished
paths are simplified with Ramer-Douglas-Peucker so the plotter is not fed
jittery pixel staircases.
"""

from __future__ import annotations

from collections import deque
from math import ceil

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from .validation import check_mask, check_path

Point = tuple[int, int]


def extract_points(edges: np.ndarray) -> list[Point]:
    """One (x, y) point per true edge pixel, in row-major scan order."""
    edges = check_mask(edges)
    ys, xs = np.nonzero(edges)
    return [(int(x), int(y)) for x, y in zip(xs, ys)]


class SpatialGrid:
    """Uniform hash grid over integer points for nearest-neighbor queries.

    Cell size equals the tracing threshold, so a bounded-radius query only
    inspects the 3x3 cell neighborhood. Ties are broken toward the lowest
    (y, x) point so tracing is deterministic. Squared distances between
    integer points are exact, which keeps tie-breaking well defined.
    """

    def __init__(self, cell_size: float, points: list[Point] | None = None):
        if cell_size <= 0:
            raise ValueError(f"cell_size must be positive, got {cell_size}")
        self.cell_size = float(cell_size)
        self._buckets: dict[tuple[int, int], set[Point]] = {}
        self._count = 0
        # Occupied-cell bounding box; grows monotonically so full searches
        # terminate even after removals.
        self._cell_min: tuple[int, int] | None = None
        self._cell_max: tuple[int, int] | None = None
        for p in points or []:
            self.insert(p)

    def __len__(self) -> int:
        return self._count

    def _cell(self, p: Point) -> tuple[int, int]:
        return (int(np.floor(p[0] / self.cell_size)), int(np.floor(p[1] / self.cell_size)))

    def insert(self, p: Point) -> None:
        c = self._cell(p)
        self._buckets.setdefault(c, set()).add(p)
        self._count += 1
        if self._cell_min is None:
            self._cell_min = c
            self._cell_max = c
        else:
            self._cell_min = (min(self._cell_min[0], c[0]), min(self._cell_min[1], c[1]))
            self._cell_max = (max(self._cell_max[0], c[0]), max(self._cell_max[1], c[1]))

    def remove(self, p: Point) -> None:
        c = self._cell(p)
        bucket = self._buckets.get(c)
        if bucket is None or p not in bucket:
            raise KeyError(f"point {p} not in grid")
        bucket.remove(p)
        if not bucket:
            del self._buckets[c]
        self._count -= 1

    def _ring_cells(self, center: tuple[int, int], radius: int):
        cx, cy = center
        if radius == 0:
            yield (cx, cy)
            return
        for dx in range(-radius, radius + 1):
            yield (cx + dx, cy - radius)
            yield (cx + dx, cy + radius)
        for dy in range(-radius + 1, radius):
            yield (cx - radius, cy + dy)
            yield (cx + radius, cy + dy)

    def _best_in_cells(self, cells, q: Point, best):
        qx, qy = q
        for c in cells:
            bucket = self._buckets.get(c)
            if not bucket:
                continue
            for (px, py) in bucket:
                d2 = (px - qx) ** 2 + (py - qy) ** 2
                key = (d2, py, px)
                if best is None or key < best:
                    best = key
        return best

    def nearest(self, q: Point, within: float | None = None) -> Point | None:
        """Closest stored point to q, or None.

        With `within`, only points at distance strictly below it qualify and
        the search stays bounded to ceil(within / cell) + 1 rings.
        """
        if self._count == 0:
            return None
        center = self._cell(q)
        best = None
        if within is not None:
            limit2 = float(within) ** 2
            for r in range(int(ceil(within / self.cell_size)) + 1):
                best = self._best_in_cells(self._ring_cells(center, r), q, best)
            if best is not None and best[0] < limit2:
                return (best[2], best[1])
            return None
        # Unbounded search: expand rings until the next ring cannot beat the
        # current best (points in ring k lie at distance >= (k-1) * cell).
        max_radius = max(
            abs(center[0] - self._cell_min[0]),
            abs(center[0] - self._cell_max[0]),
            abs(center[1] - self._cell_min[1]),
            abs(center[1] - self._cell_max[1]),
        )
        r = 0
        while r <= max_radius:
            best = self._best_in_cells(self._ring_cells(center, r), q, best)
            if best is not None and best[0] <= ((r - 1) * self.cell_size) ** 2 and r >= 1:
                break
            r += 1
        return (best[2], best[1]) if best is not None else None


class _AliveSet:
    """Uniform random draws and O(1) removals over the untraced points."""

    def __init__(self, points: list[Point]):
        self._items = list(points)
        self._index = {p: i for i, p in enumerate(self._items)}
        if len(self._index) != len(self._items):
            raise ValueError("duplicate points")

    def __len__(self):
        return len(self._items)

    def draw(self, rng: np.random.Generator) -> Point:
        return self._items[int(rng.integers(len(self._items)))]

    def remove(self, p: Point) -> None:
        i = self._index.pop(p)
        last = self._items.pop()
        if last != p:
            self._items[i] = last
            self._index[last] = i


def trace_paths(
    points: list[Point],
    neighbor_distance: float = 2.0,
    rng: np.random.Generator | None = None,
) -> tuple[list[np.ndarray], list[Point]]:
    """Greedy bidirectional nearest-neighbor tracing.

    Returns (paths, singletons): every input point ends up in exactly one
    path or in the discarded singleton list (a seed whose nearest neighbor
    is not strictly closer than the threshold cannot start a path).
    """
    if neighbor_distance <= 0:
        raise ValueError(f"neighbor_distance must be positive, got {neighbor_distance}")
    rng = np.random.default_rng() if rng is None else rng
    alive = _AliveSet(points)
    grid = SpatialGrid(neighbor_distance, points)
    paths: list[np.ndarray] = []
    singletons: list[Point] = []

    def take(p: Point) -> None:
        alive.remove(p)
        grid.remove(p)

    while len(alive):
        seed = alive.draw(rng)
        take(seed)
        nbr = grid.nearest(seed, within=neighbor_distance)
        if nbr is None:
            singletons.append(seed)
            continue
        take(nbr)
        path: deque[Point] = deque((seed, nbr))
        for grow_back in (True, False):
            end = path[-1] if grow_back else path[0]
            while True:
                nxt = grid.nearest(end, within=neighbor_distance)
                if nxt is None:
                    break
                take(nxt)
                if grow_back:
                    path.append(nxt)
                else:
                    path.appendleft(nxt)
                end = nxt
        paths.append(np.array(path, dtype=np.float64))
    return paths, singletons


def point_segment_distances(points: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Distances from each point to the segment a-b (clamped projection)."""
    points = np.atleast_2d(points)
    ab = b - a
    denom = float(ab @ ab)
    if denom == 0.0:
        return np.linalg.norm(points - a, axis=1)
    t = np.clip((points - a) @ ab / denom, 0.0, 1.0)
    proj = a + t[:, None] * ab
    return np.linalg.norm(points - proj, axis=1)


def simplify_path(path: np.ndarray, tolerance: float) -> np.ndarray:
    """Ramer-Douglas-Peucker simplification keeping both endpoints.

    Every dropped point lies within `tolerance` of the chord between the two
    nearest kept points, hence within `tolerance` of the output polyline.
    Iterative stack, since traced paths can be thousands of points long.
    """
    path = check_path(path)
    if tolerance < 0:
        raise ValueError(f"tolerance must be >= 0, got {tolerance}")
    n = len(path)
    keep = np.zeros(n, dtype=bool)
    keep[0] = keep[-1] = True
    stack = [(0, n - 1)]
    while stack:
        i, j = stack.pop()
        if j <= i + 1:
            continue
        dists = point_segment_distances(path[i + 1 : j], path[i], path[j])
        k = int(np.argmax(dists))
        if dists[k] > tolerance:
            split = i + 1 + k
            keep[split] = True
            stack.append((i, split))
            stack.append((split, j))
    return path[keep]


class EdgeTracer(BaseEstimator, TransformerMixin):
    """Transformer from boolean edge maps to simplified polylines.

    Parameters
    ----------
    neighbor_distance : tracing threshold d in pixels; consecutive path
        points are always strictly closer than this.
    simplify_tolerance : max perpendicular deviation allowed when dropping
        points, in pixels. 0 drops only exactly collinear points.
    random_state : seed for the order in which paths are grown.
    """

    def __init__(self, neighbor_distance: float = 2.0, simplify_tolerance: float = 0.75, random_state: int = 0):
        self.neighbor_distance = neighbor_distance
        self.simplify_tolerance = simplify_tolerance
        self.random_state = random_state

    def fit(self, X=None, y=None):
        if self.neighbor_distance <= 0:
            raise ValueError("neighbor_distance must be positive")
        if self.simplify_tolerance < 0:
            raise ValueError("simplify_tolerance must be >= 0")
        return self

    def transform(self, X: np.ndarray) -> list[np.ndarray]:
        rng = np.random.default_rng(self.random_state)
        paths, _ = trace_paths(extract_points(X), self.neighbor_distance, rng)
        return [simplify_path(p, self.simplify_tolerance) for p in paths]
