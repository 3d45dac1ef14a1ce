"""Delta-encoded stroke graphs.

A stroke becomes an undirected graph over n vertices spread at equal arc
length along the line, ordered in stroke direction. Vertex attributes are
the positional delta to the predecessor; the first vertex is the reference
and carries (0, 0). Edges are the stroke chain plus hub edges connecting
every later vertex to the reference, so graph convolution mixes local
neighborhoods with one globally connected vertex. Chain and hub coincide on
the first pair, leaving 2n - 3 distinct edges.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .exceptions import GeometryError
from .validation import check_path


@dataclass(frozen=True)
class StrokeGraph:
    """A resampled stroke: predecessor deltas plus the original size.

    deltas: (n, 2) offsets in normalized units (unit bounding-box diagonal),
    first row (0, 0). scale: the original diagonal, so generated variants
    can be restored to source units.
    """

    deltas: np.ndarray
    scale: float

    def __post_init__(self):
        deltas = np.asarray(self.deltas, dtype=np.float64)
        object.__setattr__(self, "deltas", deltas)
        if deltas.ndim != 2 or deltas.shape[1] != 2:
            raise ValueError(f"deltas must be (n, 2), got {deltas.shape}")
        n = len(deltas)
        if n < 4 or n % 4 != 0:
            raise ValueError(f"vertex count must be >= 4 and divisible by 4, got {n}")
        if deltas[0, 0] != 0.0 or deltas[0, 1] != 0.0:
            raise ValueError("first delta row must be (0, 0)")
        if self.scale <= 0:
            raise ValueError(f"scale must be positive, got {self.scale}")

    @property
    def n(self) -> int:
        return len(self.deltas)

    def points(self) -> np.ndarray:
        """Absolute normalized points (first at the origin)."""
        return np.cumsum(self.deltas, axis=0)


def stroke_edges(n: int) -> list[tuple[int, int]]:
    """Chain plus hub edge list (0-indexed) for an n-vertex stroke."""
    if n < 1:
        raise ValueError(f"need at least one vertex, got {n}")
    chain = [(i, i + 1) for i in range(n - 1)]
    hub = [(0, i) for i in range(2, n)]
    return chain + hub


def adjacency_matrix(n: int) -> np.ndarray:
    """Symmetric 0/1 adjacency for the chain+hub stroke graph."""
    A = np.zeros((n, n), dtype=np.float64)
    for i, j in stroke_edges(n):
        A[i, j] = 1.0
        A[j, i] = 1.0
    return A


def normalized_adjacency(A: np.ndarray) -> np.ndarray:
    """Symmetric degree normalization with self-loops: D^-1/2 (A+I) D^-1/2."""
    A = np.asarray(A, dtype=np.float64)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"adjacency must be square, got {A.shape}")
    A_hat = A + np.eye(len(A))
    inv_sqrt_deg = 1.0 / np.sqrt(A_hat.sum(axis=1))
    return inv_sqrt_deg[:, None] * A_hat * inv_sqrt_deg[None, :]


@lru_cache(maxsize=32)
def stroke_graph_propagation(n: int) -> np.ndarray:
    """Cached normalized adjacency for the standard n-vertex stroke graph."""
    return normalized_adjacency(adjacency_matrix(n))


def resample_stroke(path: np.ndarray, n: int = 32) -> StrokeGraph:
    """Resample a polyline to n equal-arc-length points and delta-encode it.

    The result is normalized to a unit bounding-box diagonal with the
    original diagonal recorded as the scale.
    """
    if n < 4 or n % 4 != 0:
        raise ValueError(f"n must be >= 4 and divisible by 4, got {n}")
    path = check_path(path, min_points=1)
    if len(path) > 1:
        seg = np.linalg.norm(np.diff(path, axis=0), axis=1)
        path = path[np.concatenate(([True], seg > 0))]
    if len(path) < 2:
        raise GeometryError("cannot resample a zero-length path")
    seg = np.linalg.norm(np.diff(path, axis=0), axis=1)
    cum = np.concatenate(([0.0], np.cumsum(seg)))
    targets = np.linspace(0.0, cum[-1], n)
    resampled = np.column_stack(
        (np.interp(targets, cum, path[:, 0]), np.interp(targets, cum, path[:, 1]))
    )
    diagonal = float(np.linalg.norm(resampled.max(axis=0) - resampled.min(axis=0)))
    if diagonal <= 0:
        raise GeometryError("cannot resample a zero-length path")
    deltas = np.vstack(([0.0, 0.0], np.diff(resampled, axis=0) / diagonal))
    return StrokeGraph(deltas=deltas, scale=diagonal)


def path_from_deltas(deltas: np.ndarray, scale: float = 1.0) -> np.ndarray:
    """Cumulatively sum predecessor deltas into an absolute path.

    The first row is forced to (0, 0): the reference-vertex convention is
    structural, not learned, so decoded matrices get it overridden here.
    """
    deltas = np.array(deltas, dtype=np.float64)
    if deltas.ndim != 2 or deltas.shape[1] != 2:
        raise ValueError(f"deltas must be (n, 2), got {deltas.shape}")
    deltas[0] = 0.0
    return np.cumsum(deltas, axis=0) * float(scale)
