"""Scatter generated strokes over the shading mask without touching.

Candidate strokes are sampled around random mask pixels and accepted only
when every point stays inside the mask and the whole polyline keeps at
least `clearance` millimeters from everything already placed (pen width
makes near-misses touch on paper). A uniform spatial hash over segments
keeps the distance test from scanning every placed stroke; the hash only
prunes, it never changes an accept/reject decision.
"""

from __future__ import annotations

from dataclasses import dataclass, fields

import numpy as np

from .strokegraph import StrokeGraph
from .strokemodel import ModelParams, sample_variation
from .validation import check_mask, check_path


@dataclass(frozen=True)
class ShadingConfig:
    """Tuning surface for the pattern fill.

    stroke_size is the target bounding-box diagonal of a placed stroke in
    output millimeters; clearance is the minimum distance between any two
    polylines. count_target and max_rejects bound the run time.
    """

    stroke_size: float = 6.0
    count_target: int = 400
    max_rejects: int = 800
    clearance: float = 0.6
    noise_scale: float = 0.15
    rng_seed: int = 0

    def __post_init__(self):
        if self.stroke_size <= 0:
            raise ValueError("stroke_size must be positive")
        if self.clearance < 0:
            raise ValueError("clearance must be >= 0")
        if self.count_target < 0 or self.max_rejects < 0:
            raise ValueError("count_target and max_rejects must be >= 0")
        if self.noise_scale < 0:
            raise ValueError("noise_scale must be >= 0")

    def as_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


def _points_to_segments(p: np.ndarray, s0: np.ndarray, s1: np.ndarray) -> np.ndarray:
    """Distance from one point to each segment (s0[i], s1[i])."""
    d = s1 - s0
    length_sq = np.einsum("ij,ij->i", d, d)
    t = np.zeros(len(s0))
    nonzero = length_sq > 0
    t[nonzero] = np.clip(
        np.einsum("ij,ij->i", p - s0[nonzero], d[nonzero]) / length_sq[nonzero], 0.0, 1.0
    )
    closest = s0 + t[:, None] * d
    return np.linalg.norm(p - closest, axis=1)


def segment_to_segments_distance(
    a0: np.ndarray, a1: np.ndarray, b0: np.ndarray, b1: np.ndarray
) -> np.ndarray:
    """Distance from segment (a0, a1) to each segment (b0[i], b1[i]).

    Zero where the segments properly cross; otherwise the minimum of the
    four endpoint-to-opposite-segment distances, which covers every
    non-crossing configuration including collinear overlap.
    """
    a0 = np.asarray(a0, dtype=np.float64)
    a1 = np.asarray(a1, dtype=np.float64)
    b0 = np.asarray(b0, dtype=np.float64).reshape(-1, 2)
    b1 = np.asarray(b1, dtype=np.float64).reshape(-1, 2)

    da = a1 - a0
    len_sq = float(da @ da)

    def points_to_a(pts: np.ndarray) -> np.ndarray:
        if len_sq == 0.0:
            return np.linalg.norm(pts - a0, axis=1)
        t = np.clip((pts - a0) @ da / len_sq, 0.0, 1.0)
        return np.linalg.norm(pts - (a0 + t[:, None] * da), axis=1)

    dists = np.minimum.reduce([
        _points_to_segments(a0, b0, b1),
        _points_to_segments(a1, b0, b1),
        points_to_a(b0),
        points_to_a(b1),
    ])

    db = b1 - b0

    def cross(u: np.ndarray, v: np.ndarray) -> np.ndarray:
        return u[..., 0] * v[..., 1] - u[..., 1] * v[..., 0]

    d1 = cross(da[None, :], b0 - a0)
    d2 = cross(da[None, :], b1 - a0)
    d3 = cross(db, a0[None, :] - b0)
    d4 = cross(db, a1[None, :] - b0)
    dists[(d1 * d2 < 0) & (d3 * d4 < 0)] = 0.0
    return dists


def segment_distance(a0, a1, b0, b1) -> float:
    """Scalar distance between two segments."""
    return float(
        segment_to_segments_distance(
            np.asarray(a0, dtype=np.float64),
            np.asarray(a1, dtype=np.float64),
            np.asarray(b0, dtype=np.float64)[None, :],
            np.asarray(b1, dtype=np.float64)[None, :],
        )[0]
    )


class OccupancyIndex:
    """Uniform spatial hash over the segments of all placed polylines.

    Segments register in every cell their bounding box overlaps; a query
    inflates the probe segment's box by the query radius, so any segment
    within that radius is guaranteed to appear in at least one probed cell.
    """

    def __init__(self, cell_size: float):
        if cell_size <= 0:
            raise ValueError("cell_size must be positive")
        self.cell_size = float(cell_size)
        self._segments: list[np.ndarray] = []
        self._cells: dict[tuple[int, int], list[int]] = {}

    def __len__(self) -> int:
        return len(self._segments)

    def _cell_range(self, lo: np.ndarray, hi: np.ndarray) -> tuple[int, int, int, int]:
        cx0 = int(np.floor(lo[0] / self.cell_size))
        cy0 = int(np.floor(lo[1] / self.cell_size))
        cx1 = int(np.floor(hi[0] / self.cell_size))
        cy1 = int(np.floor(hi[1] / self.cell_size))
        return cx0, cy0, cx1, cy1

    def add_segment(self, a: np.ndarray, b: np.ndarray) -> None:
        seg = np.array([a[0], a[1], b[0], b[1]], dtype=np.float64)
        idx = len(self._segments)
        self._segments.append(seg)
        lo = np.minimum(seg[:2], seg[2:])
        hi = np.maximum(seg[:2], seg[2:])
        cx0, cy0, cx1, cy1 = self._cell_range(lo, hi)
        for cx in range(cx0, cx1 + 1):
            for cy in range(cy0, cy1 + 1):
                self._cells.setdefault((cx, cy), []).append(idx)

    def add_path(self, path: np.ndarray) -> None:
        path = check_path(path)
        for i in range(len(path) - 1):
            self.add_segment(path[i], path[i + 1])

    def query(self, a: np.ndarray, b: np.ndarray, radius: float) -> np.ndarray:
        """Segments as an (m, 4) array, superset of all within radius."""
        lo = np.minimum(a, b) - radius
        hi = np.maximum(a, b) + radius
        cx0, cy0, cx1, cy1 = self._cell_range(lo, hi)
        hits: set[int] = set()
        for cx in range(cx0, cx1 + 1):
            for cy in range(cy0, cy1 + 1):
                bucket = self._cells.get((cx, cy))
                if bucket:
                    hits.update(bucket)
        if not hits:
            return np.empty((0, 4))
        return np.stack([self._segments[i] for i in sorted(hits)])


def can_place(candidate: np.ndarray, index: OccupancyIndex, clearance: float) -> bool:
    """True iff no candidate segment touches or comes within clearance of an
    indexed segment."""
    candidate = check_path(candidate)
    for i in range(len(candidate) - 1):
        a, b = candidate[i], candidate[i + 1]
        nearby = index.query(a, b, clearance)
        if len(nearby) == 0:
            continue
        d = segment_to_segments_distance(a, b, nearby[:, :2], nearby[:, 2:])
        if (d < clearance).any() or (d == 0.0).any():
            return False
    return True


def fill_shading(
    mask: np.ndarray,
    model: ModelParams,
    templates: list[StrokeGraph],
    features: list[np.ndarray],
    cfg: ShadingConfig,
    rng: np.random.Generator,
    transform,
) -> list[np.ndarray]:
    """Place stroke variations over the true mask pixels, no-touch.

    Each round samples a mask pixel and a template, draws a variation,
    scales it to cfg.stroke_size and centers its centroid on the pixel.
    The stroke is kept only if every point maps back to a true mask pixel
    and can_place holds against the features and everything placed so far.
    Stops at count_target strokes or max_rejects consecutive rejections.

    `transform` maps between page millimeters and image pixels (to_image /
    to_page); the mask is an image-resolution boolean array while output
    paths are in page millimeters.
    """
    check_mask(mask)
    placed: list[np.ndarray] = []
    pixels = np.argwhere(mask)
    if len(pixels) == 0 or not templates or cfg.count_target == 0:
        return placed

    index = OccupancyIndex(cfg.clearance + cfg.stroke_size / 4.0)
    for f in features:
        index.add_path(f)

    rows, cols = mask.shape
    rejects = 0
    while len(placed) < cfg.count_target and rejects < cfg.max_rejects:
        r, c = pixels[rng.integers(len(pixels))]
        template = templates[int(rng.integers(len(templates)))]
        path = sample_variation(template, model, cfg.noise_scale, rng)

        span = path.max(axis=0) - path.min(axis=0)
        diagonal = float(np.hypot(span[0], span[1]))
        if diagonal <= 0.0:
            rejects += 1
            continue
        path = path * (cfg.stroke_size / diagonal)
        anchor = transform.to_page(np.array([[c + 0.5, r + 0.5]], dtype=np.float64))[0]
        path = path + (anchor - path.mean(axis=0))

        pix = transform.to_image(path)
        ix = np.floor(pix[:, 0]).astype(int)
        iy = np.floor(pix[:, 1]).astype(int)
        inside = (ix >= 0) & (ix < cols) & (iy >= 0) & (iy < rows)
        if not inside.all() or not mask[iy, ix].all():
            rejects += 1
            continue
        if not can_place(path, index, cfg.clearance):
            rejects += 1
            continue

        index.add_path(path)
        placed.append(path)
        rejects = 0
    return placed
