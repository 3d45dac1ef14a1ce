"""Order and orient all lines for minimal pen-up travel, emit plotter SVG.

The order is a greedy nearest-endpoint tour: from the current pen position
pick the unvisited path whose nearer endpoint is closest and reverse it when
its far endpoint was selected. Plotters draw that order fast; it looks
deliberately non-human on paper, which is part of the charm.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .exceptions import GeometryError
from .validation import check_paths


@dataclass(frozen=True)
class PageTransform:
    """Uniform map between source (image pixel) and page (mm) coordinates."""

    scale: float
    offset_x: float
    offset_y: float

    def to_page(self, points: np.ndarray) -> np.ndarray:
        points = np.asarray(points, dtype=np.float64)
        return points * self.scale + np.array([self.offset_x, self.offset_y])

    def to_image(self, points: np.ndarray) -> np.ndarray:
        points = np.asarray(points, dtype=np.float64)
        return (points - np.array([self.offset_x, self.offset_y])) / self.scale


@dataclass
class PlotDocument:
    """Ordered, oriented polylines in millimeters plus the page geometry."""

    paths: list[np.ndarray] = field(default_factory=list)
    page_width: float = 148.0
    page_height: float = 210.0
    pen_width: float = 0.5

    def __post_init__(self):
        if self.page_width <= 0 or self.page_height <= 0 or self.pen_width <= 0:
            raise ValueError("page dimensions and pen width must be positive")
        self.paths = check_paths(self.paths)
        tol = 1e-6
        for i, path in enumerate(self.paths):
            if (
                (path[:, 0] < -tol).any()
                or (path[:, 0] > self.page_width + tol).any()
                or (path[:, 1] < -tol).any()
                or (path[:, 1] > self.page_height + tol).any()
            ):
                raise ValueError(f"path {i} leaves the page bounds")


@dataclass(frozen=True)
class PlanStats:
    pen_down_mm: float
    pen_up_mm: float
    path_count: int

    def as_dict(self) -> dict:
        return {
            "pen_down_mm": self.pen_down_mm,
            "pen_up_mm": self.pen_up_mm,
            "path_count": self.path_count,
        }


def order_paths(
    paths: list[np.ndarray], start: tuple[float, float] = (0.0, 0.0)
) -> list[np.ndarray]:
    """Greedy nearest-endpoint tour from `start`.

    Each step selects the remaining path whose nearer endpoint is closest to
    the pen, reversing the path when that endpoint is its last point. Ties
    go to the lowest original index, and an endpoint tie keeps the original
    orientation.
    """
    paths = check_paths(paths)
    if not paths:
        return []
    starts = np.stack([p[0] for p in paths])
    ends = np.stack([p[-1] for p in paths])
    alive = np.ones(len(paths), dtype=bool)
    pos = np.asarray(start, dtype=np.float64)

    ordered: list[np.ndarray] = []
    for _ in range(len(paths)):
        d_start = np.linalg.norm(starts - pos, axis=1)
        d_end = np.linalg.norm(ends - pos, axis=1)
        nearest = np.minimum(d_start, d_end)
        nearest[~alive] = np.inf
        pick = int(np.argmin(nearest))
        alive[pick] = False
        if d_end[pick] < d_start[pick]:
            chosen = paths[pick][::-1].copy()
        else:
            chosen = paths[pick]
        ordered.append(chosen)
        pos = chosen[-1]
    return ordered


def order_paths_human(
    features: list[np.ndarray], shading: list[np.ndarray]
) -> list[np.ndarray]:
    """A watchable order: feature lines first, each group top to bottom."""
    def top_down(paths: list[np.ndarray]) -> list[np.ndarray]:
        keyed = sorted(
            enumerate(paths),
            key=lambda item: (item[1][:, 1].min(), item[1][:, 0].min(), item[0]),
        )
        return [p for _, p in keyed]

    return top_down(check_paths(features)) + top_down(check_paths(shading))


def scale_to_page(
    paths: list[np.ndarray],
    page_width: float,
    page_height: float,
    margin: float,
    frame: tuple[float, float, float, float] | None = None,
) -> tuple[list[np.ndarray], PageTransform]:
    """Uniformly scale and center content into the page minus margins.

    By default the joint bounding box of the paths is fitted; `frame`
    (xmin, ymin, xmax, ymax) fits a fixed source rectangle instead, so
    several path groups can share one transform.
    """
    paths = check_paths(paths)
    if page_width - 2 * margin <= 0 or page_height - 2 * margin <= 0:
        raise ValueError("margins leave no drawable area")
    if frame is None:
        if not paths:
            raise GeometryError("cannot fit an empty path set without a frame")
        all_points = np.concatenate(paths)
        xmin, ymin = all_points.min(axis=0)
        xmax, ymax = all_points.max(axis=0)
    else:
        xmin, ymin, xmax, ymax = map(float, frame)
    width = xmax - xmin
    height = ymax - ymin
    if width <= 0 and height <= 0:
        raise GeometryError("degenerate bounding box")

    avail_w = page_width - 2 * margin
    avail_h = page_height - 2 * margin
    candidates = []
    if width > 0:
        candidates.append(avail_w / width)
    if height > 0:
        candidates.append(avail_h / height)
    scale = min(candidates)
    offset_x = margin + (avail_w - scale * width) / 2 - scale * xmin
    offset_y = margin + (avail_h - scale * height) / 2 - scale * ymin
    transform = PageTransform(scale=scale, offset_x=offset_x, offset_y=offset_y)
    return [transform.to_page(p) for p in paths], transform


def stats(doc: PlotDocument) -> PlanStats:
    """Pen-down length plus pen-up travel, measured from the page origin."""
    pen_down = 0.0
    pen_up = 0.0
    pos = np.zeros(2)
    for path in doc.paths:
        pen_up += float(np.linalg.norm(path[0] - pos))
        pen_down += float(np.linalg.norm(np.diff(path, axis=0), axis=1).sum())
        pos = path[-1]
    return PlanStats(pen_down_mm=pen_down, pen_up_mm=pen_up, path_count=len(doc.paths))


def _fmt(value: float) -> str:
    return f"{value:.4f}"


def to_svg(doc: PlotDocument) -> bytes:
    """Standalone millimeter-unit SVG, one polyline per path in plot order."""
    w = _fmt(doc.page_width)
    h = _fmt(doc.page_height)
    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{w}mm" height="{h}mm" '
        f'viewBox="0 0 {w} {h}">',
        f'<g fill="none" stroke="black" stroke-width="{_fmt(doc.pen_width)}" '
        'stroke-linecap="round" stroke-linejoin="round">',
    ]
    for path in doc.paths:
        points = " ".join(f"{_fmt(x)},{_fmt(y)}" for x, y in path)
        lines.append(f'<polyline points="{points}"/>')
    lines.append("</g>")
    lines.append("</svg>")
    return "\n".join(lines).encode("utf-8")
