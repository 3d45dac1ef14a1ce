"""Dominant-color palette via modified median cut, and the shading mask.

Boxes are split at the population median along their longest channel axis.
The first half of the splits are prioritized by population alone, the rest
by population x volume, which is the "modified" rule: early splits chase
dominant colors, later ones stop huge sparse boxes from starving.
The darkest palette entry (Rec. 601 luma) defines the region eligible for
pattern shading.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError

from .raster import LUMA_WEIGHTS
from .validation import check_rgb_image


@dataclass
class _Box:
    samples: np.ndarray  # (population, 3) int64

    @property
    def population(self) -> int:
        return len(self.samples)

    @property
    def ranges(self) -> np.ndarray:
        return self.samples.max(axis=0) - self.samples.min(axis=0)

    @property
    def volume(self) -> int:
        return int(np.prod(self.ranges + 1))

    def splittable(self) -> bool:
        return self.population >= 2 and bool((self.ranges > 0).any())

    def split(self) -> tuple["_Box", "_Box"]:
        channel = int(np.argmax(self.ranges))
        ordered = self.samples[np.argsort(self.samples[:, channel], kind="stable")]
        values = ordered[:, channel]
        # Split at the value boundary nearest the population median, so equal
        # values never straddle the cut (a box of pure black and pure white
        # always separates exactly).
        boundaries = np.nonzero(values[1:] != values[:-1])[0] + 1
        target = len(values) / 2.0
        b = int(boundaries[np.argmin(np.abs(boundaries - target))])
        return _Box(ordered[:b]), _Box(ordered[b:])

    def mean_color(self) -> tuple[int, int, int]:
        mean = np.rint(self.samples.mean(axis=0)).astype(np.int64)
        return (int(mean[0]), int(mean[1]), int(mean[2]))


def median_cut(img: np.ndarray, n_colors: int) -> np.ndarray:
    """Extract up to n_colors dominant colors as a (k, 3) uint8 palette."""
    img = check_rgb_image(img)
    if n_colors < 1:
        raise ValueError(f"n_colors must be >= 1, got {n_colors}")
    boxes = [_Box(img.reshape(-1, 3).astype(np.int64))]
    while len(boxes) < n_colors:
        splits_done = len(boxes) - 1
        by_population = splits_done < n_colors // 2
        best_idx, best_priority = -1, -1
        for i, box in enumerate(boxes):
            if not box.splittable():
                continue
            priority = box.population if by_population else box.population * box.volume
            if priority > best_priority:
                best_idx, best_priority = i, priority
        if best_idx < 0:
            break  # image has fewer distinct colors than requested
        lower, upper = boxes[best_idx].split()
        boxes[best_idx : best_idx + 1] = [lower, upper]
    colors: list[tuple[int, int, int]] = []
    for box in boxes:
        c = box.mean_color()
        if c not in colors:
            colors.append(c)
    return np.array(colors, dtype=np.uint8)


def map_pixels(img: np.ndarray, palette: np.ndarray) -> np.ndarray:
    """Assign each pixel the palette index with minimal squared RGB distance.

    Exhaustive scan over the palette; ties go to the lowest index.
    """
    img = check_rgb_image(img)
    palette = np.asarray(palette, dtype=np.int64)
    if palette.ndim != 2 or palette.shape[1] != 3 or len(palette) == 0:
        raise ValueError("palette must be a non-empty (k, 3) array")
    flat = img.reshape(-1, 3).astype(np.int64)
    best_dist = np.full(len(flat), np.iinfo(np.int64).max, dtype=np.int64)
    best_idx = np.zeros(len(flat), dtype=np.int32)
    for i, color in enumerate(palette):
        dist = ((flat - color) ** 2).sum(axis=1)
        closer = dist < best_dist
        best_dist[closer] = dist[closer]
        best_idx[closer] = i
    return best_idx.reshape(img.shape[:2])


def palette_luma(palette: np.ndarray) -> np.ndarray:
    r, g, b = LUMA_WEIGHTS
    palette = np.asarray(palette, dtype=np.float64)
    return r * palette[:, 0] + g * palette[:, 1] + b * palette[:, 2]


def darkest_mask(indices: np.ndarray, palette: np.ndarray) -> np.ndarray:
    """True where the pixel quantizes to the darkest (lowest-luma) entry."""
    if len(palette) == 0:
        raise ValueError("palette must be non-empty")
    darkest = int(np.argmin(palette_luma(palette)))
    return np.asarray(indices) == darkest


def quantization_error(img: np.ndarray, palette: np.ndarray, indices: np.ndarray) -> float:
    """Sum of squared RGB distances between pixels and their palette entry."""
    flat = check_rgb_image(img).reshape(-1, 3).astype(np.int64)
    assigned = np.asarray(palette, dtype=np.int64)[np.asarray(indices).ravel()]
    return float(((flat - assigned) ** 2).sum())


class MedianCutQuantizer(BaseEstimator):
    """Learns a dominant-color palette from an image and maps pixels onto it.

    fit(image) extracts the palette, transform(image) yields the per-pixel
    palette index map, shade_mask(image) the darkest-color region.
    """

    def __init__(self, n_colors: int = 4):
        self.n_colors = n_colors

    def fit(self, X: np.ndarray, y=None):
        self.palette_ = median_cut(X, self.n_colors)
        return self

    def transform(self, X: np.ndarray) -> np.ndarray:
        if not hasattr(self, "palette_"):
            raise NotFittedError("MedianCutQuantizer is not fitted yet")
        return map_pixels(X, self.palette_)

    def fit_transform(self, X: np.ndarray, y=None) -> np.ndarray:
        return self.fit(X).transform(X)

    def shade_mask(self, X: np.ndarray) -> np.ndarray:
        return darkest_mask(self.transform(X), self.palette_)
