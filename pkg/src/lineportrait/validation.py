"""Input validation helpers.

Images travel through the pipeline as numpy arrays: RGB images are
``(height, width, 3)`` uint8, grayscale images are ``(height, width)``
floats in [0, 1], edge maps and shade masks are ``(height, width)`` bool.
Paths are ``(n, 2)`` float arrays of x/y coordinates.
"""

from __future__ import annotations

import numpy as np


def check_rgb_image(img: np.ndarray) -> np.ndarray:
    img = np.asarray(img)
    if img.ndim != 3 or img.shape[2] != 3:
        raise ValueError(f"expected (height, width, 3) RGB array, got shape {img.shape}")
    if img.shape[0] < 1 or img.shape[1] < 1:
        raise ValueError("image must be at least 1x1 pixel")
    if img.dtype != np.uint8:
        raise ValueError(f"expected uint8 pixels, got dtype {img.dtype}")
    return img


def check_gray_image(img: np.ndarray) -> np.ndarray:
    img = np.asarray(img, dtype=np.float64)
    if img.ndim != 2:
        raise ValueError(f"expected (height, width) grayscale array, got shape {img.shape}")
    if img.size and (img.min() < 0.0 or img.max() > 1.0):
        raise ValueError("grayscale values must lie in [0, 1]")
    return img


def check_mask(mask: np.ndarray) -> np.ndarray:
    mask = np.asarray(mask)
    if mask.ndim != 2:
        raise ValueError(f"expected (height, width) boolean array, got shape {mask.shape}")
    if mask.dtype != np.bool_:
        raise ValueError(f"expected boolean mask, got dtype {mask.dtype}")
    return mask


def check_path(path: np.ndarray, min_points: int = 2) -> np.ndarray:
    path = np.asarray(path, dtype=np.float64)
    if path.ndim != 2 or path.shape[1] != 2:
        raise ValueError(f"expected (n, 2) path array, got shape {path.shape}")
    if path.shape[0] < min_points:
        raise ValueError(f"path needs at least {min_points} points, got {path.shape[0]}")
    if not np.all(np.isfinite(path)):
        raise ValueError("path contains non-finite coordinates")
    return path


def check_paths(paths, min_points: int = 2) -> list[np.ndarray]:
    return [check_path(p, min_points=min_points) for p in paths]
