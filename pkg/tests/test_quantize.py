"""Median-cut palettes, pixel mapping, and the darkest-color shade mask."""

from __future__ import annotations

import numpy as np
import pytest
from sklearn.exceptions import NotFittedError

from lineportrait.quantize import (
    MedianCutQuantizer,
    darkest_mask,
    map_pixels,
    median_cut,
    palette_luma,
    quantization_error,
)

from .conftest import synthetic_portrait
from .oracles import exhaustive_palette_mapping


def checkerboard(h=16, w=16) -> np.ndarray:
    img = np.zeros((h, w, 3), dtype=np.uint8)
    img[(np.indices((h, w)).sum(axis=0) % 2) == 1] = 255
    return img


def test_black_white_k2_exact_palette():
    palette = median_cut(checkerboard(), 2)
    assert sorted(map(tuple, palette.tolist())) == [(0, 0, 0), (255, 255, 255)]


def test_black_white_unbalanced_still_exact():
    img = np.zeros((10, 10, 3), dtype=np.uint8)
    img[0, 0] = 255  # 1 white pixel against 99 black
    palette = median_cut(img, 2)
    assert sorted(map(tuple, palette.tolist())) == [(0, 0, 0), (255, 255, 255)]


def test_uniform_image_single_entry():
    img = np.full((8, 8, 3), 120, dtype=np.uint8)
    for k in (1, 2, 4):
        palette = median_cut(img, k)
        assert palette.shape == (1, 3)
        assert tuple(palette[0]) == (120, 120, 120)


def test_palette_size_bounded_by_k():
    img = synthetic_portrait(80, 60)
    for k in (1, 2, 4, 8):
        palette = median_cut(img, k)
        assert 1 <= len(palette) <= k
        assert len({tuple(c) for c in palette.tolist()}) == len(palette)


def test_mapping_matches_exhaustive_scan():
    rng = np.random.default_rng(13)
    img = rng.integers(0, 256, size=(12, 14, 3), dtype=np.uint8)
    for k in (2, 4, 6):
        palette = median_cut(img, k)
        got = map_pixels(img, palette)
        want = exhaustive_palette_mapping(img, palette)
        np.testing.assert_array_equal(got, want)


def test_error_non_increasing_in_k():
    img = synthetic_portrait(80, 60)
    errors = []
    for k in (1, 2, 4, 8):
        palette = median_cut(img, k)
        errors.append(quantization_error(img, palette, map_pixels(img, palette)))
    assert all(errors[i + 1] <= errors[i] + 1e-9 for i in range(len(errors) - 1))


def test_darkest_mask_uses_luma():
    img = np.zeros((4, 6, 3), dtype=np.uint8)
    img[:, :3] = (10, 12, 8)     # dark region
    img[:, 3:] = (200, 220, 210)  # light region
    palette = median_cut(img, 2)
    indices = map_pixels(img, palette)
    mask = darkest_mask(indices, palette)
    assert mask[:, :3].all()
    assert not mask[:, 3:].any()
    lumas = palette_luma(palette)
    assert lumas[int(np.argmin(lumas))] == lumas.min()


def test_quantization_error_zero_when_exact():
    img = checkerboard()
    palette = median_cut(img, 2)
    indices = map_pixels(img, palette)
    assert quantization_error(img, palette, indices) == pytest.approx(0.0)


def test_requires_valid_k():
    img = checkerboard()
    with pytest.raises(ValueError):
        median_cut(img, 0)


def test_estimator_workflow():
    img = synthetic_portrait(60, 40)
    quantizer = MedianCutQuantizer(n_colors=4)
    with pytest.raises(NotFittedError):
        quantizer.transform(img)
    indices = quantizer.fit_transform(img)
    assert indices.shape == img.shape[:2]
    assert len(quantizer.palette_) <= 4
    mask = quantizer.shade_mask(img)
    assert mask.dtype == bool
    assert mask.shape == img.shape[:2]
    np.testing.assert_array_equal(
        mask, darkest_mask(indices, quantizer.palette_)
    )
