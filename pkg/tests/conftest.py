"""Shared fixtures: synthetic portrait photos, a template sketch, models."""

from __future__ import annotations

import io

import numpy as np
import pytest
from PIL import Image

from lineportrait.strokemodel import StrokeVariationModel


def synthetic_portrait(width: int, height: int) -> np.ndarray:
    """A portrait-like test image: light backdrop, dark hair, midtone face,
    a few high-contrast facial lines."""
    yy, xx = np.mgrid[0:height, 0:width]
    cx, cy = width / 2.0, height * 0.55
    img = np.full((height, width, 3), 225, dtype=np.uint8)

    face = ((xx - cx) / (width * 0.22)) ** 2 + ((yy - cy) / (height * 0.37)) ** 2 <= 1.0
    img[face] = (190, 165, 140)
    hair = (
        ((xx - cx) / (width * 0.25)) ** 2 + ((yy - height * 0.4) / (height * 0.31)) ** 2 <= 1.0
    ) & (yy < height * 0.44)
    img[hair] = (40, 30, 25)
    for ex in (cx - width * 0.085, cx + width * 0.085):
        eye = ((xx - ex) / (width * 0.034)) ** 2 + ((yy - height * 0.52) / (height * 0.02)) ** 2 <= 1.0
        img[eye] = (70, 60, 55)
    mouth = (np.abs(yy - (height * 0.69 + 0.0005 * (xx - cx) ** 2)) < max(2, height * 0.006)) & (
        np.abs(xx - cx) < width * 0.07
    )
    img[mouth] = (120, 60, 60)
    return img


def png_bytes(img: np.ndarray) -> bytes:
    buf = io.BytesIO()
    Image.fromarray(img).save(buf, format="PNG")
    return buf.getvalue()


def template_sketch_svg(n_strokes: int = 12, seed: int = 42) -> bytes:
    """A small sketch of curved strokes, the kind a template pattern uses."""
    rng = np.random.default_rng(seed)
    parts = []
    for i in range(n_strokes):
        x0, y0 = 10 + (i % 4) * 30, 10 + (i // 4) * 30
        dx = rng.uniform(8, 20)
        dy = rng.uniform(-12, 12)
        parts.append(
            f'<path d="M {x0} {y0} '
            f"C {x0 + dx / 3:.2f} {y0 + dy:.2f} {x0 + 2 * dx / 3:.2f} {y0 - dy:.2f} "
            f'{x0 + dx:.2f} {y0 + dy / 2:.2f}"/>'
        )
    svg = (
        '<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 130 100">'
        + "".join(parts)
        + "</svg>"
    )
    return svg.encode("utf-8")


@pytest.fixture(scope="session")
def portrait_image() -> np.ndarray:
    return synthetic_portrait(640, 480)


@pytest.fixture(scope="session")
def portrait_png(portrait_image: np.ndarray) -> bytes:
    return png_bytes(portrait_image)


@pytest.fixture(scope="session")
def small_portrait_png() -> bytes:
    return png_bytes(synthetic_portrait(160, 120))


@pytest.fixture(scope="session")
def sketch_svg() -> bytes:
    return template_sketch_svg()


@pytest.fixture(scope="session")
def trained_model(sketch_svg: bytes) -> StrokeVariationModel:
    """A model trained just long enough to produce usable stroke variations."""
    from lineportrait.templates import load_template_svg

    model = StrokeVariationModel(epochs=800, random_state=0)
    model.fit(load_template_svg(sketch_svg))
    return model


@pytest.fixture(scope="session")
def model_file(trained_model: StrokeVariationModel, tmp_path_factory) -> str:
    path = tmp_path_factory.mktemp("model") / "model.json"
    trained_model.save(path)
    return str(path)
