"""Read and write the paths JSON interchange format.

The format carries a list of polylines plus the source image size and the
configuration that produced them:

    {"paths": [[[x, y], ...], ...], "image_size": [w, h], "config": {...}}
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .validation import check_paths


def paths_to_payload(
    paths: list[np.ndarray], image_size: tuple[int, int], config: dict | None = None
) -> dict:
    paths = check_paths(paths)
    w, h = image_size
    if w <= 0 or h <= 0:
        raise ValueError(f"image_size must be positive, got {image_size}")
    return {
        "paths": [p.tolist() for p in paths],
        "image_size": [int(w), int(h)],
        "config": dict(config or {}),
    }


def paths_from_payload(payload: dict) -> tuple[list[np.ndarray], tuple[int, int], dict]:
    try:
        raw_paths = payload["paths"]
        w, h = payload["image_size"]
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"malformed paths payload: {exc}") from exc
    paths = check_paths([np.asarray(p, dtype=np.float64) for p in raw_paths])
    return paths, (int(w), int(h)), dict(payload.get("config", {}))


def write_paths_json(
    path: str | Path,
    paths: list[np.ndarray],
    image_size: tuple[int, int],
    config: dict | None = None,
) -> None:
    payload = paths_to_payload(paths, image_size, config)
    Path(path).write_text(json.dumps(payload), encoding="utf-8")


def read_paths_json(path: str | Path) -> tuple[list[np.ndarray], tuple[int, int], dict]:
    payload = json.loads(Path(path).read_text(encoding="utf-8"))
    return paths_from_payload(payload)
