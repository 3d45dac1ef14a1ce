"""Independent reference implementations used to cross-check the package.

Everything here is deliberately written with different algorithms than the
code under test: plain loops instead of vectorization, Lumelsky's clamped
parametric segment distance instead of the endpoint/crossing decomposition,
a regex SVG reader instead of the emitter's formatting.
"""

from __future__ import annotations

import re

import numpy as np


def brute_force_nearest(points, query, within=None):
    """Nearest point by exhaustive scan with the package's tie rule:
    smallest squared distance, then lowest (y, x). Exact integer math."""
    best = None
    best_key = None
    qx, qy = query
    for (px, py) in points:
        d2 = (px - qx) ** 2 + (py - qy) ** 2
        if within is not None and d2 >= within * within:
            continue
        key = (d2, py, px)
        if best_key is None or key < best_key:
            best_key = key
            best = (px, py)
    return best


def point_to_segment_distance(p, a, b) -> float:
    p = np.asarray(p, dtype=np.float64)
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    ab = b - a
    denom = float(ab @ ab)
    if denom == 0.0:
        return float(np.linalg.norm(p - a))
    t = min(1.0, max(0.0, float((p - a) @ ab) / denom))
    return float(np.linalg.norm(p - (a + t * ab)))


def lumelsky_segment_distance(p1, p2, q1, q2) -> float:
    """Minimum distance between segments via clamped closed-form parameters
    (Lumelsky 1985), iterating the clamp once per parameter."""
    p1 = np.asarray(p1, dtype=np.float64)
    p2 = np.asarray(p2, dtype=np.float64)
    q1 = np.asarray(q1, dtype=np.float64)
    q2 = np.asarray(q2, dtype=np.float64)
    d1 = p2 - p1
    d2 = q2 - q1
    r = p1 - q1
    a = float(d1 @ d1)
    e = float(d2 @ d2)
    f = float(d2 @ r)
    if a == 0.0 and e == 0.0:
        return float(np.linalg.norm(p1 - q1))
    if a == 0.0:
        t = min(1.0, max(0.0, f / e))
        return float(np.linalg.norm(p1 - (q1 + t * d2)))
    c = float(d1 @ r)
    if e == 0.0:
        s = min(1.0, max(0.0, -c / a))
        return float(np.linalg.norm(p1 + s * d1 - q1))
    b = float(d1 @ d2)
    denom = a * e - b * b
    s = min(1.0, max(0.0, (b * f - c * e) / denom)) if denom != 0.0 else 0.0
    t = (b * s + f) / e
    if t < 0.0:
        t = 0.0
        s = min(1.0, max(0.0, -c / a))
    elif t > 1.0:
        t = 1.0
        s = min(1.0, max(0.0, (b - c) / a))
    return float(np.linalg.norm((p1 + s * d1) - (q1 + t * d2)))


def min_distance_between_paths(path_a, path_b) -> float:
    """All-pairs minimum segment distance between two polylines."""
    best = np.inf
    for i in range(len(path_a) - 1):
        for j in range(len(path_b) - 1):
            d = lumelsky_segment_distance(path_a[i], path_a[i + 1], path_b[j], path_b[j + 1])
            best = min(best, d)
    return best


def exhaustive_palette_mapping(img, palette):
    """Nearest palette entry per pixel by plain loops over entries, lowest
    index on ties."""
    h, w = img.shape[:2]
    img = img.astype(np.int64)
    palette = palette.astype(np.int64)
    out = np.zeros((h, w), dtype=np.int64)
    for y in range(h):
        for x in range(w):
            best = 0
            best_d = None
            for k, color in enumerate(palette):
                diff = img[y, x] - color
                d = int(diff @ diff)
                if best_d is None or d < best_d:
                    best_d = d
                    best = k
            out[y, x] = best
    return out


def parse_svg_polylines(svg: bytes):
    """Read back polylines and page size from an emitted SVG, using only
    regular expressions so no emitter code is shared."""
    text = svg.decode("utf-8")
    size = re.search(r'width="([0-9.]+)mm"\s+height="([0-9.]+)mm"', text)
    assert size is not None, "no millimeter page size found"
    paths = []
    for match in re.finditer(r'<polyline[^>]*points="([^"]*)"', text):
        pts = [
            [float(v) for v in pair.split(",")]
            for pair in match.group(1).split()
        ]
        paths.append(np.array(pts, dtype=np.float64))
    return paths, (float(size.group(1)), float(size.group(2)))


def numeric_gradient(loss_fn, arr, h=1e-4):
    """Central finite differences of a scalar function over one array."""
    grad = np.zeros_like(arr)
    flat = arr.reshape(-1)
    gflat = grad.reshape(-1)
    for i in range(flat.size):
        orig = flat[i]
        flat[i] = orig + h
        hi = loss_fn()
        flat[i] = orig - h
        lo = loss_fn()
        flat[i] = orig
        gflat[i] = (hi - lo) / (2.0 * h)
    return grad
