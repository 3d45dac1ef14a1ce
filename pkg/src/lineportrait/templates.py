"""Template sketch ingestion.

Template sketches arrive as SVG files; every <path> element is flattened to
a polyline. Line segments pass through, Bezier segments are sampled at 64
subdivisions. Arcs are rejected: freehand sketch exports do not use them.
"""

from __future__ import annotations

import re
import xml.etree.ElementTree as ET

import numpy as np

BEZIER_SUBDIVISIONS = 64

_TOKEN = re.compile(r"([MmLlHhVvCcSsQqTtZzAa])|([+-]?(?:\d*\.\d+|\d+\.?)(?:[eE][+-]?\d+)?)")

# Parameter count per SVG path command (Z takes none).
_ARITY = {"M": 2, "L": 2, "H": 1, "V": 1, "C": 6, "S": 4, "Q": 4, "T": 2}


def _tokenize(d: str):
    # Anything between tokens other than separators is an unsupported
    # command; skipping it silently would turn its arguments into linetos.
    end = 0
    for match in _TOKEN.finditer(d):
        gap = d[end : match.start()].strip(" \t\r\n,")
        if gap:
            raise ValueError(f"unsupported path data character {gap[0]!r}")
        cmd, num = match.groups()
        yield (cmd, None) if cmd else (None, float(num))
        end = match.end()
    tail = d[end:].strip(" \t\r\n,")
    if tail:
        raise ValueError(f"unsupported path data character {tail[0]!r}")


def _cubic_points(p0, c1, c2, p1) -> list[np.ndarray]:
    t = np.linspace(0.0, 1.0, BEZIER_SUBDIVISIONS + 1)[1:, None]
    u = 1.0 - t
    pts = u**3 * p0 + 3 * u**2 * t * c1 + 3 * u * t**2 * c2 + t**3 * p1
    return list(pts)

def _quadratic_points(p0, c, p1) -> list[np.ndarray]:
    t = np.linspace(0.0, 1.0, BEZIER_SUBDIVISIONS + 1)[1:, None]
    u = 1.0 - t
    pts = u**2 * p0 + 2 * u * t * c + t**2 * p1
    return list(pts)


def parse_path_data(d: str) -> list[np.ndarray]:
    """Flatten an SVG path `d` string into one polyline per subpath."""
    tokens = list(_tokenize(d))
    pos = 0

    def take_numbers(count: int) -> list[float]:
        nonlocal pos
        values = []
        for _ in range(count):
            if pos >= len(tokens) or tokens[pos][0] is not None:
                raise ValueError(f"malformed path data near token {pos}: {d[:80]!r}")
            values.append(tokens[pos][1])
            pos += 1
        return values

    subpaths: list[list[np.ndarray]] = []
    current: list[np.ndarray] = []
    point = np.zeros(2)
    subpath_start = np.zeros(2)
    last_cubic_ctrl: np.ndarray | None = None
    last_quad_ctrl: np.ndarray | None = None
    command = None

    def flush():
        nonlocal current
        if len(current) >= 2:
            subpaths.append(current)
        current = []

    while pos < len(tokens):
        cmd_token = tokens[pos][0]
        if cmd_token is not None:
            command = cmd_token
            pos += 1
            if command in "Aa":
                raise ValueError("arc commands are not supported in template sketches")
        elif command is None:
            raise ValueError("path data must start with a moveto command")
        elif command in "Mm":
            # Implicit linetos after a moveto.
            command = "L" if command == "M" else "l"

        upper = command.upper()
        relative = command.islower()
        if upper == "Z":
            if len(current) >= 1 and not np.array_equal(current[-1], subpath_start):
                current.append(subpath_start.copy())
            flush()
            point = subpath_start.copy()
            command = None
            last_cubic_ctrl = last_quad_ctrl = None
            continue

        values = take_numbers(_ARITY[upper])
        if upper == "M":
            target = np.array(values)
            point = point + target if relative else target
            flush()
            subpath_start = point.copy()
            current = [point.copy()]
        elif upper in ("L", "T", "H", "V"):
            if upper == "L":
                target = np.array(values)
                target = point + target if relative else target
            elif upper == "H":
                target = np.array([point[0] + values[0] if relative else values[0], point[1]])
            elif upper == "V":
                target = np.array([point[0], point[1] + values[0] if relative else values[0]])
            else:  # T: quadratic with reflected control point
                end = np.array(values)
                end = point + end if relative else end
                ctrl = 2 * point - last_quad_ctrl if last_quad_ctrl is not None else point.copy()
                current.extend(_quadratic_points(point, ctrl, end))
                last_quad_ctrl = ctrl
                point = end
                last_cubic_ctrl = None
                continue
            if not current:
                current = [point.copy()]
            current.append(target.copy())
            point = target
            last_cubic_ctrl = last_quad_ctrl = None
        elif upper in ("C", "S"):
            if upper == "C":
                c1 = np.array(values[0:2])
                c2 = np.array(values[2:4])
                end = np.array(values[4:6])
                if relative:
                    c1, c2, end = point + c1, point + c2, point + end
            else:
                c1 = 2 * point - last_cubic_ctrl if last_cubic_ctrl is not None else point.copy()
                c2 = np.array(values[0:2])
                end = np.array(values[2:4])
                if relative:
                    c2, end = point + c2, point + end
            if not current:
                current = [point.copy()]
            current.extend(_cubic_points(point, c1, c2, end))
            last_cubic_ctrl = c2
            last_quad_ctrl = None
            point = end
        elif upper == "Q":
            ctrl = np.array(values[0:2])
            end = np.array(values[2:4])
            if relative:
                ctrl, end = point + ctrl, point + end
            if not current:
                current = [point.copy()]
            current.extend(_quadratic_points(point, ctrl, end))
            last_quad_ctrl = ctrl
            last_cubic_ctrl = None
            point = end
    flush()

    polylines = []
    for pts in subpaths:
        arr = np.array(pts, dtype=np.float64)
        seg = np.linalg.norm(np.diff(arr, axis=0), axis=1)
        arr = arr[np.concatenate(([True], seg > 0))]
        if len(arr) >= 2:
            polylines.append(arr)
    return polylines


def load_template_svg(data: bytes | str) -> list[np.ndarray]:
    """Extract all stroke polylines from an SVG template sketch."""
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    try:
        root = ET.fromstring(data)
    except ET.ParseError as exc:
        raise ValueError(f"not parseable as SVG: {exc}") from exc
    strokes: list[np.ndarray] = []
    for element in root.iter():
        tag = element.tag.rsplit("}", 1)[-1]
        if tag == "path" and element.get("d"):
            strokes.extend(parse_path_data(element.get("d")))
    return strokes
