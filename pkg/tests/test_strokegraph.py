"""Stroke graphs: delta encoding, chain+hub edges, resampling."""

from __future__ import annotations

import numpy as np
import pytest

from lineportrait.exceptions import GeometryError
from lineportrait.strokegraph import (
    StrokeGraph,
    adjacency_matrix,
    normalized_adjacency,
    path_from_deltas,
    resample_stroke,
    stroke_edges,
    stroke_graph_propagation,
)


def test_edge_count_is_2n_minus_3():
    for n in (4, 8, 16, 32):
        edges = stroke_edges(n)
        assert len(edges) == 2 * n - 3
        assert len(set(edges)) == len(edges)
        # chain edges plus hub edges from vertex 0 to every vertex >= 2
        assert (0, 1) in edges
        assert (0, 2) in edges
        assert (n - 2, n - 1) in edges


def test_adjacency_symmetric_no_self_loops():
    A = adjacency_matrix(8)
    np.testing.assert_array_equal(A, A.T)
    assert np.trace(A) == 0
    assert A[0].sum() == 7  # hub touches everything
    assert A[3].sum() == 3  # chain neighbors plus the hub


def test_normalized_adjacency_matches_manual_formula():
    A = adjacency_matrix(8)
    A_hat = A + np.eye(8)
    deg = A_hat.sum(axis=1)
    manual = A_hat / np.sqrt(np.outer(deg, deg))
    np.testing.assert_allclose(normalized_adjacency(A), manual, atol=1e-12)
    np.testing.assert_allclose(stroke_graph_propagation(8), manual, atol=1e-12)


def test_resample_first_delta_zero_and_unit_diagonal():
    t = np.linspace(0, np.pi, 50)
    path = np.stack([np.cos(t) * 3, np.sin(t) * 3], axis=1)
    g = resample_stroke(path, 16)
    assert g.n == 16
    np.testing.assert_array_equal(g.deltas[0], [0.0, 0.0])
    pts = g.points()
    span = pts.max(axis=0) - pts.min(axis=0)
    assert np.hypot(*span) == pytest.approx(1.0)
    assert g.scale == pytest.approx(np.hypot(6, 3), rel=1e-2)


def test_resample_equal_arc_spacing():
    path = np.array([[0.0, 0.0], [10.0, 0.0]])
    g = resample_stroke(path, 8)
    steps = np.linalg.norm(np.diff(g.points(), axis=0), axis=1)
    np.testing.assert_allclose(steps, steps[0], rtol=1e-9)


def test_resample_rejects_degenerate_and_bad_n():
    with pytest.raises(GeometryError):
        resample_stroke(np.array([[1.0, 1.0], [1.0, 1.0]]), 8)
    with pytest.raises(ValueError):
        resample_stroke(np.array([[0.0, 0.0], [1.0, 0.0]]), 6)


def test_points_deltas_round_trip():
    rng = np.random.default_rng(2)
    path = np.cumsum(rng.normal(0, 1, size=(40, 2)), axis=0)
    g = resample_stroke(path, 32)
    restored = path_from_deltas(g.deltas, 1.0)
    np.testing.assert_allclose(restored, g.points(), atol=1e-12)
    scaled = path_from_deltas(g.deltas, g.scale)
    span = scaled.max(axis=0) - scaled.min(axis=0)
    assert np.hypot(*span) == pytest.approx(g.scale)


def test_path_from_deltas_ignores_first_row():
    deltas = np.array([[5.0, 5.0], [1.0, 0.0], [0.0, 1.0]])
    path = path_from_deltas(deltas)
    np.testing.assert_array_equal(path[0], [0.0, 0.0])
    np.testing.assert_array_equal(path[-1], [1.0, 1.0])


def test_stroke_graph_validates():
    with pytest.raises(ValueError):
        StrokeGraph(deltas=np.zeros((6, 2)), scale=1.0)  # n not divisible by 4
    with pytest.raises(ValueError):
        StrokeGraph(deltas=np.zeros((8, 2)), scale=0.0)
    bad = np.zeros((8, 2))
    bad[0] = (1.0, 0.0)
    with pytest.raises(ValueError):
        StrokeGraph(deltas=bad, scale=1.0)
