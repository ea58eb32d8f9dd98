"""Metric graphs, geodesics, and the distance-witness check."""

import math

import numpy as np
import pytest
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import dijkstra as scipy_dijkstra

import gasketlab as gl
from gasketlab.geometry import EdgeCurve, GasketError, GasketModel
from gasketlab.metric import arc_slacks, distance_field, to_metric_graph

SQ3 = math.sqrt(3.0)


def _node_id(graph, point):
    gaps = np.linalg.norm(graph.nodes - np.asarray(point, float), axis=1)
    idx = int(np.argmin(gaps))
    assert gaps[idx] < 1e-9
    return idx


def _scipy_distances(graph, source):
    n = graph.node_count
    rows, cols, weights = [], [], []
    for u, v, w, _ in graph.arcs:
        rows += [u, v]
        cols += [v, u]
        weights += [w, w]
    mat = csr_matrix((weights, (rows, cols)), shape=(n, n))
    return scipy_dijkstra(mat, indices=source)


# -- graph construction ------------------------------------------------------

def test_stretched_level_one_graph():
    graph = to_metric_graph(gl.build_model("stretched", 1, 0.2))
    assert graph.node_count == 9
    joining = [a for a in graph.arcs if a[3] == "stretched-joining"]
    triangle = [a for a in graph.arcs if a[3] == "stretched-triangle"]
    assert len(triangle) == 9
    assert len(joining) == 3
    assert all(w == pytest.approx(0.2, abs=1e-15) for _, _, w, _ in joining)


def test_sg_level_one_graph():
    graph = to_metric_graph(gl.build_model("sg", 1))
    assert graph.node_count == 6
    assert len(graph.arcs) == 9
    assert all(w == pytest.approx(0.5, abs=1e-15) for _, _, w, _ in graph.arcs)


def test_interior_cell_corner_has_degree_three():
    graph = to_metric_graph(gl.build_model("stretched", 2, 0.2))
    node = _node_id(graph, (0.4, 0.0))     # corner shared with a joining arc
    degree = len(graph.neighbors[node])
    assert degree == 3
    kinds = sorted(k for u, v, _, k in graph.arcs if node in (u, v))
    assert kinds == ["stretched-joining", "stretched-triangle",
                     "stretched-triangle"]


def test_disconnected_construction_is_rejected():
    edges = (
        EdgeCurve(0, "sg-triangle", 0, (0.0, 0.0), (1.0, 0.0), 1.0, ""),
        EdgeCurve(1, "sg-triangle", 0, (5.0, 5.0), (6.0, 5.0), 1.0, ""),
    )
    with pytest.raises(GasketError):
        to_metric_graph(GasketModel("sg", None, 0, edges))


def test_harmonic_graphs_are_out_of_scope():
    with pytest.raises(GasketError):
        to_metric_graph(gl.build_model("harmonic", 1))


# -- geodesics ---------------------------------------------------------------

def test_bottom_boundary_telescopes_to_one():
    model = gl.build_model("stretched", 3, 0.2)
    for level in (1, 2, 3):
        res = gl.geodesic(model, (0.0, 0.0), (1.0, 0.0), level)
        assert res.distance == pytest.approx(1.0, abs=1e-12)
        assert res.error_bar == 0.0


def test_distance_to_first_cell_corner():
    model = gl.build_model("stretched", 3, 0.2)
    res = gl.geodesic(model, (0.0, 0.0), (0.4, 0.0))
    assert res.distance == pytest.approx(0.4, abs=1e-12)


def test_point_to_itself():
    model = gl.build_model("stretched", 2, 0.2)
    res = gl.geodesic(model, (0.0, 0.0), (0.0, 0.0))
    assert res.distance == 0.0
    assert res.path == (res.path[0],)


def test_path_arcs_exist_and_sum():
    model = gl.build_model("stretched", 3, 0.2)
    graph = to_metric_graph(model)
    res = gl.geodesic(model, (0.0, 0.0), (1.0, 0.0))
    arcweights = {}
    for u, v, w, _ in graph.arcs:
        arcweights[(u, v)] = w
        arcweights[(v, u)] = w
    total = sum(arcweights[(a, b)] for a, b in zip(res.path, res.path[1:]))
    assert total == pytest.approx(res.distance, abs=1e-12)


def test_against_scipy_dijkstra():
    model = gl.build_model("stretched", 3, 0.25)
    graph = to_metric_graph(model)
    rng = np.random.default_rng(2)
    for source in rng.integers(0, graph.node_count, size=5):
        ours = distance_field(graph, int(source))
        ref = _scipy_distances(graph, int(source))
        np.testing.assert_allclose(ours, ref, atol=1e-12)


def test_metric_axioms_on_random_triples():
    model = gl.build_model("stretched", 2, 0.2)
    graph = to_metric_graph(model)
    rng = np.random.default_rng(4)
    fields = {i: distance_field(graph, i) for i in range(graph.node_count)}
    for _ in range(50):
        a, b, c = rng.integers(0, graph.node_count, size=3)
        assert fields[a][b] == pytest.approx(fields[b][a], abs=1e-12)
        assert fields[a][c] <= fields[a][b] + fields[b][c] + 1e-12
        assert fields[a][b] > 0 or a == b


def test_geodesic_dominates_euclidean():
    model = gl.build_model("stretched", 2, 0.2)
    graph = to_metric_graph(model)
    rng = np.random.default_rng(9)
    for _ in range(25):
        a, b = rng.integers(0, graph.node_count, size=2)
        d = distance_field(graph, int(a))[b]
        euclid = np.linalg.norm(graph.nodes[a] - graph.nodes[b])
        assert d >= euclid - 1e-12


def test_level_stability_for_coarse_vertices():
    model = gl.build_model("stretched", 5, 0.2)
    coarse = to_metric_graph(model, 2)
    rng = np.random.default_rng(6)
    pairs = rng.integers(0, coarse.node_count, size=(8, 2))
    for a, b in pairs:
        base = gl.geodesic(model, coarse.nodes[a], coarse.nodes[b], 2).distance
        for level in (3, 4, 5):
            again = gl.geodesic(model, coarse.nodes[a], coarse.nodes[b], level)
            assert again.distance == pytest.approx(base, abs=1e-12)


def test_sg_bottom_edge_is_unit_at_every_level():
    model = gl.build_model("sg", 5)
    for level in range(1, 6):
        res = gl.geodesic(model, (0.0, 0.0), (1.0, 0.0), level)
        assert res.distance == pytest.approx(1.0, abs=1e-12)


def test_joining_edge_interior_point_splits_exactly():
    model = gl.build_model("stretched", 4, 0.2)
    res = gl.geodesic(model, (0.0, 0.0), (0.5, 0.0))
    assert res.distance == pytest.approx(0.5, abs=1e-12)
    assert res.error_bar == 0.0
    # both endpoints interior to the same joining segment
    res = gl.geodesic(model, (0.45, 0.0), (0.55, 0.0))
    assert res.distance == pytest.approx(0.1, abs=1e-12)


def test_triangle_edge_interior_point_snaps_with_error_bar():
    model = gl.build_model("stretched", 2, 0.2)
    # interior of the bottom edge of the corner cell at level 2
    res = gl.geodesic(model, (0.03, 0.0), (0.4, 0.0))
    assert res.error_bar == pytest.approx(0.4 ** 2, abs=1e-12)
    assert res.distance == pytest.approx(0.4, abs=1e-12)  # snapped to the corner


def test_off_structure_point_is_rejected():
    model = gl.build_model("stretched", 2, 0.2)
    with pytest.raises(GasketError):
        gl.geodesic(model, (0.5, 0.1), (0.0, 0.0))


# -- witness check -----------------------------------------------------------

def test_witness_check_passes_at_corner():
    model = gl.build_model("stretched", 3, 0.2)
    graph = to_metric_graph(model)
    report = gl.lipschitz_witness_check(model, _node_id(graph, (0.0, 0.0)))
    assert report.ok
    assert report.max_arc_violation <= 1e-12
    assert report.arcs_checked == len(graph.arcs)
    assert report.targets_checked == 20


def test_constant_field_is_one_lipschitz():
    graph = to_metric_graph(gl.build_model("stretched", 2, 0.2))
    slacks = arc_slacks(graph, np.zeros(graph.node_count))
    assert (slacks <= 0.0).all()


def test_doubled_distance_field_violates_an_arc():
    model = gl.build_model("stretched", 2, 0.2)
    graph = to_metric_graph(model)
    field = distance_field(graph, 0)
    slacks = arc_slacks(graph, 2.0 * field)
    assert slacks.max() > 1e-6


def test_witness_target_validation():
    model = gl.build_model("stretched", 1, 0.2)
    with pytest.raises(GasketError):
        gl.lipschitz_witness_check(model, 99)
