"""Geodesics on the metric graphs of the gasket approximations.

At a fixed level the structure is a finite weighted graph: the
finest-level triangle edges plus (stretched variant) every joining
segment, with weights equal to segment lengths.  Shortest paths between
vertices use whole edges, so distances between level-m vertices are
stable under further refinement, and the graph distance realizes the
geodesic (equivalently, spectral) distance at graph resolution.

Query points that are not graph nodes are handled per the structure of
minimal paths: interior points of joining segments split the segment
exactly; interior points of finest triangle edges are snapped to the
nearest node and the finest edge length is reported as the error bar.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

import numpy as np

from gasketlab.geometry import GasketError, GasketModel, build_model

SNAP_TOL = 1e-9


@dataclass(frozen=True)
class MetricGraph:
    """Immutable weighted graph; nodes sorted lexicographically by coordinates."""

    level: int
    nodes: np.ndarray
    arcs: tuple[tuple[int, int, float, str], ...]
    neighbors: tuple[tuple[tuple[int, float], ...], ...]

    @property
    def node_count(self) -> int:
        return len(self.nodes)


def _assemble_graph(model: GasketModel) -> MetricGraph:
    pts = np.array([e.p for e in model.edges] + [e.q for e in model.edges])
    nodes, inverse = np.unique(np.round(pts, 12), axis=0, return_inverse=True)
    n_edges = len(model.edges)
    arcs = []
    for idx, edge in enumerate(model.edges):
        u = int(inverse[idx])
        v = int(inverse[idx + n_edges])
        arcs.append((u, v, edge.length, edge.kind))
    adj: list[list[tuple[int, float]]] = [[] for _ in range(len(nodes))]
    for u, v, w, _ in arcs:
        adj[u].append((v, w))
        adj[v].append((u, w))
    neighbors = tuple(tuple(sorted(nbrs)) for nbrs in adj)
    # connectivity guard: a correct construction is always connected
    seen = np.zeros(len(nodes), dtype=bool)
    stack = [0]
    seen[0] = True
    while stack:
        u = stack.pop()
        for v, _ in neighbors[u]:
            if not seen[v]:
                seen[v] = True
                stack.append(v)
    if not seen.all():
        raise GasketError("metric graph is disconnected (construction bug)")
    nodes.flags.writeable = False
    return MetricGraph(model.level, nodes, tuple(arcs), neighbors)


@lru_cache(maxsize=16)
def _graph_of_model(model: GasketModel) -> MetricGraph:
    return _assemble_graph(model)


def to_metric_graph(model: GasketModel, level: Optional[int] = None) -> MetricGraph:
    """Metric graph of a built model, optionally at a coarser level."""
    if model.variant == "harmonic":
        raise GasketError("geodesics on the harmonic gasket are out of scope")
    if level is None or level == model.level:
        return _graph_of_model(model)
    if level > model.level:
        raise GasketError(f"level {level} exceeds model level {model.level}")
    return _graph_of_model(build_model(model.variant, level, model.alpha))


def _dijkstra(graph: MetricGraph, source: int,
              extra: Optional[dict[int, list[tuple[int, float]]]] = None):
    """Binary-heap Dijkstra; the (distance, node) heap keys break ties by
    smaller node id, keeping paths deterministic."""
    n = max(graph.node_count, (max(extra) + 1) if extra else 0)
    dist = np.full(n, math.inf)
    pred = np.full(n, -1, dtype=np.int64)
    dist[source] = 0.0
    heap = [(0.0, source)]
    while heap:
        d, u = heapq.heappop(heap)
        if d > dist[u]:
            continue
        base = graph.neighbors[u] if u < graph.node_count else ()
        patched = extra.get(u, []) if extra else []
        for v, w in list(base) + patched:
            nd = d + w
            if nd < dist[v]:
                dist[v] = nd
                pred[v] = u
                heapq.heappush(heap, (nd, v))
    return dist, pred


def distance_field(graph: MetricGraph, source: int) -> np.ndarray:
    """Graph distance from one node to every node."""
    if not 0 <= source < graph.node_count:
        raise GasketError(f"source {source} is not a node id")
    dist, _ = _dijkstra(graph, source)
    return dist


def arc_slacks(graph: MetricGraph, values: np.ndarray) -> np.ndarray:
    """Per-arc |f(u) - f(v)| - weight; nonpositive iff f is edgewise 1-Lipschitz."""
    values = np.asarray(values, dtype=float)
    out = np.empty(len(graph.arcs))
    for i, (u, v, w, _) in enumerate(graph.arcs):
        out[i] = abs(values[u] - values[v]) - w
    return out


@dataclass(frozen=True)
class _Endpoint:
    node: int                      # node id (possibly virtual)
    snap_error: float              # error-bar contribution
    arc: Optional[int] = None      # split arc index, when interior to a joining edge
    extra: tuple = ()              # overlay arcs (v, w) for a virtual node


def _locate(graph: MetricGraph, point, virtual_id: int) -> _Endpoint:
    x = np.asarray(point, dtype=float)
    if x.shape != (2,):
        raise GasketError(f"query point must be 2-d, got {point}")
    gaps = np.linalg.norm(graph.nodes - x, axis=1)
    nearest = int(np.argmin(gaps))
    if gaps[nearest] <= SNAP_TOL:
        return _Endpoint(nearest, 0.0)

    best = (math.inf, -1, 0.0)     # (segment distance, arc index, parameter t)
    for idx, (u, v, w, kind) in enumerate(graph.arcs):
        a = graph.nodes[u]
        d = graph.nodes[v] - a
        t = float(np.clip(np.dot(x - a, d) / np.dot(d, d), 0.0, 1.0))
        gap = float(np.linalg.norm(x - (a + t * d)))
        if gap < best[0]:
            best = (gap, idx, t)
    gap, idx, t = best
    if gap > SNAP_TOL:
        raise GasketError(
            f"point {tuple(x)} is not on the structure "
            f"(distance {gap:.3e} > {SNAP_TOL})"
        )
    u, v, w, kind = graph.arcs[idx]
    if kind == "stretched-joining":
        extra = ((u, t * w), (v, (1.0 - t) * w))
        return _Endpoint(virtual_id, 0.0, arc=idx, extra=extra)
    # interior of a finest triangle edge: snap to the nearer endpoint,
    # report one finest-edge length as the error bar
    node = u if t <= 0.5 else v
    return _Endpoint(int(node), w)


@dataclass(frozen=True)
class GeodesicResult:
    distance: float
    path: tuple[int, ...]
    level: int
    error_bar: float


def geodesic(
    model: GasketModel,
    p,
    q,
    level: Optional[int] = None,
) -> GeodesicResult:
    """Shortest-path distance between two points of the structure.

    Points must lie on the level's graph (nodes, joining-segment
    interiors, or finest triangle edges) within 1e-9.  Distances between
    vertices are exact and level-stable; snapped triangle-edge queries
    carry the finest edge length as error bar.
    """
    graph = to_metric_graph(model, level)
    n = graph.node_count
    src = _locate(graph, p, n)
    dst = _locate(graph, q, n + 1)

    extra: dict[int, list[tuple[int, float]]] = {}
    for ep in (src, dst):
        if ep.arc is not None:
            extra[ep.node] = list(ep.extra)
            for v, w in ep.extra:
                extra.setdefault(v, []).append((ep.node, w))
    if (src.arc is not None and src.arc == dst.arc):
        # both interior to the same joining segment: include the direct piece
        u, v, w, _ = graph.arcs[src.arc]
        a, b = graph.nodes[u], graph.nodes[v]
        tdist = abs(np.linalg.norm(np.asarray(p, float) - a)
                    - np.linalg.norm(np.asarray(q, float) - a))
        extra[src.node].append((dst.node, float(tdist)))
        extra[dst.node].append((src.node, float(tdist)))

    dist, pred = _dijkstra(graph, src.node, extra or None)
    d = float(dist[dst.node])
    if math.isinf(d):
        raise GasketError("endpoints are not connected (construction bug)")
    path = [dst.node]
    while path[-1] != src.node:
        path.append(int(pred[path[-1]]))
    return GeodesicResult(d, tuple(reversed(path)), graph.level,
                          src.snap_error + dst.snap_error)


@dataclass(frozen=True)
class WitnessReport:
    """Outcome of the distance-witness check at one target node."""

    target: int
    level: int
    arcs_checked: int
    max_arc_violation: float
    lipschitz_ok: bool
    targets_checked: int
    attained_all: bool

    @property
    def ok(self) -> bool:
        return self.lipschitz_ok and self.attained_all


def lipschitz_witness_check(
    model: GasketModel,
    q: int,
    level: Optional[int] = None,
    n_targets: int = 20,
    seed: int = 0,
) -> WitnessReport:
    """Check that h = d(., q) witnesses the spectral distance.

    The distance field from q must be 1-Lipschitz along every arc (its
    derivative bound along curves is 1) and |h(p) - h(q)| must equal the
    geodesic distance at randomly chosen nodes p, which is exactly the
    pair of facts that lets h realize the supremum defining the spectral
    distance.
    """
    graph = to_metric_graph(model, level)
    if not 0 <= q < graph.node_count:
        raise GasketError(f"witness target {q} is not a node id")
    field = distance_field(graph, q)
    slacks = arc_slacks(graph, field)
    rng = np.random.default_rng(seed)
    targets = rng.integers(0, graph.node_count, size=n_targets)
    attained = all(
        abs(field[t] - field[q]) == field[t] for t in targets
    )
    return WitnessReport(
        target=q,
        level=graph.level,
        arcs_checked=len(graph.arcs),
        max_arc_violation=float(slacks.max()),
        lipschitz_ok=bool((slacks <= 1e-12).all()),
        targets_checked=n_targets,
        attained_all=bool(attained),
    )
