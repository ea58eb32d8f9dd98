"""Discrete energy forms on the gasket and the harmonic embedding.

The vertex energy at level n is the sum of squared differences over the
3^(n+1) cell-edge pairs, each pair counted once.  Extending vertex data
to the next level so the energy is minimal decouples cell by cell: the
three new midpoint values of a cell depend only on its corner values,
through a linear rule derived here by solving the normal equations of
the one-cell quadratic form (it comes out as (2a+2b+c)/5 for the
midpoint opposite c).  Under that extension the energy contracts by
exactly 3/5 per level, so (5/3)^n E_n is the level-independent
renormalized energy.

Embedding the gasket through the triple of harmonic functions with
Kronecker boundary data,

    Phi(x) = ((h1(x), h2(x), h3(x)) - (1/3, 1/3, 1/3)) / sqrt(2),

gives the harmonic gasket: a self-affine set in the plane
Z = {x + y + z = 0} generated by three affine contractions with
singular values 3/5 and 1/5.  Each contraction fixes one corner image
Phi(p_j) and satisfies the exact intertwining
``Phi . f_j = (corner map j) . Phi`` with the midpoint contractions f_j
of the flat gasket.  (The axis unit vectors q_j of the contractions have
the corner images at q_j/sqrt(3); the corner image, not q_j itself, is
the fixed point under this normalization of Phi.)

Image edges have no closed-form length; ``estimate_edge_length`` brackets
them between a dyadic polyline length (below) and a sampled-diameter
envelope (above).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from gasketlab.geometry import (
    CORNERS,
    GasketError,
    GasketModel,
    EdgeCurve,
    ResourceCapError,
    TRIANGLE_EDGE_CORNERS,
    Word,
    AffineMap,
    as_word,
    cell_index,
    edge_cap,
    index_word,
    sg_hierarchy,
)

SQRT2 = math.sqrt(2.0)
SQRT3 = math.sqrt(3.0)
SQRT6 = math.sqrt(6.0)


# ---------------------------------------------------------------------------
# Vertex functions and energy
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class VertexFunction:
    """Real-valued data on the level-n vertex set, in canonical id order."""

    level: int
    values: np.ndarray

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=float)
        expected = vertex_count(self.level)
        if values.shape != (expected,):
            raise GasketError(
                f"level {self.level} needs {expected} values, got {values.shape}"
            )
        object.__setattr__(self, "values", values)


def vertex_count(level: int) -> int:
    return 3 * (3 ** level + 1) // 2


def boundary_function(a: float, b: float, c: float) -> VertexFunction:
    """Level-0 data with values (a, b, c) at the corners p1, p2, p3."""
    return VertexFunction(0, np.array([a, b, c], dtype=float))


def _derive_midpoint_rule() -> np.ndarray:
    """Solve the one-cell normal equations for the minimizing midpoints.

    Unknowns are the midpoints (m_ab, m_ac, m_bc) of a single cell with
    corner values (a, b, c) held fixed; the quadratic form is the next
    level's energy restricted to the cell's three sub-cells.  Returns R
    with (m_ab, m_ac, m_bc) = R @ (a, b, c).
    """
    # variable order: a, b, c, m_ab, m_ac, m_bc
    pairs = [(0, 3), (0, 4), (3, 4),      # sub-cell at corner a
             (3, 1), (3, 5), (1, 5),      # sub-cell at corner b
             (4, 5), (4, 2), (5, 2)]      # sub-cell at corner c
    q = np.zeros((6, 6))
    for i, j in pairs:
        q[i, i] += 1.0
        q[j, j] += 1.0
        q[i, j] -= 1.0
        q[j, i] -= 1.0
    q_mm = q[3:, 3:]
    q_mc = q[3:, :3]
    return np.linalg.solve(q_mm, -q_mc)


MIDPOINT_RULE = _derive_midpoint_rule()


def energy(fn: VertexFunction) -> float:
    """Level-n energy: squared differences over cell edges, each pair once.

    Two cells share at most one vertex, so iterating the three corner
    pairs of every cell counts each neighbor pair exactly once.
    """
    cells = sg_hierarchy(fn.level)[fn.level].cells
    v = fn.values[cells]
    return float(((v[:, 0] - v[:, 1]) ** 2
                  + (v[:, 0] - v[:, 2]) ** 2
                  + (v[:, 1] - v[:, 2]) ** 2).sum())


def harmonic_extend(fn: VertexFunction) -> VertexFunction:
    """Minimal-energy extension to the next vertex set.

    Applies the midpoint rule cell by cell; new values are appended in
    the canonical id order of the refined mesh.
    """
    cells = sg_hierarchy(fn.level + 1)[fn.level].cells
    corner_vals = fn.values[cells]                     # (C, 3)
    new_vals = corner_vals @ MIDPOINT_RULE.T           # (C, 3) = m_ab, m_ac, m_bc
    return VertexFunction(
        fn.level + 1, np.concatenate([fn.values, new_vals.reshape(-1)])
    )


def renormalized_energy(fn: VertexFunction) -> float:
    """(5/3)^n E_n; constant in n along harmonic extensions."""
    return (5.0 / 3.0) ** fn.level * energy(fn)


# ---------------------------------------------------------------------------
# The embedding Phi
# ---------------------------------------------------------------------------


@lru_cache(maxsize=16)
def _h_arrays(level: int) -> tuple[np.ndarray, ...]:
    """(N_m, 3) arrays of the three basis harmonics on V_m, m = 0..level."""
    fns = [np.eye(3)]
    for m in range(level):
        cells = sg_hierarchy(m + 1)[m].cells
        corner_vals = fns[-1][cells]                       # (C, 3, 3)
        new_vals = np.einsum("ij,cjk->cik", MIDPOINT_RULE, corner_vals)
        arr = np.concatenate([fns[-1], new_vals.reshape(-1, 3)])
        arr.flags.writeable = False
        fns.append(arr)
    return tuple(fns)


def phi_coordinates(level: int) -> np.ndarray:
    """Images of all level-n vertices under the harmonic embedding, (N, 3)."""
    return (_h_arrays(level)[level] - 1.0 / 3.0) / SQRT2


@lru_cache(maxsize=16)
def _vertex_lookup(level: int) -> dict[tuple[float, float], int]:
    pts = sg_hierarchy(level)[level].points
    return {tuple(np.round(p, 12)): i for i, p in enumerate(pts)}


def vertex_id(point, level: int) -> int:
    """Canonical id of a level-n vertex, matched to 1e-12."""
    key = tuple(np.round(np.asarray(point, dtype=float), 12))
    table = _vertex_lookup(level)
    if key not in table:
        raise GasketError(f"{point} is not a vertex of the level-{level} gasket")
    return table[key]


def phi(point, level: int) -> np.ndarray:
    """Harmonic-embedding image of one level-n vertex."""
    return phi_coordinates(level)[vertex_id(point, level)]


# ---------------------------------------------------------------------------
# Affine structure of the harmonic gasket
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class HarmonicStructure:
    """The plane Z, its corner axes, and the three affine contractions.

    ``projector`` is the orthogonal projection of R^3 onto Z;
    ``corner_axes`` holds the unit vectors q_j = 3 P b_j / sqrt(6) as
    columns and ``corner_perps`` their in-plane orthogonal complements
    q'_j.  ``contractions[j]`` acts as 3/5 along q_j, 1/5 along q'_j and
    0 across Z; it does not depend on the sign choice of q'_j.  The
    affine corner maps fix the corner images Phi(p_j) = q_j / sqrt(3).
    """

    projector: np.ndarray
    corner_axes: np.ndarray
    corner_perps: np.ndarray
    contractions: tuple[np.ndarray, ...]
    corner_images: np.ndarray


def _make_structure(qprime_sign: float) -> HarmonicStructure:
    projector = (np.full((3, 3), -1.0) + 3.0 * np.eye(3)) / 3.0
    axes = 3.0 * projector / SQRT6                       # columns q_j
    normal = np.ones(3) / SQRT3
    perps = np.stack([qprime_sign * np.cross(normal, axes[:, j])
                      for j in range(3)], axis=1)
    contractions = tuple(
        0.6 * np.outer(axes[:, j], axes[:, j])
        + 0.2 * np.outer(perps[:, j], perps[:, j])
        for j in range(3)
    )
    for arr in contractions:
        arr.flags.writeable = False
    images = axes / SQRT3
    for arr in (projector, axes, perps, images):
        arr.flags.writeable = False
    return HarmonicStructure(projector, axes, perps, contractions, images)


@lru_cache(maxsize=4)
def harmonic_structure(qprime_sign: float = 1.0) -> HarmonicStructure:
    """Structure constants; ``qprime_sign`` flips the q' orientation."""
    if qprime_sign not in (1.0, -1.0):
        raise GasketError("qprime_sign must be +1.0 or -1.0")
    return _make_structure(qprime_sign)


def corner_map(j: int) -> AffineMap:
    """Affine contraction of the harmonic gasket fixing corner image j."""
    if not 1 <= j <= 3:
        raise GasketError(f"corner map index must be 1..3, got {j}")
    st = harmonic_structure()
    return AffineMap.from_fixed_point(st.contractions[j - 1],
                                      st.corner_images[:, j - 1])


def word_map(word) -> AffineMap:
    """Composition of corner maps along a word, first letter applied first.

    Matches the flat-gasket convention, so the intertwining with Phi
    holds word by word.
    """
    w = as_word(word)
    out = AffineMap.identity(3)
    for letter in w.letters:
        out = corner_map(letter).after(out)
    return out


def word_matrix(word, qprime_sign: float = 1.0) -> np.ndarray:
    """Ordered product of contraction matrices along a word (first letter leftmost)."""
    st = harmonic_structure(qprime_sign)
    out = np.eye(3)
    for letter in as_word(word).letters:
        out = out @ st.contractions[letter - 1]
    return out


def m_word_norm(word, qprime_sign: float = 1.0) -> float:
    """Spectral norm of the contraction-matrix product along a word."""
    return float(np.linalg.norm(word_matrix(word, qprime_sign), 2))


# ---------------------------------------------------------------------------
# Image-edge length bounds
# ---------------------------------------------------------------------------


def _require_levels(level: int) -> None:
    if 3 ** level > edge_cap():
        raise ResourceCapError(
            f"length estimation needs {3 ** level} cells at level {level}, "
            f"cap is {edge_cap()}"
        )


def _dyadic_offsets(i: int, j: int, depth: int) -> np.ndarray:
    """Base-3 row offsets of the depth-k cells along local edge (i, j).

    Walking the edge from corner i to corner j visits the descendant
    cells whose address suffixes run over {i, j}^k in binary counting
    order with i < j.
    """
    offs = np.zeros(1, dtype=np.int64)
    for _ in range(depth):
        offs = np.concatenate([offs * 3 + i, offs * 3 + j])
    return offs


def _segment_bounds(gen: int, depth: int, phis) -> tuple[np.ndarray, np.ndarray]:
    """Per-edge (lo, hi) arrays for all generation-``gen`` edges.

    Edge order matches the model enumeration: word-major, local-minor.
    Lower bound: chord polyline through the 2^k+1 dyadic vertex images.
    Upper bound: per segment, twice the diameter of the owning depth
    (gen+k) cell, sampled from its corner and midpoint images.
    """
    level = gen + depth
    cells_fine = sg_hierarchy(level + 1)[level].cells
    cells_next = sg_hierarchy(level + 1)[level + 1].cells
    phi_next = phis[level + 1]
    ncell = 3 ** gen
    lo = np.empty((ncell, 3))
    hi = np.empty((ncell, 3))
    rows0 = np.arange(ncell, dtype=np.int64) * 3 ** depth
    for local, (i, j) in enumerate(TRIANGLE_EDGE_CORNERS):
        rows = (rows0[:, None] + _dyadic_offsets(i, j, depth)[None, :]).reshape(-1)
        corners = cells_fine[rows]
        pi = phi_next[corners[:, i]]
        pj = phi_next[corners[:, j]]
        chords = np.linalg.norm(pi - pj, axis=1)
        lo[:, local] = chords.reshape(ncell, -1).sum(axis=1)
        # six sampled points per segment cell: 3 corners + 3 midpoints
        child0 = rows * 3
        mids = np.stack([cells_next[child0][:, 1],
                         cells_next[child0][:, 2],
                         cells_next[child0 + 1][:, 2]], axis=1)
        sample = phi_next[np.concatenate([corners, mids], axis=1)]
        gaps = np.linalg.norm(sample[:, :, None, :] - sample[:, None, :, :], axis=-1)
        diam = gaps.max(axis=(1, 2))
        hi[:, local] = 2.0 * diam.reshape(ncell, -1).sum(axis=1)
    return lo.reshape(-1), hi.reshape(-1)


@lru_cache(maxsize=8)
def edge_length_tables(max_gen: int, depth: int):
    """Length-bound tables [(lo, hi)] for generations 0..max_gen (cached)."""
    if depth < 1:
        raise GasketError("subdivision depth must be >= 1")
    _require_levels(max_gen + depth + 1)
    phis = [phi_coordinates(m) for m in range(max_gen + depth + 2)]
    tables = []
    for gen in range(max_gen + 1):
        lo, hi = _segment_bounds(gen, depth, phis)
        lo.flags.writeable = False
        hi.flags.writeable = False
        tables.append((lo, hi))
    return tuple(tables)


def estimate_edge_length(word, local_edge: int, depth: int) -> tuple[float, float]:
    """Length bounds for the image of one triangle edge.

    ``word`` addresses the owning cell, ``local_edge`` is the local index
    1..3, ``depth`` the dyadic subdivision depth k >= 1.  Returns
    (polyline lower bound, sampled-diameter upper bound).
    """
    w = as_word(word)
    if not 1 <= local_edge <= 3:
        raise GasketError("local edge index must be 1..3")
    tables = edge_length_tables(len(w), depth)
    lo, hi = tables[len(w)]
    pos = 3 * cell_index(w) + (local_edge - 1)
    return float(lo[pos]), float(hi[pos])


def edge_polyline(word, local_edge: int, depth: int) -> np.ndarray:
    """Dyadic sample points of one image edge, (2^k + 1, 3)."""
    w = as_word(word)
    gen = len(w)
    level = gen + depth
    _require_levels(level)
    i, j = TRIANGLE_EDGE_CORNERS[local_edge - 1]
    cells = sg_hierarchy(level)[level].cells
    phis = phi_coordinates(level)
    rows = cell_index(w) * 3 ** depth + _dyadic_offsets(i, j, depth)
    corners = cells[rows]
    pts = np.empty((len(rows) + 1, 3))
    pts[:-1] = phis[corners[:, i]]
    pts[-1] = phis[corners[-1, j]]
    return pts


def gasket_diameter(level: int = 4) -> float:
    """Sampled diameter of the embedded gasket (max over vertex images)."""
    pts = phi_coordinates(level)
    gaps = np.linalg.norm(pts[:, None, :] - pts[None, :, :], axis=-1)
    return float(gaps.max())


def build_harmonic_model(level: int, depth: int = 4) -> GasketModel:
    """Edge-list model of the harmonic gasket at one level.

    Mirrors the classical skeleton; endpoints are vertex images in the
    plane Z and each edge carries polyline/envelope length bounds at the
    given subdivision depth.  The ``length`` field holds the lower
    (polyline) estimate.
    """
    mesh = sg_hierarchy(level)[level]
    phis = phi_coordinates(level)
    lo, hi = edge_length_tables(level, depth)[level]
    edges = []
    eid = 0
    for row in range(mesh.cell_count):
        corners = mesh.cells[row]
        word = str(index_word(level, row))
        for local, (i, j) in enumerate(TRIANGLE_EDGE_CORNERS):
            edges.append(EdgeCurve(
                id=eid, kind="harmonic-image", gen=level,
                p=tuple(phis[corners[i]]), q=tuple(phis[corners[j]]),
                length=float(lo[eid]), word=word,
                length_lo=float(lo[eid]), length_hi=float(hi[eid]),
            ))
            eid += 1
    return GasketModel("harmonic", None, level, tuple(edges))
