"""Discrete measure functionals and the Dixmier-trace measure estimates.

Three weighted point-set functionals, one per gasket variant, sample
continuous functions along the construction:

* classical gasket: uniform average over the 3^(n+1) cell-edge midpoints
  at level n;
* harmonic gasket: the same average pushed through the harmonic
  embedding;
* stretched gasket: uniform average over the 2 * 3^n endpoints of the
  joining segments born at stage n.

Each family satisfies the exact one-step self-affinity identity
psi_{n+1}(f) = (1/3) sum_j psi_n(f . G_j) with its generators G_j, and
converges weak-* to the variant's self-affine measure (the Hausdorff
measure for the stretched gasket).  ``dixmier_functional`` estimates the
measure a second way, through the residue of the f-weighted trace
series, which lets the two routes be compared.

``selfaffine_mass_spread`` quantifies why the harmonic-gasket Dixmier
measure cannot be a Hausdorff measure: the self-affine mass of a depth-L
cell is exactly 3^(-L) (constant across cells), while Hausdorff mass is
comparable to ||M_w||^d, which varies with the letter pattern of w, not
just its length.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from gasketlab import harmonic
from gasketlab.geometry import (
    GasketError,
    GasketModel,
    check_alpha,
    compose_word,
    sg_hierarchy,
    stretched_hierarchy,
)
from gasketlab.spectrum import (
    ResidueResult,
    curve_trace_constant,
    extrapolate_ladder,
    stretched_dimension,
)

PointFunction = Callable[[np.ndarray], np.ndarray]

FAMILIES = ("sg", "harmonic", "stretched")


def _evaluate(f: PointFunction, points: np.ndarray) -> np.ndarray:
    values = np.asarray(f(points), dtype=float)
    if values.shape != (len(points),):
        raise GasketError(
            f"test function returned shape {values.shape}, expected ({len(points)},)"
        )
    return values


# ---------------------------------------------------------------------------
# Functional samples
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FunctionalSample:
    """Weighted evaluation points of one discrete functional."""

    tag: str
    level: int
    points: np.ndarray
    weights: np.ndarray

    def __call__(self, f: PointFunction) -> float:
        return float(self.weights @ _evaluate(f, self.points))


def _sg_midpoints(n: int) -> np.ndarray:
    mesh = sg_hierarchy(n)[n]
    corners = mesh.points[mesh.cells]                    # (C, 3, 2)
    mids = np.stack([(corners[:, 0] + corners[:, 1]) / 2.0,
                     (corners[:, 0] + corners[:, 2]) / 2.0,
                     (corners[:, 1] + corners[:, 2]) / 2.0], axis=1)
    return mids.reshape(-1, 2)


def functional_sample(tag: str, n: int, alpha: Optional[float] = None) -> FunctionalSample:
    """Build the point set and weights of one functional.

    Tags: ``sg-midpoints`` and ``harmonic-midpoints`` need n >= 0;
    ``stretched-joining`` needs n >= 1 (no joining edges exist before
    stage 1) and the variant's alpha.
    """
    if tag == "sg-midpoints":
        pts = _sg_midpoints(n)
    elif tag == "harmonic-midpoints":
        # midpoints of level-n cells are the fresh vertices of level n+1,
        # appended as (m_ab, m_ac, m_bc) per cell in cell order
        count = harmonic.vertex_count(n)
        pts = harmonic.phi_coordinates(n + 1)[count:]
    elif tag == "stretched-joining":
        if alpha is None:
            raise GasketError("stretched-joining functional requires alpha")
        if n < 1:
            raise GasketError("stretched-joining functional needs n >= 1")
        meshes, joins = stretched_hierarchy(n, check_alpha(alpha))
        ids = joins[n - 1].reshape(-1, 2).reshape(-1)
        pts = meshes[n].points[ids]
    else:
        raise GasketError(f"unknown functional tag {tag!r}")
    weights = np.full(len(pts), 1.0 / len(pts))
    return FunctionalSample(tag, n, pts, weights)


def sg_midpoint_functional(n: int, f: PointFunction) -> float:
    """Average of f over the cell-edge midpoints of the level-n gasket."""
    return functional_sample("sg-midpoints", n)(f)


def harmonic_midpoint_functional(n: int, h: PointFunction) -> float:
    """Average of h over the embedded midpoints; equals the flat
    functional applied to h composed with the embedding."""
    return functional_sample("harmonic-midpoints", n)(h)


def joining_edge_functional(n: int, f: PointFunction, alpha: float) -> float:
    """Average of f over the endpoints of the stage-n joining segments."""
    return functional_sample("stretched-joining", n, alpha)(f)


# ---------------------------------------------------------------------------
# Self-affinity
# ---------------------------------------------------------------------------


def self_affinity_residual(
    family: str,
    n: int,
    f: PointFunction,
    alpha: Optional[float] = None,
) -> float:
    """|psi_{n+1}(f) - (1/3) sum_j psi_n(f . G_j)| for one functional family.

    Both sides enumerate the same weighted point set, so the residual is
    zero to rounding for every family.
    """
    if family not in FAMILIES:
        raise GasketError(f"unknown family {family!r}; pick one of {FAMILIES}")
    if family == "sg":
        psi = lambda m, g: sg_midpoint_functional(m, g)
        maps = [compose_word("sg", (j,)) for j in (1, 2, 3)]
    elif family == "stretched":
        if alpha is None:
            raise GasketError("stretched family requires alpha")
        psi = lambda m, g: joining_edge_functional(m, g, alpha)
        maps = [compose_word("stretched", (j,), alpha) for j in (1, 2, 3)]
    else:
        psi = lambda m, g: harmonic_midpoint_functional(m, g)
        maps = [harmonic.corner_map(j) for j in (1, 2, 3)]

    lhs = psi(n + 1, f)
    rhs = sum(psi(n, lambda pts, _g=g: f(_g(pts))) for g in maps) / 3.0
    return abs(lhs - rhs)


# ---------------------------------------------------------------------------
# Dixmier functionals
# ---------------------------------------------------------------------------


def _stretched_generation_sums(model: GasketModel, f: PointFunction):
    """Sums of edge-endpoint means of f, per generation and edge type."""
    meshes, joins = stretched_hierarchy(model.level, model.alpha)
    tri_sums = []
    for m in range(model.level + 1):
        pts = meshes[m].points
        cells = meshes[m].cells
        fa = _evaluate(f, pts[cells[:, 0]])
        fb = _evaluate(f, pts[cells[:, 1]])
        fc = _evaluate(f, pts[cells[:, 2]])
        tri_sums.append(float(((fa + fc) / 2 + (fc + fb) / 2 + (fb + fa) / 2).sum()))
    join_sums = []
    for m in range(model.level):
        ids = joins[m].reshape(-1, 2)
        pts = meshes[m + 1].points
        vals = (_evaluate(f, pts[ids[:, 0]]) + _evaluate(f, pts[ids[:, 1]])) / 2.0
        join_sums.append(float(vals.sum()))
    return tri_sums, join_sums


def dixmier_functional(
    model: GasketModel,
    f: PointFunction,
    eps_start: float = 0.1,
    rungs: int = 8,
) -> ResidueResult:
    """Residue estimate of the f-weighted Dixmier trace on the stretched gasket.

    Evaluates (s-1) sum_j fbar_j beta_{ds*s} l_j^{ds*s} on the epsilon
    ladder and Richardson-extrapolates to s -> 1+.  Edges beyond the
    model's level enter through a geometric tail whose per-curve f
    average is frozen at the deepest computed generation (the averages
    converge weak-*, so the tail bias shrinks with the model level).
    Converges to (Dixmier constant) * (self-affine integral of f).
    """
    if model.variant != "stretched":
        raise GasketError("dixmier_functional needs a stretched model")
    alpha = model.alpha
    ds = stretched_dimension(alpha)
    ratio = (1.0 - alpha) / 2.0
    n = model.level
    tri_sums, join_sums = _stretched_generation_sums(model, f)
    tri_avg = tri_sums[-1] / 3 ** (n + 1)
    join_avg = (join_sums[-1] / 3 ** n) if join_sums else tri_avg

    def g(eps: float) -> float:
        p = ds * (1.0 + eps)
        total = sum(s * ratio ** (m * p) for m, s in enumerate(tri_sums))
        total += sum(s * (alpha * ratio ** m) ** p for m, s in enumerate(join_sums))
        q = 3.0 * ratio ** p
        total += tri_avg * 3.0 * q ** (n + 1) / (1.0 - q)
        total += join_avg * 3.0 * alpha ** p * q ** n / (1.0 - q)
        return eps * curve_trace_constant(p) * total

    return extrapolate_ladder(g, eps_start, rungs)


def kh_dixmier_ratio(
    f: PointFunction,
    depth: int,
    eps_start: float = 0.4,
    rungs: int = 8,
) -> tuple[float, float]:
    """Interval estimate of tau(f)/tau(1) for the harmonic-gasket trace.

    Curve lengths are only known as intervals, so the trace-ratio limit
    is evaluated once per length side (polyline bound, envelope bound),
    each at its own growth-root exponent, and the min/max returned.  The
    ratio cancels the unknown normalization; its limit is the
    self-affine integral of f, so it should be compared against the
    embedded midpoint functionals at large n.
    """
    tables = harmonic.edge_length_tables(depth, depth)

    fbar_sums = []
    for gen in range(depth + 1):
        mesh = sg_hierarchy(gen)[gen]
        imgs = harmonic.phi_coordinates(gen)[mesh.cells]     # (C, 3, 3)
        fa = _evaluate(f, imgs[:, 0])
        fb = _evaluate(f, imgs[:, 1])
        fc = _evaluate(f, imgs[:, 2])
        fbar = np.stack([(fa + fc) / 2, (fc + fb) / 2, (fb + fa) / 2], axis=1)
        fbar_sums.append(fbar.reshape(-1))

    def ratio_limit(side: int) -> float:
        lengths = [t[side] for t in tables]
        f_last = float(fbar_sums[-1].mean())

        def last_ratio(p: float) -> float:
            return float(np.sum(lengths[-1] ** p) / np.sum(lengths[-2] ** p))

        # this side's pole: the exponent at which the frozen geometric
        # tail would stop converging
        lo_p, hi_p = 1.0, 3.0
        for _ in range(60):
            mid = 0.5 * (lo_p + hi_p)
            if last_ratio(mid) > 1.0:
                lo_p = mid
            else:
                hi_p = mid
        ds = 0.5 * (lo_p + hi_p)

        def ratio(eps: float) -> float:
            p = ds * (1.0 + eps)
            terms = np.array([np.sum(lengths[m] ** p) for m in range(depth + 1)])
            num = sum(float(fbar_sums[m] @ lengths[m] ** p) for m in range(depth + 1))
            den = float(terms.sum())
            gr = terms[-1] / terms[-2]
            tail = terms[-1] * gr / (1.0 - gr)
            return (num + f_last * tail) / (den + tail)

        return extrapolate_ladder(ratio, eps_start, rungs).value

    corners = [ratio_limit(side) for side in (0, 1)]
    return min(corners), max(corners)


# ---------------------------------------------------------------------------
# Self-affine mass vs norm-power mass
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SpreadReport:
    """Range of 3^L ||M_w||^d over all words of length L.

    Self-affine cell masses times 3^L are identically 1, so any spread
    above 1 separates the self-affine measure from a d-dimensional
    Hausdorff measure, whose cell masses track ||M_w||^d.
    """

    L: int
    d: float
    min: float
    max: float
    ratio: float


def selfaffine_mass_spread(d: float, word_length: int) -> SpreadReport:
    """Spread of norm-power cell masses across all words of one length."""
    if d <= 0.0:
        raise GasketError("dimension parameter d must be positive")
    if not 1 <= word_length <= 8:
        raise GasketError("word length limited to 1..8")
    st = harmonic.harmonic_structure()
    basis = np.stack([st.corner_axes[:, 0], st.corner_perps[:, 0]], axis=1)
    mats2 = [basis.T @ m @ basis for m in st.contractions]
    prods = np.eye(2)[None, :, :]
    for _ in range(word_length):
        prods = np.einsum("wij,mjk->wmik", prods, np.stack(mats2)).reshape(-1, 2, 2)
    norms = np.linalg.svd(prods, compute_uv=False)[:, 0]
    masses = 3.0 ** word_length * norms ** d
    return SpreadReport(
        L=word_length,
        d=float(d),
        min=float(masses.min()),
        max=float(masses.max()),
        ratio=float(masses.max() / masses.min()),
    )
