"""Shared test oracles, kept independent of the code paths they check."""

import numpy as np

from gasketlab.geometry import sg_hierarchy
from gasketlab.harmonic import vertex_count


def full_energy_matrix(level: int) -> np.ndarray:
    """Dense quadratic form of the level-n energy, assembled edge by edge."""
    cells = sg_hierarchy(level)[level].cells
    n = int(cells.max()) + 1
    mat = np.zeros((n, n))
    for a, b, c in cells:
        for i, j in ((a, b), (a, c), (b, c)):
            mat[i, i] += 1.0
            mat[j, j] += 1.0
            mat[i, j] -= 1.0
            mat[j, i] -= 1.0
    return mat


def dense_minimum_energy_extension(level: int, values: np.ndarray) -> np.ndarray:
    """Extend level-n vertex data to level n+1 by one global normal-equation
    solve over all new vertices at once (no per-cell rule involved)."""
    values = np.asarray(values, dtype=float)
    mat = full_energy_matrix(level + 1)
    n_fixed = vertex_count(level)
    a = mat[n_fixed:, n_fixed:]
    b = mat[n_fixed:, :n_fixed]
    free = np.linalg.solve(a, -b @ values)
    return np.concatenate([values, free])


def oracle_phi(level: int) -> np.ndarray:
    """Harmonic-embedding images of all level-n vertices, computed through
    the dense minimization route."""
    h = np.eye(3)
    for m in range(level):
        h = dense_minimum_energy_extension(m, h)
    return (h - 1.0 / 3.0) / np.sqrt(2.0)


def brute_zeta(p: float, terms: int = 1_000_000) -> float:
    """Direct zeta summation with a midpoint-rule integral tail."""
    n = np.arange(1.0, terms + 1)
    return float(np.sum(n ** (-p))) + (terms + 0.5) ** (1.0 - p) / (p - 1.0)


def brute_beta(p: float) -> float:
    """Unit-curve trace constant via scipy's zeta (independent route)."""
    from scipy.special import zeta as sp_zeta

    return 2.0 ** (p + 1) * (1.0 - 2.0 ** (-p)) * float(sp_zeta(p)) / np.pi ** p


def brute_stretched_trace(alpha: float, p: float, generations: int = 400) -> float:
    """Generation-wise trace summation with the exact geometric tail.

    Per generation n there are 3^(n+1) triangle curves of length
    ((1-alpha)/2)^n and 3^(n+1) joining curves of length
    alpha*((1-alpha)/2)^n.
    """
    ratio = (1.0 - alpha) / 2.0
    q = 3.0 * ratio ** p
    n = np.arange(generations)
    partial = float(np.sum(3.0 * (1.0 + alpha ** p) * q ** n))
    tail = 3.0 * (1.0 + alpha ** p) * q ** generations / (1.0 - q)
    return brute_beta(p) * (partial + tail)


POLY_2D = {
    "1": lambda pts: np.ones(len(pts)),
    "x": lambda pts: pts[:, 0],
    "y": lambda pts: pts[:, 1],
    "x^2": lambda pts: pts[:, 0] ** 2,
    "x*y": lambda pts: pts[:, 0] * pts[:, 1],
}

POLY_3D = {
    "1": lambda pts: np.ones(len(pts)),
    "x": lambda pts: pts[:, 0],
    "z": lambda pts: pts[:, 2],
    "x^2": lambda pts: pts[:, 0] ** 2,
    "x*y": lambda pts: pts[:, 0] * pts[:, 1],
}
