"""Distances between sampled space curves.

Samples carry unit tangents, so each curve is modelled by the piecewise cubic
Hermite interpolant through its samples (chord-length scaled tangents).  The
interpolation error is fourth order in the sample spacing, which keeps the
curve-to-curve distance meaningful far below the spacing itself.
"""

from __future__ import annotations

import numpy as np
from scipy.spatial import cKDTree

_GRID = np.linspace(0.0, 1.0, 33)


def _oriented(points, tangents):
    """Per-segment start/end tangents pointing along the chord, and chord lengths."""
    chord = points[1:] - points[:-1]
    t0 = tangents[:-1] * np.sign(np.einsum("ij,ij->i", tangents[:-1], chord))[:, None]
    t1 = tangents[1:] * np.sign(np.einsum("ij,ij->i", tangents[1:], chord))[:, None]
    return t0, t1, np.linalg.norm(chord, axis=1)


def _basis(s):
    return (2 * s**3 - 3 * s**2 + 1, s**3 - 2 * s**2 + s, -2 * s**3 + 3 * s**2, s**3 - s**2)


def _basis_d(s):
    return (6 * s**2 - 6 * s, 3 * s**2 - 4 * s + 1, -6 * s**2 + 6 * s, 3 * s**2 - 2 * s)


def _basis_dd(s):
    return (12 * s - 6, 6 * s - 4, -12 * s + 6, 6 * s - 2)


def _combine(b, P0, P1, M0, M1):
    return b[0][..., None] * P0 + b[1][..., None] * M0 + b[2][..., None] * P1 + b[3][..., None] * M1


def distances_to_curve(points, tangents, Q, candidates: int = 3) -> np.ndarray:
    """Distances from each row of ``Q`` to the Hermite curve through ``points``."""
    points = np.asarray(points, dtype=float)
    tangents = np.asarray(tangents, dtype=float)
    Q = np.atleast_2d(np.asarray(Q, dtype=float))
    if len(points) == 1:
        return np.linalg.norm(Q - points[0], axis=1)
    k = min(candidates, len(points))
    dist, idx = cKDTree(points).query(Q, k=k)
    dist, idx = np.atleast_2d(dist.T).T, np.atleast_2d(idx.T).T
    best = dist.min(axis=1)
    nseg = len(points) - 1
    seg = np.clip(np.concatenate([idx - 1, idx], axis=1), 0, nseg - 1)  # (m, c)
    t0, t1, L = _oriented(points, tangents)
    P0, P1 = points[seg], points[seg + 1]
    M0, M1 = t0[seg] * L[seg][..., None], t1[seg] * L[seg][..., None]
    q = Q[:, None, :]
    # coarse grid, then projected Newton on |c(s) - q|^2 / 2
    G = _basis(_GRID)
    pts = np.einsum("g,mcd->mcgd", G[0], P0) + np.einsum("g,mcd->mcgd", G[1], M0) \
        + np.einsum("g,mcd->mcgd", G[2], P1) + np.einsum("g,mcd->mcgd", G[3], M1)
    d = np.linalg.norm(pts - q[:, :, None, :], axis=3)
    s = _GRID[np.argmin(d, axis=2)]
    best = np.minimum(best, d.min(axis=(1, 2)))
    for _ in range(8):
        r = _combine(_basis(s), P0, P1, M0, M1) - q
        c1 = _combine(_basis_d(s), P0, P1, M0, M1)
        c2 = _combine(_basis_dd(s), P0, P1, M0, M1)
        g = np.einsum("mcd,mcd->mc", r, c1)
        H = np.einsum("mcd,mcd->mc", c1, c1) + np.einsum("mcd,mcd->mc", r, c2)
        step = np.where(H > 0, g / np.where(H > 0, H, 1.0), 0.0)
        s = np.clip(s - step, 0.0, 1.0)
        best = np.minimum(best, np.linalg.norm(_combine(_basis(s), P0, P1, M0, M1) - q, axis=2).min(axis=1))
    return best


def distance_to_polyline(points, tangents, q, candidates: int = 3) -> float:
    """Distance from ``q`` to the Hermite curve through ``points``."""
    return float(distances_to_curve(points, tangents, np.asarray(q, dtype=float)[None], candidates)[0])


def dense_samples(points, tangents, per_segment: int = 2) -> np.ndarray:
    """Samples plus interior Hermite points of every segment."""
    points = np.asarray(points, dtype=float)
    tangents = np.asarray(tangents, dtype=float)
    if len(points) == 1:
        return points.copy()
    t0, t1, L = _oriented(points, tangents)
    s = np.linspace(0, 1, per_segment + 2)[1:]
    b = _basis(s)
    seg = (b[0][:, None, None] * points[None, :-1] + b[1][:, None, None] * (t0 * L[:, None])[None]
           + b[2][:, None, None] * points[None, 1:] + b[3][:, None, None] * (t1 * L[:, None])[None])
    return np.vstack([points[:1], seg.transpose(1, 0, 2).reshape(-1, 3)])


def hausdorff(a_points, a_tangents, b_points, b_tangents, per_segment: int = 1) -> float:
    """Symmetric Hausdorff distance between two Hermite-interpolated curves.

    Each curve is evaluated at its samples and ``per_segment`` interior points
    per segment; those are projected onto the other curve.
    """
    da = distances_to_curve(b_points, b_tangents, dense_samples(a_points, a_tangents, per_segment)).max()
    db = distances_to_curve(a_points, a_tangents, dense_samples(b_points, b_tangents, per_segment)).max()
    return float(max(da, db))


def match_branches(a_list, b_list):
    """Pair each branch in ``a_list`` with the closest one in ``b_list`` by midpoint."""
    pairs = []
    for a in a_list:
        mid = a.mu[len(a.mu) // 2]
        d = [distance_to_polyline(b.mu, b.tangent, mid) for b in b_list]
        pairs.append((a, b_list[int(np.argmin(d))]))
    return pairs
