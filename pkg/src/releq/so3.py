"""Vector algebra on so(3)* identified with R^3.

Momenta and angular velocities are plain length-3 numpy arrays.  The
coadjoint operator is fixed as ``coad(xi, mu) = xi x mu`` so that the
reduced flow ``mu' = -coad(grad h, mu) = mu x grad h`` is the classical
Euler equation for ``h = mu^T I^-1 mu / 2``.
"""

from __future__ import annotations

import numpy as np

from .errors import ZeroMomentum


def as_vector(v, name="mu") -> np.ndarray:
    """Return ``v`` as a finite float array of shape (3,)."""
    arr = np.asarray(v, dtype=float)
    if arr.shape != (3,):
        raise ValueError(f"{name} must have 3 components, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} has non-finite components: {arr}")
    return arr


def casimir(mu) -> float:
    """Orbit momentum ``j(mu) = (x^2 + y^2 + z^2) / 2``."""
    mu = as_vector(mu)
    return 0.5 * float(mu @ mu)


def coad(xi, mu) -> np.ndarray:
    """Infinitesimal coadjoint action ``xi x mu``."""
    return np.cross(as_vector(xi, "xi"), as_vector(mu))


def hat(v) -> np.ndarray:
    """Skew matrix with ``hat(v) @ w == v x w``."""
    x, y, z = v
    return np.array([[0.0, -z, y], [z, 0.0, -x], [-y, x, 0.0]])


def sphere_tangent_frame(mu) -> tuple[np.ndarray, np.ndarray]:
    """Orthonormal pair spanning the tangent plane of the sphere through ``mu``.

    The first vector comes from Gram-Schmidt of the coordinate axis least
    aligned with ``mu``; the second completes a right-handed frame
    ``(e1, e2, mu/|mu|)``.
    """
    mu = as_vector(mu)
    r = np.linalg.norm(mu)
    if r == 0.0:
        raise ZeroMomentum("tangent frame undefined at mu = 0")
    n = mu / r
    axis = np.zeros(3)
    axis[int(np.argmin(np.abs(n)))] = 1.0
    e1 = axis - (axis @ n) * n
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(n, e1)
    e2 /= np.linalg.norm(e2)
    return e1, e2


def rotation_matrix(axis, angle) -> np.ndarray:
    """Rodrigues rotation about ``axis`` by ``angle`` radians."""
    axis = as_vector(axis, "axis")
    axis = axis / np.linalg.norm(axis)
    K = hat(axis)
    return np.eye(3) + np.sin(angle) * K + (1.0 - np.cos(angle)) * (K @ K)
