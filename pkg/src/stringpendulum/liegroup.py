"""Minimal SO(3)/so(3) toolkit: hat/vee maps, Cayley transform, orthogonality check.

Rotation matrices are plain ``(3, 3)`` numpy arrays.  New rotations should only be
produced by :func:`cayley`, :func:`identity`, matrix products of existing rotations,
or an explicit matrix passed through :func:`check_rotation`; entrywise mutation of a
rotation is never valid.
"""

from __future__ import annotations

import numpy as np

from .errors import CayleyBoundaryError

__all__ = [
    "hat",
    "vee",
    "cayley",
    "cayley_inverse",
    "orthogonality_error",
    "identity",
    "check_rotation",
    "rotation_about",
]

#: Frobenius-norm tolerance for accepting an explicit matrix as a rotation.
ROTATION_TOL = 1e-12

#: Tolerance on the symmetric part when inverting the hat map.
SKEW_TOL = 1e-10


def hat(v):
    """Skew-symmetric matrix of ``v`` such that ``hat(v) @ w == cross(v, w)``."""
    x, y, z = v
    return np.array([[0.0, -z, y], [z, 0.0, -x], [-y, x, 0.0]])


def vee(m):
    """Inverse of :func:`hat`.  Rejects matrices that are not skew-symmetric.

    A non-skew argument almost always signals a formula error upstream, so this
    raises instead of silently projecting.
    """
    m = np.asarray(m, dtype=float)
    sym = np.linalg.norm(m + m.T)
    if sym > SKEW_TOL:
        raise ValueError(f"matrix is not skew-symmetric (|m + m^T| = {sym:.3e})")
    return np.array([m[2, 1], m[0, 2], m[1, 0]])


def cayley(c):
    """Cayley transform ``(I + hat(c)) @ inv(I - hat(c))``.

    Maps any finite vector to a rotation of angle ``2*arctan(|c|)`` about
    ``c/|c|``; the result is orthogonal up to round-off by construction.
    """
    ch = hat(c)
    scale = 2.0 / (1.0 + float(c[0] * c[0] + c[1] * c[1] + c[2] * c[2]))
    return np.eye(3) + scale * (ch + ch @ ch)


def cayley_inverse(R):
    """Vector ``c`` with ``cayley(c) == R``; fails at the angle-pi chart boundary."""
    R = np.asarray(R, dtype=float)
    denom = 1.0 + np.trace(R)
    if denom <= 1e-8:
        raise CayleyBoundaryError(
            "rotation angle at or near pi: outside the Cayley chart"
        )
    return vee((R - R.T)) / denom


def orthogonality_error(R):
    """Frobenius norm of ``I - R^T R``; zero for exact rotations."""
    R = np.asarray(R, dtype=float)
    return float(np.linalg.norm(np.eye(3) - R.T @ R))


def identity():
    return np.eye(3)


def check_rotation(m, tol=ROTATION_TOL):
    """Validate an explicit matrix as a rotation and return it as a float array."""
    m = np.asarray(m, dtype=float)
    if m.shape != (3, 3) or not np.all(np.isfinite(m)):
        raise ValueError("rotation must be a finite 3x3 matrix")
    err = orthogonality_error(m)
    if err > tol:
        raise ValueError(f"matrix is not orthogonal (|I - R^T R| = {err:.3e})")
    if np.linalg.det(m) <= 0.0:
        raise ValueError("matrix has non-positive determinant")
    return m


def rotation_about(axis, angle):
    """Rodrigues rotation by ``angle`` about the unit vector ``axis``."""
    axis = np.asarray(axis, dtype=float)
    axis = axis / np.linalg.norm(axis)
    K = hat(axis)
    return np.eye(3) + np.sin(angle) * K + (1.0 - np.cos(angle)) * (K @ K)
