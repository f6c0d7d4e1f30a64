"""Head-pose rotations and landmark error metrics.

Angles follow the pitch/yaw/roll convention with extrinsic composition
R = R_z(roll) @ R_y(yaw) @ R_x(pitch): the pitch rotation about x is applied
first, then yaw about y, then roll about z.  Angles are degrees at the API
boundary and radians internally; geodesic distances are returned in radians.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "EulerAngles",
    "euler_to_rotation",
    "rotation_batch",
    "validate_rotation",
    "geodesic_deviation",
    "frontal_deviations",
    "compute_nme",
    "nme_batch",
]

_ROTATION_TOL = 1e-9


@dataclass(frozen=True)
class EulerAngles:
    """Head pose in degrees: pitch about x, yaw about y, roll about z."""

    pitch: float
    yaw: float
    roll: float

    def __post_init__(self):
        for name in ("pitch", "yaw", "roll"):
            v = getattr(self, name)
            if not math.isfinite(v):
                raise ValueError(f"non-finite {name} angle: {v!r}")


def euler_to_rotation(angles: EulerAngles) -> np.ndarray:
    """Rotation matrix for the given pose, R_z(roll) @ R_y(yaw) @ R_x(pitch)."""
    p = math.radians(angles.pitch)
    y = math.radians(angles.yaw)
    r = math.radians(angles.roll)
    cp, sp = math.cos(p), math.sin(p)
    cy, sy = math.cos(y), math.sin(y)
    cr, sr = math.cos(r), math.sin(r)
    rx = np.array([[1.0, 0.0, 0.0], [0.0, cp, -sp], [0.0, sp, cp]])
    ry = np.array([[cy, 0.0, sy], [0.0, 1.0, 0.0], [-sy, 0.0, cy]])
    rz = np.array([[cr, -sr, 0.0], [sr, cr, 0.0], [0.0, 0.0, 1.0]])
    return rz @ ry @ rx


def rotation_batch(pitch_deg, yaw_deg, roll_deg) -> np.ndarray:
    """Vectorized ``euler_to_rotation`` for arrays of angles, shape (n, 3, 3)."""
    p = np.radians(np.asarray(pitch_deg, dtype=float))
    y = np.radians(np.asarray(yaw_deg, dtype=float))
    r = np.radians(np.asarray(roll_deg, dtype=float))
    if not (p.shape == y.shape == r.shape) or p.ndim != 1:
        raise ValueError("angle arrays must be one-dimensional with equal length")
    if not (np.isfinite(p).all() and np.isfinite(y).all() and np.isfinite(r).all()):
        raise ValueError("non-finite angle in batch")
    n = p.shape[0]
    cp, sp = np.cos(p), np.sin(p)
    cy, sy = np.cos(y), np.sin(y)
    cr, sr = np.cos(r), np.sin(r)
    zero = np.zeros(n)
    one = np.ones(n)
    rx = np.stack(
        [one, zero, zero, zero, cp, -sp, zero, sp, cp], axis=-1
    ).reshape(n, 3, 3)
    ry = np.stack(
        [cy, zero, sy, zero, one, zero, -sy, zero, cy], axis=-1
    ).reshape(n, 3, 3)
    rz = np.stack(
        [cr, -sr, zero, sr, cr, zero, zero, zero, one], axis=-1
    ).reshape(n, 3, 3)
    return rz @ ry @ rx


def validate_rotation(matrix: np.ndarray, tol: float = _ROTATION_TOL) -> None:
    """Raise ValueError unless the matrix is a proper rotation within tol."""
    m = np.asarray(matrix, dtype=float)
    if m.shape != (3, 3):
        raise ValueError(f"rotation matrix must be 3x3, got shape {m.shape}")
    if not np.isfinite(m).all():
        raise ValueError("rotation matrix contains non-finite entries")
    err = np.abs(m.T @ m - np.eye(3)).max()
    if err > tol:
        raise ValueError(f"matrix is not orthonormal (max deviation {err:.3e})")
    det = np.linalg.det(m)
    if abs(det - 1.0) > tol:
        raise ValueError(f"matrix determinant {det!r} is not 1")


def geodesic_deviation(matrix: np.ndarray, reference: np.ndarray | None = None) -> float:
    """Geodesic distance on SO(3) between a rotation and a reference.

    The reference defaults to the identity (a frontal pose).  The distance
    is arccos((trace(R_ref^T R) - 1) / 2), clamped into [-1, 1] before the
    arccos so results land exactly in [0, pi].
    """
    m = np.asarray(matrix, dtype=float)
    validate_rotation(m)
    if reference is None:
        trace = float(np.trace(m))
    else:
        ref = np.asarray(reference, dtype=float)
        validate_rotation(ref)
        trace = float(np.trace(ref.T @ m))
    c = (trace - 1.0) / 2.0
    return math.acos(min(1.0, max(-1.0, c)))


def frontal_deviations(pitch_deg, yaw_deg, roll_deg) -> np.ndarray:
    """Geodesic deviation from the frontal pose for arrays of angles, radians."""
    mats = rotation_batch(pitch_deg, yaw_deg, roll_deg)
    traces = np.trace(mats, axis1=1, axis2=2)
    return np.arccos(np.clip((traces - 1.0) / 2.0, -1.0, 1.0))


def compute_nme(gt: np.ndarray, pred: np.ndarray, normalizer: float) -> float:
    """Normalized mean error between matched landmark sets.

    Mean Euclidean distance over landmarks, divided by the normalizer
    (typically the face bounding-box height in pixels).  Dimensionless;
    multiply by 100 for a percentage only when rendering.
    """
    g = np.asarray(gt, dtype=float)
    p = np.asarray(pred, dtype=float)
    if g.ndim != 2 or g.shape[1] != 2 or g.shape[0] < 1:
        raise ValueError(f"landmark set must have shape (k, 2) with k >= 1, got {g.shape}")
    if g.shape != p.shape:
        raise ValueError(f"landmark sets differ in shape: {g.shape} vs {p.shape}")
    if not (np.isfinite(g).all() and np.isfinite(p).all()):
        raise ValueError("landmark coordinates contain non-finite values")
    if not (normalizer > 0.0) or not math.isfinite(normalizer):
        raise ValueError(f"normalizer must be positive and finite, got {normalizer!r}")
    dists = np.sqrt(((g - p) ** 2).sum(axis=1))
    return float(dists.mean() / normalizer)


def nme_batch(gt: np.ndarray, pred: np.ndarray, normalizers: np.ndarray) -> np.ndarray:
    """Vectorized NME for stacked landmark sets of shape (n, k, 2)."""
    g = np.asarray(gt, dtype=float)
    p = np.asarray(pred, dtype=float)
    norms = np.asarray(normalizers, dtype=float)
    if g.ndim != 3 or g.shape[2] != 2 or g.shape[1] < 1:
        raise ValueError(f"landmark batch must have shape (n, k, 2), got {g.shape}")
    if g.shape != p.shape:
        raise ValueError(f"landmark batches differ in shape: {g.shape} vs {p.shape}")
    if norms.shape != (g.shape[0],):
        raise ValueError("one normalizer per sample is required")
    if not (np.isfinite(g).all() and np.isfinite(p).all()):
        raise ValueError("landmark coordinates contain non-finite values")
    if not ((norms > 0.0) & np.isfinite(norms)).all():
        bad = int(np.argmin((norms > 0.0) & np.isfinite(norms)))
        raise ValueError(f"normalizer at index {bad} must be positive and finite")
    dists = np.sqrt(((g - p) ** 2).sum(axis=2))
    return dists.mean(axis=1) / norms
