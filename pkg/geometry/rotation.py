"""
Rotation parameterizations and rigid part motions.
회전 표현 및 강체 운동

- 6D rotation (first two matrix columns) ↔ matrix via Gram–Schmidt, with
  the analytic backward pass used by the objectives
- unit quaternions in (w, x, y, z) order
- RigidMotion: x̂ = R(x − c) + c + t
"""
from dataclasses import dataclass, field, replace
from typing import Tuple

import numpy as np
from scipy.spatial.transform import Rotation

from config import JointType


# ============================================================================
# 6D ROTATION
# ============================================================================

_EPS = 1e-12
_E_X = np.array([1.0, 0.0, 0.0])


def _orthonormal_pair(r: np.ndarray):
    """
    Gram–Schmidt on the two raw columns.

    A first column shorter than eps becomes e_x; a second column with no
    component off b1 is replaced by the basis vector least aligned with b1.

    Returns:
        (b1, b2, n1, n2, proj, degenerate); n1 and n2 are the divisors used
    """
    a1, a2 = r[..., :3], r[..., 3:]
    n1 = np.linalg.norm(a1, axis=-1, keepdims=True)
    short = n1 < _EPS
    n1 = np.where(short, 1.0, n1)
    b1 = np.where(short, _E_X, a1 / n1)
    proj = np.sum(b1 * a2, axis=-1, keepdims=True)
    u2 = a2 - proj * b1
    n2 = np.linalg.norm(u2, axis=-1, keepdims=True)
    flat = n2 < _EPS
    if np.any(flat):
        pick = np.eye(3)[np.argmin(np.abs(b1), axis=-1)]
        u2 = np.where(flat, pick - np.sum(b1 * pick, axis=-1, keepdims=True) * b1, u2)
        n2 = np.linalg.norm(u2, axis=-1, keepdims=True)
    return b1, u2 / n2, n1, n2, proj, short | flat


def rotation6d_to_matrix(r: np.ndarray) -> np.ndarray:
    """
    Map 6-vectors to rotation matrices by Gram–Schmidt.

    Args:
        r: (..., 6) array; r[:3] and r[3:] are the raw first and second columns

    Returns:
        (..., 3, 3) rotation matrices with columns (b1, b2, b1 × b2)
    """
    b1, b2, *_ = _orthonormal_pair(np.asarray(r, dtype=np.float64))
    b3 = np.cross(b1, b2)
    return np.stack([b1, b2, b3], axis=-1)


def matrix_to_rotation6d(matrix: np.ndarray) -> np.ndarray:
    """First two columns of a rotation matrix as a 6-vector."""
    matrix = np.asarray(matrix, dtype=np.float64)
    return np.concatenate([matrix[..., :, 0], matrix[..., :, 1]], axis=-1)


def rotation6d_backward(r: np.ndarray, grad_matrix: np.ndarray) -> np.ndarray:
    """
    Gradient of a scalar loss w.r.t. the 6D parameters.

    Args:
        r: (..., 6) parameters
        grad_matrix: (..., 3, 3) dL/dR

    Returns:
        (..., 6) dL/dr
    """
    r = np.asarray(r, dtype=np.float64)
    grad_matrix = np.asarray(grad_matrix, dtype=np.float64)
    a2 = r[..., 3:]
    b1, b2, n1, n2, proj, degenerate = _orthonormal_pair(r)

    g1 = grad_matrix[..., :, 0].copy()
    g2 = grad_matrix[..., :, 1].copy()
    g3 = grad_matrix[..., :, 2]

    # b3 = b1 × b2
    g1 += np.cross(b2, g3)
    g2 += np.cross(g3, b1)

    gu2 = (g2 - np.sum(b2 * g2, axis=-1, keepdims=True) * b2) / n2
    ga2 = gu2 - np.sum(b1 * gu2, axis=-1, keepdims=True) * b1
    g1 = g1 - proj * gu2 - np.sum(b1 * gu2, axis=-1, keepdims=True) * a2

    ga1 = (g1 - np.sum(b1 * g1, axis=-1, keepdims=True) * b1) / n1
    # the fallback columns do not depend on r
    return np.where(degenerate, 0.0, np.concatenate([ga1, ga2], axis=-1))


IDENTITY_6D = np.array([1.0, 0.0, 0.0, 0.0, 1.0, 0.0])


# ============================================================================
# AXIS-ANGLE AND QUATERNIONS
# ============================================================================

def axis_angle_matrix(axis: np.ndarray, angle: float) -> np.ndarray:
    """Rotation matrix of ``angle`` radians about ``axis``."""
    axis = np.asarray(axis, dtype=np.float64)
    norm = np.linalg.norm(axis)
    if norm == 0.0:
        return np.eye(3)
    return Rotation.from_rotvec(axis / norm * angle).as_matrix()


def matrix_axis_angle(matrix: np.ndarray) -> Tuple[np.ndarray, float]:
    """
    Axis and angle of a rotation matrix.

    Returns:
        (unit axis, angle in [0, π]); axis is +x for the identity
    """
    rotvec = Rotation.from_matrix(np.asarray(matrix, dtype=np.float64)).as_rotvec()
    angle = float(np.linalg.norm(rotvec))
    if angle < 1e-12:
        return np.array([1.0, 0.0, 0.0]), 0.0
    return rotvec / angle, angle


def rotation_angle(matrix: np.ndarray) -> float:
    """Geodesic angle of a rotation matrix in radians."""
    matrix = np.asarray(matrix, dtype=np.float64)
    cos = np.clip((np.trace(matrix) - 1.0) / 2.0, -1.0, 1.0)
    return float(np.arccos(cos))


def quaternion_to_matrix(q: np.ndarray) -> np.ndarray:
    """(w, x, y, z) unit quaternion(s) to rotation matrix/matrices."""
    q = np.asarray(q, dtype=np.float64)
    return Rotation.from_quat(np.roll(q, -1, axis=-1)).as_matrix()


def matrix_to_quaternion(matrix: np.ndarray) -> np.ndarray:
    """Rotation matrix/matrices to (w, x, y, z) quaternion(s)."""
    xyzw = Rotation.from_matrix(np.asarray(matrix, dtype=np.float64)).as_quat()
    return np.roll(xyzw, 1, axis=-1)


def quaternion_multiply(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Hamilton product a ⊗ b of (w, x, y, z) quaternions (broadcasting)."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    aw, ax, ay, az = np.moveaxis(a, -1, 0)
    bw, bx, by, bz = np.moveaxis(b, -1, 0)
    return np.stack([
        aw * bw - ax * bx - ay * by - az * bz,
        aw * bx + ax * bw + ay * bz - az * by,
        aw * by - ax * bz + ay * bw + az * bx,
        aw * bz + ax * by - ay * bx + az * bw,
    ], axis=-1)


# ============================================================================
# RIGID MOTION
# ============================================================================

@dataclass(frozen=True)
class RigidMotion:
    """
    Per-part rigid transform x̂ = R(x − c) + c + t.

    Attributes:
        r: 6D rotation parameters
        c: rotation center (scene units)
        t: translation (scene units)
        joint_type: joint-type state (frozen after the type constraint)
    """
    r: np.ndarray = field(default_factory=lambda: IDENTITY_6D.copy())
    c: np.ndarray = field(default_factory=lambda: np.zeros(3))
    t: np.ndarray = field(default_factory=lambda: np.zeros(3))
    joint_type: JointType = JointType.UNKNOWN

    def __post_init__(self):
        for name, size in (('r', 6), ('c', 3), ('t', 3)):
            value = np.array(getattr(self, name), dtype=np.float64).reshape(size)
            if not np.all(np.isfinite(value)):
                raise ValueError(f"RigidMotion.{name} must be finite")
            value.setflags(write=False)
            object.__setattr__(self, name, value)

    @classmethod
    def identity(cls, center=None) -> 'RigidMotion':
        return cls(c=np.zeros(3) if center is None else center)

    @classmethod
    def from_axis_angle(
        cls,
        axis: np.ndarray,
        angle: float,
        center=None,
        translation=None,
        joint_type: JointType = JointType.UNKNOWN,
    ) -> 'RigidMotion':
        matrix = axis_angle_matrix(axis, angle)
        return cls(
            r=matrix_to_rotation6d(matrix),
            c=np.zeros(3) if center is None else center,
            t=np.zeros(3) if translation is None else translation,
            joint_type=joint_type,
        )

    @property
    def rotation(self) -> np.ndarray:
        return rotation6d_to_matrix(self.r)

    @property
    def angle(self) -> float:
        return rotation_angle(self.rotation)

    def apply(self, points: np.ndarray) -> np.ndarray:
        """Transform (N, 3) points (or a single 3-vector)."""
        points = np.asarray(points, dtype=np.float64)
        return (points - self.c) @ self.rotation.T + self.c + self.t

    def as_matrix(self) -> np.ndarray:
        """4×4 homogeneous matrix of the transform."""
        rot = self.rotation
        matrix = np.eye(4)
        matrix[:3, :3] = rot
        matrix[:3, 3] = self.c - rot @ self.c + self.t
        return matrix

    def inverse(self) -> 'RigidMotion':
        rot = self.rotation
        return replace(self, r=matrix_to_rotation6d(rot.T), t=-(rot.T @ self.t))

    def with_params(self, **changes) -> 'RigidMotion':
        return replace(self, **changes)

    def to_dict(self) -> dict:
        return {
            'r': self.r.tolist(),
            'c': self.c.tolist(),
            't': self.t.tolist(),
            'joint_type': self.joint_type.value,
        }

    @classmethod
    def from_dict(cls, data: dict) -> 'RigidMotion':
        return cls(
            r=data['r'], c=data['c'], t=data['t'],
            joint_type=JointType(data.get('joint_type', 'unknown')),
        )


def apply_motion(m: RigidMotion, x: np.ndarray) -> np.ndarray:
    """Apply a part motion: R(x − c) + c + t."""
    return m.apply(x)


def rotate_quaternion(m: RigidMotion, q: np.ndarray) -> np.ndarray:
    """
    Rotate primitive orientation(s): q̂ = R ⊗ q.

    Args:
        m: Part motion
        q: (4,) or (N, 4) unit quaternions (w, x, y, z)

    Raises:
        ValueError: Non-unit quaternion (beyond 1e-6)
    """
    q = np.asarray(q, dtype=np.float64)
    norms = np.linalg.norm(q, axis=-1)
    if np.any(np.abs(norms - 1.0) > 1e-6):
        raise ValueError("rotate_quaternion expects unit quaternions")
    q_rot = matrix_to_quaternion(m.rotation)
    out = quaternion_multiply(q_rot, q)
    return out / np.linalg.norm(out, axis=-1, keepdims=True)


def interpolate_motion(m: RigidMotion, fraction: float) -> RigidMotion:
    """
    Intermediate state of a motion.

    The rotation angle about the same axis and center and the translation
    are both scaled by ``fraction`` (0 → identity, 1 → ``m``).
    """
    axis, angle = matrix_axis_angle(m.rotation)
    return replace(
        m,
        r=matrix_to_rotation6d(axis_angle_matrix(axis, angle * fraction)),
        t=m.t * fraction,
    )
