"""
Oriented bounding boxes from PCA.
주성분 분석 기반 방향성 경계 상자 (OBB)
"""
from dataclasses import dataclass
from typing import Union

import numpy as np

from errors import DegenerateGeometryError
from geometry.pointcloud import PointCloud, ArrayLike, as_points


@dataclass(frozen=True)
class OBB:
    """
    Oriented bounding box.

    Attributes:
        center: (3,) box middle
        axes: (3, 3) rows are the unit axes (descending PCA variance, right-handed)
        half_extents: (3,) nonnegative half sizes along each axis
    """
    center: np.ndarray
    axes: np.ndarray
    half_extents: np.ndarray

    def __post_init__(self):
        center = np.array(self.center, dtype=np.float64).reshape(3)
        axes = np.array(self.axes, dtype=np.float64).reshape(3, 3)
        half = np.array(self.half_extents, dtype=np.float64).reshape(3)
        if np.any(half < 0):
            raise ValueError("OBB half extents must be nonnegative")
        if not np.allclose(axes @ axes.T, np.eye(3), atol=1e-6):
            raise ValueError("OBB axes must be orthonormal")
        for name, value in (('center', center), ('axes', axes), ('half_extents', half)):
            value.setflags(write=False)
            object.__setattr__(self, name, value)

    @classmethod
    def axis_aligned(cls, lower: ArrayLike, upper: ArrayLike) -> 'OBB':
        lower = np.asarray(lower, dtype=np.float64)
        upper = np.asarray(upper, dtype=np.float64)
        return cls((lower + upper) / 2.0, np.eye(3), (upper - lower) / 2.0)

    @property
    def volume(self) -> float:
        return float(8.0 * np.prod(self.half_extents))

    def to_local(self, points: np.ndarray) -> np.ndarray:
        """Coordinates of points in the box frame."""
        return (np.asarray(points, dtype=np.float64) - self.center) @ self.axes.T

    def to_world(self, local: np.ndarray) -> np.ndarray:
        return np.asarray(local, dtype=np.float64) @ self.axes + self.center

    def contains(self, points: np.ndarray, inflate: float = 0.0) -> np.ndarray:
        """Boolean mask of points inside the box grown by ``inflate``."""
        local = np.abs(self.to_local(np.atleast_2d(points)))
        return np.all(local <= self.half_extents + inflate, axis=1)

    def inflated(self, min_half_extent: float) -> 'OBB':
        """Same box with every half extent raised to at least ``min_half_extent``."""
        return OBB(self.center, self.axes, np.maximum(self.half_extents, min_half_extent))

    def corners(self) -> np.ndarray:
        signs = np.array([[sx, sy, sz] for sx in (-1, 1) for sy in (-1, 1) for sz in (-1, 1)],
                         dtype=np.float64)
        return self.to_world(signs * self.half_extents)

    def face_centers(self) -> np.ndarray:
        """(6, 3) face centers ordered −X, +X, −Y, +Y, −Z, +Z of the box frame."""
        local = np.zeros((6, 3))
        for axis in range(3):
            local[2 * axis, axis] = -self.half_extents[axis]
            local[2 * axis + 1, axis] = self.half_extents[axis]
        return self.to_world(local)

    def face_samples(self, count: int, seed: int = 0) -> np.ndarray:
        """
        Uniform samples on every face.

        Returns:
            (6, count, 3) points, faces in ``face_centers`` order
        """
        rng = np.random.default_rng(seed)
        out = np.empty((6, count, 3))
        for axis in range(3):
            others = [a for a in range(3) if a != axis]
            for side, sign in enumerate((-1.0, 1.0)):
                local = np.zeros((count, 3))
                local[:, axis] = sign * self.half_extents[axis]
                for other in others:
                    local[:, other] = rng.uniform(-1.0, 1.0, count) * self.half_extents[other]
                out[2 * axis + side] = self.to_world(local)
        return out

    def to_dict(self) -> dict:
        return {
            'center': self.center.tolist(),
            'axes': self.axes.tolist(),
            'half_extents': self.half_extents.tolist(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> 'OBB':
        return cls(data['center'], data['axes'], data['half_extents'])


def obb_from_points(pc: Union[PointCloud, ArrayLike]) -> OBB:
    """
    Fit an OBB by PCA of the centered covariance.
    PCA 기반 OBB 추정

    Axes are ordered by descending eigenvalue, each flipped to have a
    nonnegative dot product with (1, 1, 1); the third axis is the cross
    product of the first two. The box is centered between the extreme
    projections so it covers every point.

    Raises:
        DegenerateGeometryError: Fewer than 3 points or rank < 2
    """
    points = as_points(pc)
    if len(points) < 3:
        raise DegenerateGeometryError(f"OBB needs at least 3 points, got {len(points)}")

    mean = points.mean(axis=0)
    centered = points - mean
    covariance = centered.T @ centered / len(points)
    eigvals, eigvecs = np.linalg.eigh(covariance)
    order = np.argsort(eigvals)[::-1]
    eigvals = eigvals[order]
    eigvecs = eigvecs[:, order]

    scale = max(float(eigvals[0]), 1e-300)
    if eigvals[1] <= 1e-12 * scale:
        raise DegenerateGeometryError("Point set is collinear (rank < 2)")

    first = eigvecs[:, 0]
    second = eigvecs[:, 1]
    if first.sum() < 0:
        first = -first
    if second.sum() < 0:
        second = -second
    third = np.cross(first, second)
    third /= np.linalg.norm(third)
    axes = np.stack([first, second, third])

    local = centered @ axes.T
    lower = local.min(axis=0)
    upper = local.max(axis=0)
    center = mean + ((lower + upper) / 2.0) @ axes
    return OBB(center, axes, (upper - lower) / 2.0)
