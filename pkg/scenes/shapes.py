"""
Cuboid / panel shapes used to build synthetic articulated objects.
합성 관절 물체용 직육면체(패널) 형상
"""
from dataclasses import dataclass, field
from typing import Tuple

import numpy as np


# Local face normals in the order −X, +X, −Y, +Y, −Z, +Z
FACE_NORMALS = np.array([
    [-1.0, 0.0, 0.0], [1.0, 0.0, 0.0],
    [0.0, -1.0, 0.0], [0.0, 1.0, 0.0],
    [0.0, 0.0, -1.0], [0.0, 0.0, 1.0],
])


@dataclass(frozen=True)
class BoxShape:
    """
    Solid cuboid in world coordinates.

    Attributes:
        size: (3,) full edge lengths along the box axes
        center: (3,) box center
        rotation: (3, 3) box-to-world rotation (columns are the box axes)
    """
    size: np.ndarray
    center: np.ndarray
    rotation: np.ndarray = field(default_factory=lambda: np.eye(3))

    def __post_init__(self):
        size = np.array(self.size, dtype=np.float64).reshape(3)
        if np.any(size < 0):
            raise ValueError("BoxShape size must be nonnegative")
        object.__setattr__(self, 'size', size)
        object.__setattr__(self, 'center', np.array(self.center, dtype=np.float64).reshape(3))
        object.__setattr__(self, 'rotation', np.array(self.rotation, dtype=np.float64).reshape(3, 3))

    @classmethod
    def from_bounds(cls, lower, upper) -> 'BoxShape':
        lower = np.asarray(lower, dtype=np.float64)
        upper = np.asarray(upper, dtype=np.float64)
        return cls(upper - lower, (lower + upper) / 2.0)

    @property
    def half(self) -> np.ndarray:
        return self.size / 2.0

    def face_areas(self) -> np.ndarray:
        sx, sy, sz = self.size
        return np.repeat([sy * sz, sx * sz, sx * sy], 2)

    @property
    def area(self) -> float:
        return float(self.face_areas().sum())

    def corners(self) -> np.ndarray:
        signs = np.array([[a, b, c] for a in (-1, 1) for b in (-1, 1) for c in (-1, 1)],
                         dtype=np.float64)
        return (signs * self.half) @ self.rotation.T + self.center

    def sample_surface(self, count: int, rng: np.random.Generator) -> Tuple[np.ndarray, np.ndarray]:
        """
        Uniform area samples on the box surface.

        Returns:
            (points (count, 3), unit outward normals (count, 3))
        """
        areas = self.face_areas()
        faces = rng.choice(6, size=count, p=areas / areas.sum())
        uv = rng.uniform(-1.0, 1.0, size=(count, 3))
        local = uv * self.half
        axis = faces // 2
        sign = np.where(faces % 2 == 0, -1.0, 1.0)
        local[np.arange(count), axis] = sign * self.half[axis]
        points = local @ self.rotation.T + self.center
        normals = FACE_NORMALS[faces] @ self.rotation.T
        return points, normals

    def strictly_inside(self, points: np.ndarray, margin: float) -> np.ndarray:
        """Mask of points deeper than ``margin`` inside the box."""
        local = np.abs((np.atleast_2d(points) - self.center) @ self.rotation)
        return np.all(local < self.half - margin, axis=1)

    def transformed(self, scale: float, shift: np.ndarray) -> 'BoxShape':
        """Box scaled about the origin then shifted."""
        return BoxShape(self.size * scale, (self.center + shift) * scale, self.rotation)
