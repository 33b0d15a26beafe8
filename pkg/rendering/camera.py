"""
Pinhole cameras and depth views.
핀홀 카메라 및 깊이 뷰

Pixel (row, col) has its center at image coordinates (u=col, v=row);
camera frame is x right, y down, z forward.
"""
from dataclasses import dataclass
from typing import List, Tuple

import numpy as np


@dataclass(frozen=True)
class Camera:
    """
    Attributes:
        pose: (4, 4) world-to-camera rigid transform
        focal: focal length in pixels
        cx, cy: principal point (pixels)
        width, height: resolution
    """
    pose: np.ndarray
    focal: float
    cx: float
    cy: float
    width: int
    height: int

    def __post_init__(self):
        pose = np.array(self.pose, dtype=np.float64).reshape(4, 4)
        rot = pose[:3, :3]
        if not np.allclose(rot @ rot.T, np.eye(3), atol=1e-6) or np.linalg.det(rot) < 0:
            raise ValueError("Camera rotation block must be orthonormal and proper")
        if not self.focal > 0:
            raise ValueError("Camera focal length must be positive")
        if self.width < 1 or self.height < 1:
            raise ValueError("Camera resolution must be positive")
        pose.setflags(write=False)
        object.__setattr__(self, 'pose', pose)
        object.__setattr__(self, 'focal', float(self.focal))
        object.__setattr__(self, 'cx', float(self.cx))
        object.__setattr__(self, 'cy', float(self.cy))
        object.__setattr__(self, 'width', int(self.width))
        object.__setattr__(self, 'height', int(self.height))

    @property
    def rotation(self) -> np.ndarray:
        return self.pose[:3, :3]

    @property
    def translation(self) -> np.ndarray:
        return self.pose[:3, 3]

    @property
    def position(self) -> np.ndarray:
        """Camera center in world coordinates."""
        return -self.rotation.T @ self.translation

    @property
    def resolution(self) -> Tuple[int, int]:
        return self.height, self.width

    def to_camera(self, points: np.ndarray) -> np.ndarray:
        return np.asarray(points, dtype=np.float64) @ self.rotation.T + self.translation

    def project(self, points: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """World points to (u, v, depth)."""
        cam = self.to_camera(points)
        z = cam[:, 2]
        safe = np.where(np.abs(z) > 1e-12, z, 1e-12)
        return self.focal * cam[:, 0] / safe + self.cx, self.focal * cam[:, 1] / safe + self.cy, z

    def intrinsic_matrix(self) -> np.ndarray:
        """4×4 padded intrinsics."""
        k = np.eye(4)
        k[0, 0] = k[1, 1] = self.focal
        k[0, 2] = self.cx
        k[1, 2] = self.cy
        return k

    def with_resolution(self, width: int, height: int) -> 'Camera':
        """Same pose and field of view at another resolution."""
        scale = width / self.width
        return Camera(self.pose, self.focal * scale, (width - 1) / 2.0, (height - 1) / 2.0,
                      width, height)

    @classmethod
    def from_matrices(cls, pose: np.ndarray, intrinsics: np.ndarray, width: int, height: int) -> 'Camera':
        intrinsics = np.asarray(intrinsics, dtype=np.float64)
        return cls(pose, intrinsics[0, 0], intrinsics[0, 2], intrinsics[1, 2], width, height)


@dataclass(frozen=True)
class DepthView:
    """A depth image (0 = background) seen by ``camera``."""
    camera: Camera
    depth: np.ndarray

    def __post_init__(self):
        depth = np.array(self.depth, dtype=np.float64)
        if depth.shape != self.camera.resolution:
            raise ValueError(
                f"Depth shape {depth.shape} does not match camera resolution {self.camera.resolution}"
            )
        if not np.all(np.isfinite(depth)) or np.any(depth < 0):
            raise ValueError("Depth values must be finite and nonnegative")
        depth.setflags(write=False)
        object.__setattr__(self, 'depth', depth)

    @property
    def foreground(self) -> np.ndarray:
        return self.depth > 0


def focal_from_fov(width: int, fov_degrees: float) -> float:
    return width / (2.0 * np.tan(np.radians(fov_degrees) / 2.0))


def look_at(eye: np.ndarray, target: np.ndarray, up=(0.0, 0.0, 1.0)) -> np.ndarray:
    """World-to-camera pose looking from ``eye`` at ``target``."""
    eye = np.asarray(eye, dtype=np.float64)
    forward = np.asarray(target, dtype=np.float64) - eye
    forward /= np.linalg.norm(forward)
    up = np.asarray(up, dtype=np.float64)
    if abs(forward @ up) > 0.999:
        up = np.array([0.0, 1.0, 0.0])
    right = np.cross(forward, up)
    right /= np.linalg.norm(right)
    down = np.cross(forward, right)
    rot = np.stack([right, down, forward])
    pose = np.eye(4)
    pose[:3, :3] = rot
    pose[:3, 3] = -rot @ eye
    return pose


def fibonacci_directions(count: int) -> np.ndarray:
    """Near-uniform unit vectors on the sphere."""
    i = np.arange(count) + 0.5
    z = 1.0 - 2.0 * i / count
    radius = np.sqrt(np.clip(1.0 - z * z, 0.0, None))
    theta = np.pi * (3.0 - np.sqrt(5.0)) * np.arange(count)
    return np.stack([radius * np.cos(theta), radius * np.sin(theta), z], axis=1)


def fibonacci_cameras(
    center: np.ndarray,
    radius: float,
    count: int,
    resolution: int,
    fov_degrees: float = 30.0,
) -> List[Camera]:
    """
    Cameras on a Fibonacci sphere looking at ``center``.
    피보나치 구면 위 카메라 배치

    Args:
        center: Look-at point
        radius: Sphere radius
        count: Number of cameras
        resolution: Square image size
        fov_degrees: Horizontal field of view
    """
    focal = focal_from_fov(resolution, fov_degrees)
    principal = (resolution - 1) / 2.0
    center = np.asarray(center, dtype=np.float64)
    return [
        Camera(look_at(center + radius * direction, center), focal, principal, principal,
               resolution, resolution)
        for direction in fibonacci_directions(count)
    ]
