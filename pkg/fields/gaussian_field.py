"""
Gaussian primitive field of the articulated object.
가우시안 프리미티브 필드

One primitive per input point: center, orientation quaternion (w, x, y, z),
per-axis scale, base opacity and a static logit with P_s = sigmoid(logit).
"""
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np
from scipy.special import expit

from config import FieldConfig
from geometry import PointCloud, as_points, median_spacing
from rendering import SplatSet


FALLBACK_SCALE = 1e-3


@dataclass
class GaussianField:
    """
    Mutable set of primitives; only the optimizer writes to it.

    Attributes:
        centers: (N, 3) primitive centers
        quats: (N, 4) unit quaternions (w, x, y, z)
        scales: (N, 3) positive scales
        alphas: (N,) base opacities in (0, 1]
        static_logits: (N,) logits of the static probability
    """
    centers: np.ndarray
    quats: np.ndarray
    scales: np.ndarray
    alphas: np.ndarray
    static_logits: np.ndarray

    def __post_init__(self):
        self.centers = np.array(self.centers, dtype=np.float64).reshape(-1, 3)
        n = len(self.centers)
        self.quats = np.array(self.quats, dtype=np.float64).reshape(n, 4)
        self.scales = np.array(self.scales, dtype=np.float64).reshape(n, 3)
        self.alphas = np.array(self.alphas, dtype=np.float64).reshape(n)
        self.static_logits = np.array(self.static_logits, dtype=np.float64).reshape(n)
        self.validate()

    def validate(self) -> None:
        """
        Raises:
            ValueError: Any primitive invariant violated
        """
        if not np.all(np.isfinite(self.centers)):
            raise ValueError("GaussianField centers must be finite")
        if np.any(np.abs(np.linalg.norm(self.quats, axis=1) - 1.0) > 1e-6):
            raise ValueError("GaussianField quaternions must be unit length")
        if np.any(self.scales <= 0):
            raise ValueError("GaussianField scales must be positive")
        if np.any(self.alphas <= 0) or np.any(self.alphas > 1):
            raise ValueError("GaussianField opacities must lie in (0, 1]")

    def __len__(self) -> int:
        return len(self.centers)

    @property
    def static_prob(self) -> np.ndarray:
        """P_s per primitive."""
        return expit(self.static_logits)

    @property
    def sigmas(self) -> np.ndarray:
        """Isotropic splat footprint per primitive (mean scale)."""
        return self.scales.mean(axis=1)

    def as_splats(self) -> SplatSet:
        """The untransformed object G with its base opacities."""
        return SplatSet(self.centers, self.sigmas, self.alphas)

    def copy(self) -> 'GaussianField':
        return GaussianField(self.centers.copy(), self.quats.copy(), self.scales.copy(),
                             self.alphas.copy(), self.static_logits.copy())


def init_from_pointcloud(
    pc: Union[PointCloud, np.ndarray],
    config: Optional[FieldConfig] = None,
) -> GaussianField:
    """
    One primitive per point.
    점군으로부터 가우시안 필드 초기화

    Scale is isotropic at the median nearest-neighbor spacing, opacity is
    ``initial_alpha``, orientation the identity and P_s ≈ 0.

    Raises:
        ValueError: Empty cloud
    """
    config = config or FieldConfig()
    points = as_points(pc)
    n = len(points)
    if n == 0:
        raise ValueError("init_from_pointcloud needs a nonempty cloud")

    spacing = median_spacing(points)
    if spacing <= 0:
        spacing = FALLBACK_SCALE
    quats = np.zeros((n, 4))
    quats[:, 0] = 1.0
    return GaussianField(
        centers=points.copy(),
        quats=quats,
        scales=np.full((n, 3), spacing),
        alphas=np.full(n, config.initial_alpha),
        static_logits=np.full(n, config.initial_static_logit),
    )
