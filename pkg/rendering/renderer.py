"""
Soft depth splat rendering, depth L1 and the log-L1 depth loss.
소프트 스플랫 깊이 렌더링 및 깊이 손실

Depth per pixel is D = S / E, where S and E are the composited depth and
weight sums of the splat kernels; pixels with E < background_weight read 0.
With ``depth_ramp`` the depth is D · h(E) instead, h ramping smoothly from 0
at E = background_weight to 1 at 2 · background_weight.
"""
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple
import logging

import numpy as np

from config import RenderConfig
from rendering.camera import Camera, DepthView
from rendering import splat


logger = logging.getLogger(__name__)

NEAR_PLANE = 1e-3


@dataclass(frozen=True)
class SplatSet:
    """
    Isotropic splats to render.

    Attributes:
        centers: (N, 3) world positions
        sigmas: (N,) world-space footprint radii (1σ)
        opacities: (N,) opacities in [0, 1]
    """
    centers: np.ndarray
    sigmas: np.ndarray
    opacities: np.ndarray

    def __post_init__(self):
        centers = np.asarray(self.centers, dtype=np.float64).reshape(-1, 3)
        n = len(centers)
        sigmas = np.broadcast_to(np.asarray(self.sigmas, dtype=np.float64), (n,)).copy()
        opacities = np.asarray(self.opacities, dtype=np.float64).reshape(n)
        object.__setattr__(self, 'centers', centers)
        object.__setattr__(self, 'sigmas', sigmas)
        object.__setattr__(self, 'opacities', opacities)

    def __len__(self) -> int:
        return len(self.centers)


def as_splats(obj) -> SplatSet:
    """Accept a SplatSet or any object exposing ``as_splats()``."""
    if isinstance(obj, SplatSet):
        return obj
    return obj.as_splats()


@dataclass
class DepthLossResult:
    """Value and gradients of Σ_v log(1 + L1_v)."""
    loss: float
    grad_centers: np.ndarray
    grad_opacities: np.ndarray
    per_view_l1: np.ndarray = field(default_factory=lambda: np.zeros(0))


# ============================================================================
# PROJECTION
# ============================================================================

def _project(splats: SplatSet, cameras: Sequence[Camera], config: RenderConfig):
    centers = splats.centers
    n_views = len(cameras)
    cam_pts = np.empty((n_views, len(centers), 3))
    u = np.empty((n_views, len(centers)))
    v = np.empty_like(u)
    sig = np.empty_like(u)
    raw_sig = np.empty_like(u)
    for i, cam in enumerate(cameras):
        pts = cam.to_camera(centers)
        cam_pts[i] = pts
        z = np.where(pts[:, 2] > NEAR_PLANE, pts[:, 2], 1.0)
        u[i] = cam.focal * pts[:, 0] / z + cam.cx
        v[i] = cam.focal * pts[:, 1] / z + cam.cy
        raw_sig[i] = cam.focal * splats.sigmas / z
    np.maximum(raw_sig, config.min_sigma_px, out=sig)
    z_all = cam_pts[:, :, 2]
    valid = z_all > NEAR_PLANE
    # Stable sort keeps equal depths in index order.
    order = np.argsort(z_all, axis=1, kind='stable').astype(np.int64)
    return cam_pts, u, v, z_all, sig, raw_sig, valid, order


def _ramp(E: np.ndarray, low: float, smooth: bool) -> Tuple[np.ndarray, np.ndarray]:
    if not smooth:
        return np.ones_like(E), np.zeros_like(E)
    t = np.clip((E - low) / low, 0.0, 1.0)
    h = t * t * (3.0 - 2.0 * t)
    dh = np.where((t > 0.0) & (t < 1.0), 6.0 * t * (1.0 - t) / low, 0.0)
    return h, dh


def _resolve_depth(S: np.ndarray, E: np.ndarray, low: float, smooth: bool) -> np.ndarray:
    h, _ = _ramp(E, low, smooth)
    fg = E >= low
    depth = np.zeros_like(S)
    depth[fg] = S[fg] / E[fg] * h[fg]
    return depth


def _check_resolution(cameras: Sequence[Camera]) -> Tuple[int, int]:
    shapes = {cam.resolution for cam in cameras}
    if len(shapes) != 1:
        raise ValueError("All cameras of one render call must share a resolution")
    return shapes.pop()


def _rasterize(splats: SplatSet, cameras: Sequence[Camera], config: RenderConfig):
    height, width = _check_resolution(cameras)
    cam_pts, u, v, z, sig, raw_sig, valid, order = _project(splats, cameras, config)
    kernel = splat.forward_parallel if config.parallel else splat.forward_serial
    S, E = kernel(u, v, z, sig, splats.opacities, order, valid, height, width,
                  config.max_weight, config.cutoff_sigmas, config.taper)
    return (cam_pts, u, v, z, sig, raw_sig, valid, order), S, E


# ============================================================================
# PUBLIC API
# ============================================================================

def render_views(
    field,
    cameras: Sequence[Camera],
    config: Optional[RenderConfig] = None,
) -> List[DepthView]:
    """
    Render depth maps of a field for several cameras.

    Args:
        field: SplatSet or object with ``as_splats()``
        cameras: Cameras sharing one resolution
        config: Renderer settings

    Returns:
        One DepthView per camera (empty field → all-zero depth)
    """
    config = config or RenderConfig()
    splats = as_splats(field)
    if not cameras:
        return []
    if len(splats) == 0:
        return [DepthView(cam, np.zeros(cam.resolution)) for cam in cameras]
    _, S, E = _rasterize(splats, cameras, config)
    depth = _resolve_depth(S, E, config.background_weight, config.depth_ramp)
    return [DepthView(cam, depth[i]) for i, cam in enumerate(cameras)]


def render_depth(field, cam: Camera, config: Optional[RenderConfig] = None) -> DepthView:
    """Render one depth view."""
    return render_views(field, [cam], config)[0]


def depth_l1(a: DepthView, b: DepthView) -> float:
    """
    Sum over pixels of |a − b| (background pixels included).

    Raises:
        ValueError: Resolution mismatch
    """
    if a.depth.shape != b.depth.shape:
        raise ValueError(f"Resolution mismatch: {a.depth.shape} vs {b.depth.shape}")
    return float(np.abs(a.depth - b.depth).sum())


def depth_loss_grad(
    field,
    views: Sequence[DepthView],
    config: Optional[RenderConfig] = None,
) -> DepthLossResult:
    """
    Depth loss Σ_v log(1 + ‖D_v − 𝒟_v‖₁) and its analytic gradient.

    Args:
        field: SplatSet (or object with ``as_splats()``) to render
        views: Reference depth views

    Returns:
        DepthLossResult with gradients w.r.t. splat centers and opacities

    Raises:
        ValueError: No views
    """
    if not views:
        raise ValueError("depth_loss_grad needs at least one view")
    config = config or RenderConfig()
    splats = as_splats(field)
    n = len(splats)
    cameras = [view.camera for view in views]
    reference = np.stack([view.depth for view in views])

    if n == 0:
        l1 = np.abs(reference).reshape(len(views), -1).sum(axis=1)
        return DepthLossResult(float(np.log1p(l1).sum()), np.zeros((0, 3)), np.zeros(0), l1)

    geometry, S, E = _rasterize(splats, cameras, config)
    cam_pts, u, v, z, sig, raw_sig, valid, order = geometry
    low = config.background_weight
    depth = _resolve_depth(S, E, low, config.depth_ramp)

    diff = depth - reference
    l1 = np.abs(diff).reshape(len(views), -1).sum(axis=1)
    loss = float(np.log1p(l1).sum())

    g_depth = np.sign(diff) / (1.0 + l1)[:, None, None]
    h, dh = _ramp(E, low, config.depth_ramp)
    fg = E >= low
    safe_E = np.where(fg, E, 1.0)
    gS = np.where(fg, g_depth * h / safe_E, 0.0)
    gE = np.where(fg, g_depth * (-S * h / safe_E ** 2 + S / safe_E * dh), 0.0)

    height, width = reference.shape[1:]
    kernel = splat.backward_parallel if config.parallel else splat.backward_serial
    gu, gv, gz, gsig, galpha = kernel(
        u, v, z, sig, splats.opacities, order, valid, height, width,
        config.max_weight, config.cutoff_sigmas, config.taper, S, E, gS, gE,
    )

    grad_centers = np.zeros((n, 3))
    for i, cam in enumerate(cameras):
        zc = np.where(valid[i], z[i], 1.0)
        gsig_eff = np.where(raw_sig[i] > config.min_sigma_px, gsig[i], 0.0)
        g_cam = np.empty((n, 3))
        g_cam[:, 0] = gu[i] * cam.focal / zc
        g_cam[:, 1] = gv[i] * cam.focal / zc
        g_cam[:, 2] = (gz[i]
                       - gu[i] * (u[i] - cam.cx) / zc
                       - gv[i] * (v[i] - cam.cy) / zc
                       - gsig_eff * sig[i] / zc)
        g_cam[~valid[i]] = 0.0
        grad_centers += g_cam @ cam.rotation
    grad_opacities = galpha.sum(axis=0)

    logger.debug("Depth loss %.6f over %d views", loss, len(views))
    return DepthLossResult(loss, grad_centers, grad_opacities, l1)


def mean_foreground_error(rendered: DepthView, reference: DepthView) -> float:
    """Mean |Δdepth| over pixels that are foreground in the reference."""
    mask = reference.foreground
    if not mask.any():
        return 0.0
    return float(np.abs(rendered.depth - reference.depth)[mask].mean())
