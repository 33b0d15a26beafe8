"""
Mixed-variable joint search and half-state motion initialization.
혼합 변수 관절 탐색 및 절반 상태 운동 초기화

For each OBB axis of a proposal, a coarse (φ, d) grid is scored by the
one-sided Chamfer of the moved part to P¹, then each variable is polished
by bounded scalar minimization. The rotation center is the OBB face whose
surface lies closest to P¹; for axes lying in that face the two face edges
parallel to the axis are tried as well, since hinges sit on part edges.
"""
from dataclasses import dataclass
from typing import List, Optional, Union
import logging

import numpy as np
from scipy.optimize import minimize, minimize_scalar
from scipy.spatial import cKDTree
from scipy.spatial.transform import Rotation

from config import InitConfig
from geometry import KNNIndex, OBB, PointCloud, RigidMotion, as_points, axis_angle_matrix, obb_from_points


logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class MotionInit:
    """
    Result of the joint search for one proposal.

    Attributes:
        axis: (3,) joint axis â (an OBB axis, tilted by the final polish)
        phi: rotation about â in radians
        d: translation along â in scene units
        center: (3,) rotation center (face center or face-edge midpoint, moved by the polish)
        residual: one-sided Chamfer of the moved part to P¹
        axis_index: which OBB axis (0, 1, 2) the grid chose
    """
    axis: np.ndarray
    phi: float
    d: float
    center: np.ndarray
    residual: float
    axis_index: int = 0

    @property
    def motion(self) -> RigidMotion:
        """The full searched motion (state 0 → state 1)."""
        return RigidMotion.from_axis_angle(self.axis, self.phi, center=self.center,
                                           translation=self.d * np.asarray(self.axis))

    def to_dict(self) -> dict:
        return {
            'axis': np.asarray(self.axis).tolist(),
            'phi_deg': float(np.degrees(self.phi)),
            'd': float(self.d),
            'center': np.asarray(self.center).tolist(),
            'residual': float(self.residual),
            'axis_index': int(self.axis_index),
        }


def _grid(low: float, high: float, step: float) -> np.ndarray:
    count = int(round((high - low) / step)) + 1
    return np.union1d(np.linspace(low, high, count), [0.0])


def _tree(p1: Union[PointCloud, np.ndarray, KNNIndex]) -> cKDTree:
    points = p1.points if isinstance(p1, KNNIndex) else as_points(p1)
    return cKDTree(points)


def _residual(tree: cKDTree, points: np.ndarray) -> float:
    dist, _ = tree.query(points, k=1)
    return float(np.mean(dist * dist))


def select_face(obb: OBB, tree: cKDTree, samples: int = 64, seed: int = 0) -> int:
    """Index (face_centers order) of the face with the smallest mean sample distance to P¹."""
    faces = obb.face_samples(samples, seed=seed)
    dist, _ = tree.query(faces.reshape(-1, 3), k=1)
    scores = dist.reshape(6, samples).mean(axis=1)
    return int(np.argmin(scores))


def pivot_candidates(obb: OBB, face: int, axis_index: int) -> List[np.ndarray]:
    """
    Rotation centers tried for one axis: the face center, then the
    midpoints of the two face edges parallel to the axis.

    An axis normal to the face only gets the face center.
    """
    center = obb.face_centers()[face]
    normal = face // 2
    if axis_index == normal:
        return [center]
    across = 3 - normal - axis_index
    offset = obb.half_extents[across] * obb.axes[across]
    return [center, center - offset, center + offset]


def search_motion(
    part: Union[PointCloud, np.ndarray],
    p1: Union[PointCloud, np.ndarray, KNNIndex],
    config: Optional[InitConfig] = None,
    pivot_target: Optional[Union[PointCloud, np.ndarray]] = None,
) -> MotionInit:
    """
    Search (â, φ, d) minimizing the Chamfer of the moved part to P¹.
    OBB 축별 격자 탐색 후 좌표별 정밀화

    Args:
        part: Points of one proposal at state 0
        p1: State-1 cloud (or a prebuilt index over it)
        config: Grid bounds, steps and refinement rounds
        pivot_target: Points the rotation-center face is measured against
            (default P¹; the initializer passes the P¹ points that have no
            counterpart in P⁰)

    Returns:
        MotionInit; its residual never exceeds the identity residual

    Raises:
        ValueError: Fewer than 3 points
        DegenerateGeometryError: Collinear part
    """
    config = config or InitConfig()
    points = as_points(part)
    if len(points) < 3:
        raise ValueError(f"search_motion needs at least 3 points, got {len(points)}")

    obb = obb_from_points(points)
    tree = _tree(p1)
    pivot_tree = tree
    if pivot_target is not None and len(as_points(pivot_target)):
        pivot_tree = cKDTree(as_points(pivot_target))
    face = select_face(obb, pivot_tree, config.face_samples, config.seed)

    phi_min, phi_max = np.radians(config.phi_min_deg), np.radians(config.phi_max_deg)
    phis = _grid(phi_min, phi_max, np.radians(config.phi_step_deg))
    ds = _grid(config.d_min, config.d_max, config.d_step)
    best: Optional[MotionInit] = None
    for axis_index, axis in enumerate(obb.axes):
        for center in pivot_candidates(obb, face, axis_index):
            candidate = _search_axis(points, tree, axis, center, axis_index, phis, ds, config)
            if best is None or candidate.residual < best.residual:
                best = candidate
    best = polish_motion(points, tree, best, config)

    logger.debug("Motion search: axis %d, φ=%.2f°, d=%.4f, residual=%.3e",
                 best.axis_index, np.degrees(best.phi), best.d, best.residual)
    return best


def _search_axis(points: np.ndarray, tree: cKDTree, axis: np.ndarray, center: np.ndarray,
                 axis_index: int, phis: np.ndarray, ds: np.ndarray, config: InitConfig) -> MotionInit:
    """Grid search over (φ, d) about one axis through one center, then coordinate polishing."""
    phi_min, phi_max = np.radians(config.phi_min_deg), np.radians(config.phi_max_deg)
    local = points - center
    shifts = ds[:, None] * axis[None]

    def score(phi: float, d: float) -> float:
        moved = local @ axis_angle_matrix(axis, phi).T + center + d * axis
        return _residual(tree, moved)

    scores = np.empty((len(phis), len(ds)))
    for i, phi in enumerate(phis):
        rotated = local @ axis_angle_matrix(axis, phi).T + center
        batch = (rotated[None, :, :] + shifts[:, None, :]).reshape(-1, 3)
        dist, _ = tree.query(batch, k=1)
        scores[i] = np.mean((dist * dist).reshape(len(ds), -1), axis=1)

    i, j = np.unravel_index(int(np.argmin(scores)), scores.shape)
    phi, d, value = float(phis[i]), float(ds[j]), float(scores[i, j])

    phi_step = np.radians(config.phi_step_deg)
    for _ in range(config.refine_rounds):
        lo, hi = max(phi_min, phi - phi_step), min(phi_max, phi + phi_step)
        found = minimize_scalar(lambda x: score(x, d), bounds=(lo, hi), method='bounded',
                                options={'xatol': 1e-5})
        if found.fun < value:
            phi, value = float(found.x), float(found.fun)
        lo, hi = max(config.d_min, d - config.d_step), min(config.d_max, d + config.d_step)
        found = minimize_scalar(lambda x: score(phi, x), bounds=(lo, hi), method='bounded',
                                options={'xatol': 1e-6})
        if found.fun < value:
            d, value = float(found.x), float(found.fun)

    return MotionInit(axis.copy(), phi, d, np.array(center, dtype=np.float64), value, axis_index)


def screw_from_motion(rotvec: np.ndarray, translation: np.ndarray, near: np.ndarray,
                      fallback_axis: np.ndarray) -> tuple:
    """
    Express x ↦ R x + t as a rotation φ about â through c followed by d·â.

    Args:
        rotvec: Rotation vector of R
        translation: t
        near: c is the point of the axis line closest to this
        fallback_axis: Direction used for a pure translation of zero length

    Returns:
        (axis, phi, d, center)
    """
    phi = float(np.linalg.norm(rotvec))
    t = np.asarray(translation, dtype=np.float64)
    if phi < 1e-12:
        length = float(np.linalg.norm(t))
        axis = t / length if length > 0 else np.asarray(fallback_axis, dtype=np.float64)
        return axis, 0.0, length, np.asarray(near, dtype=np.float64)

    axis = rotvec / phi
    d = float(axis @ t)
    across = t - d * axis
    matrix = axis_angle_matrix(axis, phi)
    center, *_ = np.linalg.lstsq(np.eye(3) - matrix, across, rcond=None)
    center = center + axis * (axis @ (near - center))
    return axis, phi, d, center


def polish_motion(points: np.ndarray, tree: cKDTree, mi: MotionInit, config: InitConfig) -> MotionInit:
    """
    Local Powell descent over the full rigid motion, started at ``mi``.

    The search grid only knows the PCA axes, which tilt by a few degrees on
    sparse samples; this step frees the axis direction and the center. The
    result replaces ``mi`` only when it lowers the residual and stays inside
    the φ and d bounds.
    """
    if config.polish_iters <= 0 or mi.residual <= 1e-15:
        return mi

    axis0 = np.asarray(mi.axis, dtype=np.float64)
    anchor = np.asarray(mi.center, dtype=np.float64)

    def residual(x: np.ndarray) -> float:
        rot = Rotation.from_rotvec(x[:3]).as_matrix()
        return _residual(tree, (points - anchor) @ rot.T + anchor + x[3:])

    # rotation vector about the anchor, then the anchor shift
    start = np.concatenate([axis0 * mi.phi, axis0 * mi.d])
    found = minimize(residual, start, method='Powell',
                     options={'maxfev': config.polish_iters, 'xtol': 1e-7, 'ftol': 1e-12})
    if not np.isfinite(found.fun) or found.fun >= mi.residual:
        return mi

    rotvec, shift = found.x[:3], found.x[3:]
    rot = Rotation.from_rotvec(rotvec).as_matrix()
    axis, phi, d, center = screw_from_motion(rotvec, anchor - rot @ anchor + shift, anchor, axis0)
    if float(axis @ axis0) < 0:
        axis, phi, d = -axis, -phi, -d
    if not (np.radians(config.phi_min_deg) <= phi <= np.radians(config.phi_max_deg)
            and config.d_min <= d <= config.d_max):
        return mi
    return MotionInit(axis, phi, d, center, float(found.fun), mi.axis_index)


def halve_init(mi: MotionInit) -> RigidMotion:
    """
    Half-state motion: rotation φ/2 about â through c and translation (d/2)·â.
    절반 변환 초기화
    """
    axis = np.asarray(mi.axis, dtype=np.float64)
    return RigidMotion.from_axis_angle(axis, mi.phi / 2.0, center=mi.center,
                                       translation=(mi.d / 2.0) * axis)


def identity_init(points: Union[PointCloud, np.ndarray]) -> RigidMotion:
    """Identity motion centered at the centroid (motion search disabled)."""
    return RigidMotion.identity(as_points(points).mean(axis=0))
