"""
Joint and geometry metrics of a reconstruction.
관절 및 형상 평가 지표

- axis_errors: unsigned axis angle (deg) and axis-line distance (revolute)
- part_motion_error: geodesic rotation error (deg) or translation error
- chamfer_metrics: symmetric Chamfer on static, movable and whole clouds
  with Hungarian part matching on centroids
"""
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple
import logging

import numpy as np
from scipy.optimize import linear_sum_assignment

from config import JointType
from geometry import PointCloud, RigidMotion, chamfer_symmetric, matrix_axis_angle, rotation_angle
from scenes import JointTruth, SceneTruth


logger = logging.getLogger(__name__)

STATIC_LABEL = 0
PARALLEL_TOLERANCE = 1e-9
REVOLUTE_MIN_DEG = 5.0


# ============================================================================
# JOINT METRICS
# ============================================================================

def predicted_joint_type(m: RigidMotion, revolute_min_deg: float = REVOLUTE_MIN_DEG) -> JointType:
    """Frozen type, or the freeze rule applied to an undecided motion."""
    if m.joint_type != JointType.UNKNOWN:
        return m.joint_type
    return JointType.REVOLUTE if np.degrees(m.angle) >= revolute_min_deg else JointType.PRISMATIC


def predicted_axis(m: RigidMotion) -> Optional[np.ndarray]:
    """Rotation axis of a revolute motion, translation direction of a prismatic one."""
    if predicted_joint_type(m) == JointType.REVOLUTE:
        axis, angle = matrix_axis_angle(m.rotation)
        return axis if angle > 0 else None
    norm = np.linalg.norm(m.t)
    return m.t / norm if norm > 0 else None


def line_distance(p1: np.ndarray, a1: np.ndarray, p2: np.ndarray, a2: np.ndarray) -> float:
    """Minimum distance between the infinite lines p1 + s·a1 and p2 + s·a2 (unit directions)."""
    offset = np.asarray(p2, dtype=np.float64) - np.asarray(p1, dtype=np.float64)
    normal = np.cross(a1, a2)
    norm = np.linalg.norm(normal)
    if norm < PARALLEL_TOLERANCE:
        return float(np.linalg.norm(np.cross(offset, a1)))
    return float(abs(offset @ normal) / norm)


def axis_errors(pred: RigidMotion, truth: JointTruth) -> Tuple[float, Optional[float]]:
    """
    Axis direction and position errors.
    관절 축 각도 오차 / 위치 오차

    Returns:
        (angle in degrees with the unsigned-axis convention, line distance);
        the distance is None for prismatic truth and an undefined predicted
        axis gives 90°
    """
    gt_axis = np.asarray(truth.axis, dtype=np.float64)
    gt_axis = gt_axis / np.linalg.norm(gt_axis)
    axis = predicted_axis(pred)
    if axis is None:
        return 90.0, None

    cosine = np.clip(abs(float(axis @ gt_axis)), 0.0, 1.0)
    angle = float(np.degrees(np.arccos(cosine)))
    if truth.joint_type != JointType.REVOLUTE or predicted_joint_type(pred) != JointType.REVOLUTE:
        return angle, None
    return angle, line_distance(pred.c, axis, truth.pivot, gt_axis)


def part_motion_error(pred: RigidMotion, truth: JointTruth) -> Optional[float]:
    """
    Geodesic angle of R_pred R_gtᵀ in degrees (revolute) or ‖t_pred − t_gt‖ (prismatic).

    Returns:
        None when the joint types differ (reported as F)
    """
    if predicted_joint_type(pred) != truth.joint_type:
        return None
    gt = truth.motion
    if truth.joint_type == JointType.REVOLUTE:
        return float(np.degrees(rotation_angle(pred.rotation @ gt.rotation.T)))
    return float(np.linalg.norm(pred.t - gt.t))


# ============================================================================
# CHAMFER METRICS
# ============================================================================

@dataclass
class ChamferReport:
    """
    Symmetric Chamfer distances (squared scene units).

    Attributes:
        cd_s: static parts
        cd_m: mean over matched movable parts (merged value on count mismatch)
        cd_w: whole object
        cd_m_merged: union of movable points on both sides
        count_mismatch: movable part counts differ (F on cd_m)
        matching: predicted label → truth label
    """
    cd_s: Optional[float]
    cd_m: Optional[float]
    cd_w: float
    cd_m_merged: Optional[float]
    count_mismatch: bool = False
    matching: Dict[int, int] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            'cd_s': self.cd_s,
            'cd_m': self.cd_m,
            'cd_w': self.cd_w,
            'cd_m_merged': self.cd_m_merged,
            'count_mismatch': self.count_mismatch,
            'matching': {str(k): v for k, v in self.matching.items()},
        }


def sample_points(points: np.ndarray, n: int, seed: int = 0) -> np.ndarray:
    """At most ``n`` points without replacement; the stream depends on (seed, count) only."""
    points = np.asarray(points, dtype=np.float64)
    if len(points) <= n:
        return points
    rng = np.random.default_rng([seed, len(points)])
    return points[np.sort(rng.choice(len(points), n, replace=False))]


def _labels(pc: PointCloud) -> np.ndarray:
    if pc.labels is None:
        raise ValueError("chamfer_metrics needs labeled clouds")
    return pc.labels


def _movable_labels(labels: np.ndarray) -> List[int]:
    return [int(l) for l in np.unique(labels) if l != STATIC_LABEL]


def match_parts(pred: PointCloud, truth: PointCloud) -> Dict[int, int]:
    """
    Hungarian matching of movable parts on centroid distance.
    부분 매칭 (중심 거리 기반 헝가리안 할당)
    """
    pred_labels, truth_labels = _labels(pred), _labels(truth)
    pred_ids, truth_ids = _movable_labels(pred_labels), _movable_labels(truth_labels)
    if not pred_ids or not truth_ids:
        return {}
    pred_c = np.stack([pred.points[pred_labels == l].mean(axis=0) for l in pred_ids])
    truth_c = np.stack([truth.points[truth_labels == l].mean(axis=0) for l in truth_ids])
    cost = np.linalg.norm(pred_c[:, None] - truth_c[None], axis=2)
    rows, cols = linear_sum_assignment(cost)
    return {pred_ids[r]: truth_ids[c] for r, c in zip(rows, cols)}


def _category_cd(a: np.ndarray, b: np.ndarray, n: int, seed: int) -> Optional[float]:
    if len(a) == 0 or len(b) == 0:
        return None
    return chamfer_symmetric(sample_points(a, n, seed), sample_points(b, n, seed))


def chamfer_metrics(pred: PointCloud, truth: PointCloud, n: int = 10000,
                    seed: int = 0) -> ChamferReport:
    """
    Static, movable and whole-object Chamfer distances.
    정적/이동/전체 Chamfer 거리

    Each category is subsampled to at most ``n`` points per side. Movable
    parts are compared pairwise after matching; when the part counts
    differ cd_m falls back to the merged-movable distance and is flagged.
    Categories empty on either side are None.
    """
    pred_labels, truth_labels = _labels(pred), _labels(truth)
    matching = match_parts(pred, truth)
    pred_ids, truth_ids = _movable_labels(pred_labels), _movable_labels(truth_labels)
    mismatch = len(pred_ids) != len(truth_ids)

    cd_s = _category_cd(pred.points[pred_labels == STATIC_LABEL],
                        truth.points[truth_labels == STATIC_LABEL], n, seed)
    cd_w = _category_cd(pred.points, truth.points, n, seed)
    cd_merged = _category_cd(pred.points[pred_labels != STATIC_LABEL],
                             truth.points[truth_labels != STATIC_LABEL], n, seed)
    if mismatch or not matching:
        cd_m = cd_merged
    else:
        per_part = [
            _category_cd(pred.points[pred_labels == p], truth.points[truth_labels == t], n, seed)
            for p, t in sorted(matching.items())
        ]
        cd_m = float(np.mean(per_part))
    if mismatch:
        logger.warning("Part count mismatch: %d predicted vs %d true movable parts",
                       len(pred_ids), len(truth_ids))
    return ChamferReport(cd_s, cd_m, cd_w, cd_merged, mismatch, matching)


# ============================================================================
# REPORT
# ============================================================================

@dataclass
class PartMetrics:
    """Metrics of one predicted movable part (label ``label``)."""
    label: int
    truth_label: Optional[int]
    joint_type: JointType
    truth_type: Optional[JointType]
    axis_ang: Optional[float]
    axis_pos: Optional[float]
    part_motion: Optional[float]

    @property
    def type_match(self) -> bool:
        return self.truth_type is not None and self.joint_type == self.truth_type

    def to_dict(self) -> dict:
        return {
            'label': self.label,
            'truth_label': self.truth_label,
            'type': self.joint_type.value,
            'truth_type': None if self.truth_type is None else self.truth_type.value,
            'type_match': self.type_match,
            'axis_ang': self.axis_ang,
            'axis_pos': self.axis_pos,
            'part_motion': self.part_motion,
        }


@dataclass
class MetricsReport:
    """
    Evaluation of one run against its scene.

    ``flags`` lists F conditions: 'part_count' and 'joint_type:<label>'.
    """
    parts: List[PartMetrics]
    chamfer: ChamferReport
    flags: List[str] = field(default_factory=list)
    scene: str = ''

    def to_dict(self) -> dict:
        return {
            'scene': self.scene,
            'parts': [p.to_dict() for p in self.parts],
            'chamfer': self.chamfer.to_dict(),
            'flags': list(self.flags),
        }


def evaluate(
    motions: Dict[int, RigidMotion],
    pred_state1: PointCloud,
    truth: SceneTruth,
    n: int = 10000,
    seed: int = 0,
) -> MetricsReport:
    """
    Score a reconstruction.
    복원 결과 평가

    Args:
        motions: Predicted motion per movable label (labels ≥ 1)
        pred_state1: Primitive centers moved by their part motion, labeled
            (0 = static)
        truth: Generated scene with ground-truth joints

    Returns:
        MetricsReport; joints are matched through the state-1 part matching
    """
    chamfer = chamfer_metrics(pred_state1, truth.state1, n, seed)
    joints = {joint.label: joint for joint in truth.joints}
    flags = ['part_count'] if chamfer.count_mismatch else []

    parts = []
    for label in sorted(motions):
        motion = motions[label]
        truth_label = chamfer.matching.get(label)
        joint = joints.get(truth_label)
        joint_type = predicted_joint_type(motion)
        if joint is None:
            parts.append(PartMetrics(label, None, joint_type, None, None, None, None))
            continue
        ang, pos = axis_errors(motion, joint)
        part = PartMetrics(label, truth_label, joint_type, joint.joint_type, ang, pos,
                           part_motion_error(motion, joint))
        if not part.type_match:
            flags.append(f'joint_type:{label}')
        parts.append(part)
    return MetricsReport(parts, chamfer, flags, truth.name)
