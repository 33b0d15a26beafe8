"""
Collision-aware motion pruning and the joint-type constraint.
충돌 인지 모션 가지치기 및 관절 유형 고정

For every pair of movable parts the OBB overlap at state 0 and at state 1
is compared; a part whose motion drives it into a neighbor has its
translation projected off the colliding axis, or its near-identity
rotation snapped to the nearest box axis and halved.
"""
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple
import logging

import numpy as np
from scipy.stats import qmc

from config import JointType, PruneAction, PruneConfig
from errors import DegenerateGeometryError
from fields import GaussianField, PartAssignment, PartProposal, alive_proposals
from geometry import (
    IDENTITY_6D,
    OBB,
    RigidMotion,
    axis_angle_matrix,
    matrix_axis_angle,
    matrix_to_rotation6d,
    obb_from_points,
)


logger = logging.getLogger(__name__)

MIN_OVERLAP_SAMPLES = 1024
UNIT_TOLERANCE = 1e-6


@dataclass
class CollisionReport:
    """
    One flagged pair.

    Attributes:
        pair: (i, j) alive-part columns, i < j
        v0, v1: OBB overlap volumes at state 0 and state 1
        delta: v1 − v0
        axis: colliding axis (unit, from the pruned part's state-1 OBB)
        pruned: column whose motion is calibrated
        action: calibration applied to ``pruned``
        projected: whether the translation along ``axis`` was removed (also set
            next to a revolute reset of an undecided motion)
        iteration: optimizer iteration of the check
    """
    pair: Tuple[int, int]
    v0: float
    v1: float
    delta: float
    axis: np.ndarray
    pruned: int
    action: PruneAction = PruneAction.PRISMATIC_PROJECTED
    iteration: Optional[int] = None
    projected: bool = False

    def to_dict(self) -> dict:
        return {
            'kind': 'prune',
            'iteration': self.iteration,
            'pair': list(self.pair),
            'v0': self.v0,
            'v1': self.v1,
            'delta': self.delta,
            'axis': self.axis.tolist(),
            'pruned': self.pruned,
            'action': self.action.value,
            'projected': self.projected,
        }


# ============================================================================
# OVERLAP VOLUMES
# ============================================================================

def _box_key(box: OBB) -> tuple:
    return (box.volume, *box.center, *box.half_extents, *box.axes.ravel())


def obb_overlap_volume(a: OBB, b: OBB, samples: int = 8192, seed: int = 0) -> float:
    """
    Quasi-Monte-Carlo volume of a ∩ b.
    두 OBB 교집합 부피 (준난수 표본 추정)

    Scrambled Sobol points fill the smaller box; the fraction inside the
    other box times the smaller volume is the estimate. The smaller box is
    picked by a total order, so swapping the arguments gives the same value.

    Raises:
        ValueError: samples < 1024
    """
    if samples < MIN_OVERLAP_SAMPLES:
        raise ValueError(f"obb_overlap_volume needs at least {MIN_OVERLAP_SAMPLES} samples")
    small, large = (a, b) if _box_key(a) <= _box_key(b) else (b, a)
    if small.volume <= 0.0:
        return 0.0

    sobol = qmc.Sobol(d=3, scramble=True, seed=seed)
    unit = sobol.random_base2(int(np.ceil(np.log2(samples))))[:samples]
    points = small.to_world((2.0 * unit - 1.0) * small.half_extents)
    return float(large.contains(points).mean() * small.volume)


def transform_obb(box: OBB, motion: RigidMotion) -> OBB:
    """Box carried by a rigid motion (extents unchanged)."""
    rot = motion.rotation
    return OBB(motion.apply(box.center), box.axes @ rot.T, box.half_extents)


def _pair_seed(seed: int, i: int, j: int) -> int:
    return int(np.random.SeedSequence([seed, min(i, j), max(i, j)]).generate_state(1)[0])


# ============================================================================
# CALIBRATION
# ============================================================================

def prune_prismatic(m: RigidMotion, a_col: np.ndarray) -> RigidMotion:
    """
    Remove the translation component along the colliding axis.
    충돌 축 방향 이동 성분 제거: t ← t − (t·a) a

    Raises:
        ValueError: a_col not unit length
    """
    axis = np.asarray(a_col, dtype=np.float64).reshape(3)
    if abs(np.linalg.norm(axis) - 1.0) > UNIT_TOLERANCE:
        raise ValueError("colliding axis must be a unit vector")
    t = m.t - np.dot(m.t, axis) * axis
    return m.with_params(t=t)


def prune_revolute(m: RigidMotion, obb: OBB,
                   near_identity_deg: float = 5.0) -> Tuple[RigidMotion, bool]:
    """
    Snap a near-identity rotation to the closest box axis and halve it.
    작은 회전의 축을 가장 가까운 OBB 축으로 재설정하고 각도를 절반으로

    Returns:
        (motion, applied); rotations of ``near_identity_deg`` or more come
        back unchanged with applied=False
    """
    axis, angle = matrix_axis_angle(m.rotation)
    if np.degrees(angle) >= near_identity_deg:
        return m, False
    dots = obb.axes @ axis
    best = int(np.argmax(np.abs(dots)))
    sign = 1.0 if dots[best] >= 0 else -1.0
    rotation = axis_angle_matrix(sign * obb.axes[best], angle / 2.0)
    return m.with_params(r=matrix_to_rotation6d(rotation)), True


def planned_action(m: RigidMotion, near_identity_deg: float = 5.0) -> PruneAction:
    """Revolute reset for near-identity rotations of non-prismatic parts, else projection."""
    if m.joint_type != JointType.PRISMATIC and np.degrees(m.angle) < near_identity_deg:
        return PruneAction.REVOLUTE_RESET
    return PruneAction.PRISMATIC_PROJECTED


def enforce_joint_type(
    m: RigidMotion,
    iteration: int,
    type_freeze_at: int = 4000,
    revolute_min_deg: float = 5.0,
    prismatic_min_translation: float = 0.01,
) -> RigidMotion:
    """
    Decide and freeze the joint type once the freeze iteration is reached.
    관절 유형 결정 후 고정 (회전 → t = 0, 이동 → R = I)

    Rotations of at least ``revolute_min_deg`` become revolute with t = 0;
    everything else is prismatic with R = I (and zero translation when
    |t| is below ``prismatic_min_translation``). Already decided motions
    and iterations before the freeze come back unchanged.
    """
    if iteration < type_freeze_at or m.joint_type != JointType.UNKNOWN:
        return m
    if np.degrees(m.angle) >= revolute_min_deg:
        return m.with_params(t=np.zeros(3), joint_type=JointType.REVOLUTE)
    t = m.t if np.linalg.norm(m.t) >= prismatic_min_translation else np.zeros(3)
    return m.with_params(r=IDENTITY_6D.copy(), t=t, joint_type=JointType.PRISMATIC)


def joint_constraint_violation(m: RigidMotion) -> float:
    """‖t‖ for revolute, ‖r − r_I‖ for prismatic, 0 while undecided."""
    if m.joint_type == JointType.REVOLUTE:
        return float(np.linalg.norm(m.t))
    if m.joint_type == JointType.PRISMATIC:
        return float(np.linalg.norm(m.r - IDENTITY_6D))
    return 0.0


# ============================================================================
# DETECTION
# ============================================================================

def detect_collisions(
    parts: Sequence[Optional[Tuple[OBB, OBB]]],
    motions: Optional[Sequence[RigidMotion]] = None,
    tau_v: float = 1e-4,
    samples: int = 8192,
    seed: int = 0,
    near_identity_deg: float = 5.0,
) -> List[CollisionReport]:
    """
    Flag part pairs whose overlap grows from state 0 to state 1.
    부분 쌍 충돌 검출 (Δv = v¹ − v⁰ > τ_v)

    Args:
        parts: Per part its (state-0, state-1) OBB; None skips the part
        motions: Per part motion used to plan the action (projection when None)

    Returns:
        Reports for every pair with Δv > tau_v, in (i, j) order. The part
        with the larger center displacement is the one pruned; the colliding
        axis is the axis of its state-1 OBB with the largest |projection| of
        the relative displacement of the two parts.
    """
    reports = []
    for i in range(len(parts)):
        for j in range(i + 1, len(parts)):
            if parts[i] is None or parts[j] is None:
                continue
            (a0, a1), (b0, b1) = parts[i], parts[j]
            pair_seed = _pair_seed(seed, i, j)
            v0 = obb_overlap_volume(a0, b0, samples, pair_seed)
            v1 = obb_overlap_volume(a1, b1, samples, pair_seed)
            delta = v1 - v0
            if delta <= tau_v:
                continue

            shift_i = a1.center - a0.center
            shift_j = b1.center - b0.center
            pruned = i if np.linalg.norm(shift_i) >= np.linalg.norm(shift_j) else j
            box = a1 if pruned == i else b1
            relative = shift_i - shift_j
            projections = box.axes @ relative
            axis = box.axes[int(np.argmax(np.abs(projections)))].copy()

            action = PruneAction.PRISMATIC_PROJECTED
            if motions is not None:
                action = planned_action(motions[pruned], near_identity_deg)
            reports.append(CollisionReport((i, j), v0, v1, delta, axis, pruned, action))
    return reports


def member_obbs(
    field: GaussianField,
    proposals: Sequence[PartProposal],
    assignment: PartAssignment,
    config: Optional[PruneConfig] = None,
) -> List[Optional[Tuple[OBB, OBB]]]:
    """
    State-0 OBB of every alive part's members (P̂_m > ε) and its moved copy.

    Parts with too few members or degenerate member sets give None. Thin
    boxes are inflated to ``min_half_extent`` so planar parts keep volume.
    """
    config = config or PruneConfig()
    out = []
    for m, proposal in enumerate(alive_proposals(proposals)):
        members = assignment.members(m)
        if len(members) < config.min_members:
            out.append(None)
            continue
        try:
            box = obb_from_points(field.centers[members]).inflated(config.min_half_extent)
        except DegenerateGeometryError:
            out.append(None)
            continue
        out.append((box, transform_obb(box, proposal.motion)))
    return out


def prune_motions(
    field: GaussianField,
    proposals: Sequence[PartProposal],
    assignment: PartAssignment,
    iteration: int,
    config: Optional[PruneConfig] = None,
    seed: int = 0,
) -> List[CollisionReport]:
    """
    Detect collisions among the alive parts and calibrate their motions in place.
    충돌 검출 후 해당 부분의 모션 보정

    Returns:
        The applied reports (stamped with ``iteration``)
    """
    config = config or PruneConfig()
    alive = alive_proposals(proposals)
    if len(alive) < 2:
        return []

    boxes = member_obbs(field, alive, assignment, config)
    reports = detect_collisions(
        boxes, [p.motion for p in alive], config.tau_v, config.overlap_samples,
        seed, config.near_identity_deg,
    )
    for report in reports:
        report.iteration = iteration
        proposal = alive[report.pruned]
        motion = proposal.motion
        if report.action == PruneAction.REVOLUTE_RESET:
            motion, applied = prune_revolute(motion, boxes[report.pruned][1], config.near_identity_deg)
            if not applied:
                report.action = PruneAction.PRISMATIC_PROJECTED
        if report.action == PruneAction.PRISMATIC_PROJECTED or motion.joint_type == JointType.UNKNOWN:
            motion = prune_prismatic(motion, report.axis)
            report.projected = True
        proposal.motion = motion
        logger.info("Iter %d: pair %s collides (Δv=%.2e), part %d %s, projected=%s",
                    iteration, report.pair, report.delta, report.pruned, report.action.value,
                    report.projected)
    return reports
