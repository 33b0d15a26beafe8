"""
Synthetic two-state articulated scenes with ground truth.
합성 2-상태 관절 물체 장면 생성 (정답 포함)

State 0 is the spec's rest pose; state 1 applies every joint's full motion.
Parts are surface-sampled cuboids, depth views are rendered from cameras
on a Fibonacci sphere around the object.
"""
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Tuple
import logging

import numpy as np

from config import JointType, RenderConfig, FieldConfig
from errors import SceneSpecError
from geometry import PointCloud, RigidMotion, median_spacing
from rendering import Camera, DepthView, SplatSet, fibonacci_cameras, render_views
from scenes.shapes import BoxShape


logger = logging.getLogger(__name__)

MAX_REVOLUTE_DEG = 80.0
MAX_PRISMATIC = 0.5
PENETRATION_TOLERANCE = 1e-3


# ============================================================================
# SPEC TYPES
# ============================================================================

@dataclass(frozen=True)
class PartSpec:
    """A rigid part made of one or more boxes; exactly one part is static."""
    name: str
    boxes: Tuple[BoxShape, ...]
    static: bool = False


@dataclass(frozen=True)
class JointSpec:
    """
    Joint of a movable part relative to the static part.

    Attributes:
        part: Index into ``SceneSpec.parts``
        joint_type: REVOLUTE or PRISMATIC
        axis: Unit joint axis
        pivot: Point on the axis (revolute)
        magnitude: Radians (revolute) or scene units (prismatic)
    """
    part: int
    joint_type: JointType
    axis: Tuple[float, float, float]
    pivot: Tuple[float, float, float] = (0.0, 0.0, 0.0)
    magnitude: float = 0.0


@dataclass(frozen=True)
class SceneSpec:
    name: str
    parts: Tuple[PartSpec, ...]
    joints: Tuple[JointSpec, ...]
    samples_per_part: int = 400
    views: int = 20
    noise_sigma: float = 0.0
    seed: int = 0

    @property
    def static_index(self) -> int:
        return next(i for i, part in enumerate(self.parts) if part.static)

    def part_labels(self) -> Dict[int, int]:
        """Spec part index → point label (0 static, movable parts 1.. in order)."""
        labels = {self.static_index: 0}
        next_label = 1
        for i, part in enumerate(self.parts):
            if not part.static:
                labels[i] = next_label
                next_label += 1
        return labels

    def validate(self) -> None:
        """
        Raises:
            SceneSpecError: Any violated invariant
        """
        statics = [p for p in self.parts if p.static]
        if len(statics) != 1:
            raise SceneSpecError(f"Scene '{self.name}' needs exactly one static part, has {len(statics)}")
        if self.samples_per_part < 1 or self.views < 0 or self.noise_sigma < 0:
            raise SceneSpecError("samples_per_part ≥ 1, views ≥ 0 and noise_sigma ≥ 0 are required")

        jointed = set()
        for joint in self.joints:
            if not 0 <= joint.part < len(self.parts) or self.parts[joint.part].static:
                raise SceneSpecError(f"Joint refers to invalid part index {joint.part}")
            if joint.part in jointed:
                raise SceneSpecError(f"Part {joint.part} has more than one joint")
            jointed.add(joint.part)
            if abs(np.linalg.norm(joint.axis) - 1.0) > 1e-6:
                raise SceneSpecError(f"Joint axis of part {joint.part} is not unit length")
            if joint.joint_type == JointType.REVOLUTE:
                if abs(np.degrees(joint.magnitude)) > MAX_REVOLUTE_DEG + 1e-9:
                    raise SceneSpecError(f"Revolute magnitude of part {joint.part} exceeds ±80°")
            elif joint.joint_type == JointType.PRISMATIC:
                if abs(joint.magnitude) > MAX_PRISMATIC + 1e-12:
                    raise SceneSpecError(f"Prismatic magnitude of part {joint.part} exceeds ±0.5")
            else:
                raise SceneSpecError(f"Joint of part {joint.part} has no type")

        movable = {i for i, p in enumerate(self.parts) if not p.static}
        if movable != jointed:
            raise SceneSpecError("Every movable part needs exactly one joint")
        for part in self.parts:
            if not part.boxes or sum(box.area for box in part.boxes) <= 0:
                raise SceneSpecError(f"Part '{part.name}' has no surface")


@dataclass(frozen=True)
class JointTruth:
    """Ground-truth joint of one movable part (point label ``label``)."""
    label: int
    name: str
    joint_type: JointType
    axis: np.ndarray
    pivot: np.ndarray
    magnitude: float

    @property
    def motion(self) -> RigidMotion:
        if self.joint_type == JointType.REVOLUTE:
            return RigidMotion.from_axis_angle(self.axis, self.magnitude, center=self.pivot,
                                               joint_type=JointType.REVOLUTE)
        return RigidMotion(c=self.pivot, t=np.asarray(self.axis) * self.magnitude,
                           joint_type=JointType.PRISMATIC)

    def to_dict(self) -> dict:
        return {
            'label': self.label,
            'name': self.name,
            'type': self.joint_type.value,
            'axis': np.asarray(self.axis).tolist(),
            'pivot': np.asarray(self.pivot).tolist(),
            'magnitude': float(self.magnitude),
        }

    @classmethod
    def from_dict(cls, data: dict) -> 'JointTruth':
        return cls(int(data['label']), data.get('name', ''), JointType(data['type']),
                   np.asarray(data['axis'], dtype=np.float64),
                   np.asarray(data['pivot'], dtype=np.float64), float(data['magnitude']))


@dataclass
class SceneTruth:
    """
    Generated two-state scene.

    Attributes:
        state0, state1: labeled point clouds (same point order)
        joints: ground truth per movable part
        depth_views_state1: reference views of state 1
        depth_views_state0: reference views of state 0 (refinement)
    """
    state0: PointCloud
    state1: PointCloud
    joints: List[JointTruth]
    depth_views_state1: List[DepthView] = field(default_factory=list)
    depth_views_state0: List[DepthView] = field(default_factory=list)
    name: str = ''
    part_names: Dict[int, str] = field(default_factory=dict)

    def motions(self) -> Dict[int, RigidMotion]:
        return {joint.label: joint.motion for joint in self.joints}

    @property
    def movable_count(self) -> int:
        return len(self.joints)


# ============================================================================
# GENERATION
# ============================================================================

def normalize_spec(spec: SceneSpec) -> SceneSpec:
    """
    Recenter the rest pose at the origin and scale it into the unit cube.

    Prismatic magnitudes and pivots follow the scaling.
    """
    corners = np.vstack([box.corners() for part in spec.parts for box in part.boxes])
    lower, upper = corners.min(axis=0), corners.max(axis=0)
    extent = float((upper - lower).max())
    scale = 1.0 / extent if extent > 1.0 else 1.0
    shift = -(lower + upper) / 2.0
    if scale == 1.0 and np.allclose(shift, 0.0, atol=1e-12):
        return spec

    parts = tuple(
        replace(part, boxes=tuple(box.transformed(scale, shift) for box in part.boxes))
        for part in spec.parts
    )
    joints = tuple(
        replace(
            joint,
            pivot=tuple((np.asarray(joint.pivot) + shift) * scale),
            magnitude=joint.magnitude * scale if joint.joint_type == JointType.PRISMATIC else joint.magnitude,
        )
        for joint in spec.joints
    )
    return replace(spec, parts=parts, joints=joints)


def _sample_part(part: PartSpec, count: int, rng: np.random.Generator) -> Tuple[np.ndarray, np.ndarray]:
    areas = np.array([box.area for box in part.boxes])
    owners = rng.choice(len(part.boxes), size=count, p=areas / areas.sum())
    points = np.empty((count, 3))
    normals = np.empty((count, 3))
    for b, box in enumerate(part.boxes):
        mask = owners == b
        if mask.any():
            points[mask], normals[mask] = box.sample_surface(int(mask.sum()), rng)
    return points, normals


def _check_interpenetration(spec: SceneSpec, samples: List[np.ndarray]) -> None:
    for i, part in enumerate(spec.parts):
        for j, other in enumerate(spec.parts):
            if i == j:
                continue
            for box in other.boxes:
                inside = box.strictly_inside(samples[i], PENETRATION_TOLERANCE)
                if inside.any():
                    raise SceneSpecError(
                        f"Parts '{part.name}' and '{other.name}' interpenetrate "
                        f"({int(inside.sum())} samples inside)"
                    )


def scene_cameras(points: np.ndarray, count: int, resolution: int,
                  distance_factor: float = 2.5, fov_degrees: float = 30.0) -> List[Camera]:
    """Fibonacci-sphere cameras around a point set (radius = factor × bbox diagonal)."""
    lower, upper = points.min(axis=0), points.max(axis=0)
    diagonal = float(np.linalg.norm(upper - lower))
    return fibonacci_cameras((lower + upper) / 2.0, distance_factor * max(diagonal, 1e-6),
                             count, resolution, fov_degrees)


def render_reference_views(
    pc: PointCloud,
    cameras: List[Camera],
    render_config: Optional[RenderConfig] = None,
    field_config: Optional[FieldConfig] = None,
) -> List[DepthView]:
    """Render a point cloud as splats initialized the way Gaussian fields are."""
    field_config = field_config or FieldConfig()
    sigma = median_spacing(pc)
    if sigma <= 0:
        sigma = 1e-3
    splats = SplatSet(pc.points, np.full(len(pc), sigma), np.full(len(pc), field_config.initial_alpha))
    return render_views(splats, cameras, render_config)


def generate(
    spec: SceneSpec,
    render_config: Optional[RenderConfig] = None,
    camera_distance_factor: float = 2.5,
) -> SceneTruth:
    """
    Generate a two-state scene from a spec.
    스펙으로부터 2-상태 장면 생성

    Args:
        spec: Scene description (validated, then normalized into the unit cube)
        render_config: Resolution and renderer settings of the reference views
        camera_distance_factor: Camera sphere radius in object diagonals

    Returns:
        SceneTruth, deterministic for a fixed spec seed

    Raises:
        SceneSpecError: Invalid spec or interpenetrating rest pose
    """
    render_config = render_config or RenderConfig()
    # bounds apply to the spec as written, before the unit-cube scaling
    spec.validate()
    spec = normalize_spec(spec)
    spec.validate()

    rng = np.random.default_rng(spec.seed)
    labels_of = spec.part_labels()
    joints_by_part = {joint.part: joint for joint in spec.joints}

    samples, sample_normals = [], []
    for part in spec.parts:
        pts, nrm = _sample_part(part, spec.samples_per_part, rng)
        samples.append(pts)
        sample_normals.append(nrm)
    _check_interpenetration(spec, samples)

    truths: List[JointTruth] = []
    points0, points1, normals0, normals1, labels = [], [], [], [], []
    for i, part in enumerate(spec.parts):
        label = labels_of[i]
        pts, nrm = samples[i], sample_normals[i]
        moved, moved_normals = pts, nrm
        if not part.static:
            joint = joints_by_part[i]
            truth = JointTruth(label, part.name, joint.joint_type,
                               np.asarray(joint.axis, dtype=np.float64),
                               np.asarray(joint.pivot, dtype=np.float64), float(joint.magnitude))
            truths.append(truth)
            motion = truth.motion
            moved = motion.apply(pts)
            moved_normals = nrm @ motion.rotation.T
            moved_normals /= np.linalg.norm(moved_normals, axis=1, keepdims=True)
        points0.append(pts)
        points1.append(moved)
        normals0.append(nrm)
        normals1.append(moved_normals)
        labels.append(np.full(len(pts), label, dtype=np.int64))

    p0 = np.vstack(points0)
    p1 = np.vstack(points1)
    if spec.noise_sigma > 0:
        p0 = p0 + rng.normal(scale=spec.noise_sigma, size=p0.shape)
        p1 = p1 + rng.normal(scale=spec.noise_sigma, size=p1.shape)
    label_array = np.concatenate(labels)
    state0 = PointCloud(p0, np.vstack(normals0), label_array)
    state1 = PointCloud(p1, np.vstack(normals1), label_array)
    truths.sort(key=lambda t: t.label)

    views1, views0 = [], []
    if spec.views > 0:
        cameras = scene_cameras(state1.points, spec.views, render_config.resolution,
                                camera_distance_factor, render_config.fov_degrees)
        views1 = render_reference_views(state1, cameras, render_config)
        views0 = render_reference_views(state0, cameras, render_config)

    logger.info("Generated scene '%s': %d points, %d movable parts, %d views",
                spec.name, len(state0), len(truths), len(views1))
    part_names = {labels_of[i]: part.name for i, part in enumerate(spec.parts)}
    return SceneTruth(state0, state1, truths, views1, views0, spec.name, part_names)
