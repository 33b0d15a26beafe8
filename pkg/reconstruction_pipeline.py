"""
Shared reconstruction pipeline and run-directory I/O.
복원 파이프라인 조립 및 실행 결과 디렉터리 입출력

Run directory layout:
    result.json         parts, joint types, axes, pivots, magnitudes
    events.json         prune / freeze / merge / cycle events
    loss.csv            one row of loss terms per optimizer step
    pred_state0.ply     primitive centers with hard part labels
    pred_state1.ply     the same centers moved by their part motions
    field.ply           full primitive state
    proposals.json      final GMM proposals
    proposals_init.json initialization stage output
    config.toml         configuration used
"""
from dataclasses import dataclass, field as dataclass_field
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, Union
import json
import logging

import numpy as np
import pandas as pd

from config import JointType, PipelineConfig, dump_config, load_config
from fields import (
    GaussianField,
    PartAssignment,
    PartProposal,
    assign,
    init_from_pointcloud,
    write_field_ply,
    write_proposals_json,
)
from geometry import PointCloud, RigidMotion, interpolate_motion, matrix_axis_angle, read_pointcloud, write_pointcloud
from objectives import Targets
from optimization import EventLog, associate, enforce_joint_type, optimize, refine, to_builtin
from proposals import ProposalInit, initialize_proposals, write_init_json
from rendering import DepthView
from scenes import SceneTruth, read_scene


logger = logging.getLogger(__name__)

RESULT_FILE = 'result.json'
EVENTS_FILE = 'events.json'
LOSS_FILE = 'loss.csv'
CONFIG_FILE = 'config.toml'
METRICS_FILE = 'metrics.json'

STATUS_ARTICULATED = 'articulated'
STATUS_STATIC = 'static'


# ============================================================================
# RESULT
# ============================================================================

def _part_summary(label: int, motion: RigidMotion, points: int) -> Dict[str, Any]:
    axis, angle = matrix_axis_angle(motion.rotation)
    translation = float(np.linalg.norm(motion.t))
    entry = {
        'label': label,
        'joint_type': motion.joint_type.value,
        'points': points,
        'angle_deg': float(np.degrees(angle)),
        'translation': translation,
        'motion': motion.to_dict(),
    }
    if motion.joint_type == JointType.REVOLUTE:
        entry['axis'] = axis.tolist()
        entry['pivot'] = motion.c.tolist()
    else:
        entry['axis'] = (motion.t / translation).tolist() if translation > 0 else None
        entry['pivot'] = None
    return entry


@dataclass
class ReconstructionResult:
    """
    Output of ``run_pipeline``.

    Attributes:
        status: 'articulated', or 'static' when nothing moves
        field: optimized primitives (state 0)
        proposals: final proposals; motions carry a decided joint type
        labels: hard part label per primitive (0 = static, m + 1 = proposal m)
        init: initialization stage output
        events: run event log
        loss_rows: per-step loss terms
        iterations: optimizer steps taken
        scene: scene name
    """
    status: str
    field: GaussianField
    proposals: List[PartProposal]
    labels: np.ndarray
    init: ProposalInit
    config: PipelineConfig
    events: EventLog = dataclass_field(default_factory=EventLog)
    loss_rows: List[Dict[str, Any]] = dataclass_field(default_factory=list)
    iterations: int = 0
    scene: str = ''
    assignment: Optional[PartAssignment] = None

    @property
    def is_static(self) -> bool:
        return self.status == STATUS_STATIC

    @property
    def part_count(self) -> int:
        return len(self.proposals)

    @property
    def motions(self) -> Dict[int, RigidMotion]:
        return {m + 1: p.motion for m, p in enumerate(self.proposals)}

    def predicted_cloud(self, fraction: float = 1.0) -> PointCloud:
        """Labeled primitive centers at state ``fraction`` (0 = rest, 1 = articulated)."""
        return articulate(self.field.centers, self.labels, self.motions, fraction)

    def to_dict(self) -> Dict[str, Any]:
        counts = np.bincount(self.labels, minlength=self.part_count + 1)
        return {
            'scene': self.scene,
            'status': self.status,
            'seed': self.config.seed,
            'iterations': self.iterations,
            'cycles': len(self.events.of_kind('cycle_end')),
            'tau': float(self.init.tau),
            'movable_points': int(len(self.init.movable)),
            'static_points': int(counts[0]),
            'part_count': self.part_count,
            'parts': [_part_summary(label, motion, int(counts[label]))
                      for label, motion in self.motions.items()],
        }


def articulate(
    points: np.ndarray,
    labels: np.ndarray,
    motions: Dict[int, RigidMotion],
    fraction: float = 1.0,
) -> PointCloud:
    """
    Move every labeled point by its part motion scaled to ``fraction``.

    Label 0 and labels without a motion stay in place.
    """
    points = np.asarray(points, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    moved = points.copy()
    for label, motion in motions.items():
        mask = labels == label
        if np.any(mask):
            moved[mask] = interpolate_motion(motion, fraction).apply(points[mask])
    return PointCloud(moved, labels=labels)


MotionOverrides = Union[Dict[int, RigidMotion], Callable[[int, PartProposal], RigidMotion]]


def override_motions(proposals: List[PartProposal], overrides: Optional[MotionOverrides]) -> None:
    """
    Replace initial motions in place.

    Raises:
        ValueError: Index without a proposal
    """
    if overrides is None:
        return
    if callable(overrides):
        for m, proposal in enumerate(proposals):
            proposal.motion = overrides(m, proposal)
        return
    for index, motion in overrides.items():
        if not 0 <= index < len(proposals):
            raise ValueError(f"motion override for unknown proposal {index}")
        proposals[index].motion = motion


def finalize_motion(motion: RigidMotion, config: PipelineConfig) -> RigidMotion:
    """Apply the joint-type decision to a motion the schedule left undecided."""
    return enforce_joint_type(motion, config.schedule.type_freeze_at, config.schedule.type_freeze_at,
                              config.prune.revolute_min_deg, config.prune.prismatic_min_translation)


# ============================================================================
# PIPELINE
# ============================================================================

def run_pipeline(
    p0: PointCloud,
    p1: PointCloud,
    views1: Sequence[DepthView],
    views0: Sequence[DepthView] = (),
    config: Optional[PipelineConfig] = None,
    motion_overrides: Optional[MotionOverrides] = None,
    scene: str = '',
) -> ReconstructionResult:
    """
    Initialize proposals, optimize with prune/merge cycles, refine.
    제안 초기화 → 주기 최적화(가지치기/병합) → 정제

    Args:
        p0, p1: Point clouds of both states
        views1: State-1 reference depth views
        views0: State-0 reference depth views (refinement skipped without them)
        config: Pipeline configuration
        motion_overrides: Initial motions replacing the searched ones, by
            proposal index or as a function of (index, proposal)
        scene: Name stored in the result

    Returns:
        ReconstructionResult ('static' status when no point moves)

    Raises:
        OptimizationError: Non-finite loss or broken joint constraint
        ValueError: No state-1 views
    """
    config = config or PipelineConfig()
    if not views1:
        raise ValueError("run_pipeline needs state-1 reference views")

    init = initialize_proposals(p0, p1, config)
    field = init_from_pointcloud(p0, config.gaussian)
    if init.is_static:
        logger.warning("Scene '%s' has no movable points; returning a static result", scene)
        return ReconstructionResult(STATUS_STATIC, field, [], np.zeros(len(field), dtype=np.int64),
                                    init, config, scene=scene)

    override_motions(init.proposals, motion_overrides)

    state = associate(field, init, Targets.from_clouds(p1, views1, views0), config)
    optimize(state)
    if views0:
        refine(state)
    else:
        logger.warning("No state-0 views; skipping refinement")

    for proposal in state.proposals:
        proposal.motion = finalize_motion(proposal.motion, config)
    assignment = assign(state.field, state.proposals, config.gaussian.epsilon)
    logger.info("Finished after %d iterations with %d parts", state.iteration, state.part_count)
    return ReconstructionResult(
        status=STATUS_ARTICULATED,
        field=state.field,
        proposals=state.proposals,
        labels=assignment.hard_labels,
        init=init,
        config=config,
        events=state.events,
        loss_rows=state.loss_rows,
        iterations=state.iteration,
        scene=scene,
        assignment=assignment,
    )


def run_scene(
    scene_dir: Union[str, Path],
    config: Optional[PipelineConfig] = None,
    motion_overrides: Optional[MotionOverrides] = None,
) -> ReconstructionResult:
    """``run_pipeline`` on a scene directory written by ``write_scene``."""
    truth = read_scene(scene_dir)
    return run_pipeline(truth.state0, truth.state1, truth.depth_views_state1, truth.depth_views_state0,
                        config, motion_overrides, scene=truth.name)


# ============================================================================
# RUN DIRECTORY
# ============================================================================

def write_json(path: Union[str, Path], document: Any) -> Path:
    path = Path(path)
    with open(path, 'w', encoding='utf-8') as handle:
        json.dump(document, handle, indent=2, sort_keys=True, default=to_builtin)
    return path


def write_run(directory: Union[str, Path], result: ReconstructionResult) -> Path:
    """
    Write a run directory.

    Every file is a pure function of the result, so equal runs give
    byte-identical files.
    """
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    write_json(directory / RESULT_FILE, result.to_dict())
    result.events.write_json(directory / EVENTS_FILE)
    pd.DataFrame(result.loss_rows).to_csv(directory / LOSS_FILE, index=False)
    write_pointcloud(directory / 'pred_state0.ply', result.predicted_cloud(0.0))
    write_pointcloud(directory / 'pred_state1.ply', result.predicted_cloud(1.0))
    write_field_ply(directory / 'field.ply', result.field, result.assignment)
    write_proposals_json(directory / 'proposals.json', result.proposals)
    write_init_json(directory / 'proposals_init.json', result.init)
    (directory / CONFIG_FILE).write_text(dump_config(result.config), encoding='utf-8')
    logger.info("Wrote run to %s", directory)
    return directory


@dataclass
class RunRecord:
    """
    A run directory read back.

    Attributes:
        directory: Run directory
        result: Parsed result.json
        motions: Motion per movable label
        pred_state0, pred_state1: Labeled primitive centers
        config: Stored configuration
        loss: loss.csv (empty frame when missing)
        events: Parsed events.json
        metrics: Parsed metrics.json when present
    """
    directory: Path
    result: Dict[str, Any]
    motions: Dict[int, RigidMotion]
    pred_state0: PointCloud
    pred_state1: PointCloud
    config: PipelineConfig
    loss: pd.DataFrame
    events: List[Dict[str, Any]]
    metrics: Optional[Dict[str, Any]] = None

    @property
    def name(self) -> str:
        return self.result.get('scene') or self.directory.name


def read_run(directory: Union[str, Path]) -> RunRecord:
    """
    Read a run directory written by ``write_run``.

    Raises:
        FileNotFoundError: Missing result or point clouds
        ConfigError: Invalid stored config
    """
    directory = Path(directory)
    for name in (RESULT_FILE, 'pred_state0.ply', 'pred_state1.ply'):
        if not (directory / name).is_file():
            raise FileNotFoundError(f"Run file missing: {directory / name}")

    with open(directory / RESULT_FILE, encoding='utf-8') as handle:
        result = json.load(handle)
    motions = {int(part['label']): RigidMotion.from_dict(part['motion']) for part in result['parts']}

    config_path = directory / CONFIG_FILE
    config = load_config(config_path) if config_path.is_file() else PipelineConfig()
    loss_path = directory / LOSS_FILE
    loss = pd.DataFrame()
    if loss_path.is_file() and loss_path.stat().st_size > 1:
        loss = pd.read_csv(loss_path)

    events, metrics = [], None
    if (directory / EVENTS_FILE).is_file():
        with open(directory / EVENTS_FILE, encoding='utf-8') as handle:
            events = json.load(handle)
    if (directory / METRICS_FILE).is_file():
        with open(directory / METRICS_FILE, encoding='utf-8') as handle:
            metrics = json.load(handle)

    return RunRecord(
        directory=directory,
        result=result,
        motions=motions,
        pred_state0=read_pointcloud(directory / 'pred_state0.ply'),
        pred_state1=read_pointcloud(directory / 'pred_state1.ply'),
        config=config,
        loss=loss,
        events=events,
        metrics=metrics,
    )


# ============================================================================
# INTERMEDIATE STATES
# ============================================================================

def state_fractions(steps: int) -> np.ndarray:
    """``steps`` evenly spaced states from 0 to 1 inclusive."""
    if steps < 2:
        raise ValueError("animation needs at least 2 steps")
    return np.linspace(0.0, 1.0, steps)


def write_animation(
    run: RunRecord,
    out_dir: Union[str, Path],
    steps: int,
    truth: Optional[SceneTruth] = None,
) -> List[Path]:
    """
    Write ``state_XX.ply`` for evenly spaced intermediate states.
    중간 상태 점군 출력

    With ``truth`` the ground-truth parts are articulated the same way
    into ``truth_XX.ply``.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for i, fraction in enumerate(state_fractions(steps)):
        cloud = articulate(run.pred_state0.points, run.pred_state0.labels, run.motions, fraction)
        written.append(write_pointcloud(out_dir / f'state_{i:02d}.ply', cloud))
        if truth is not None:
            reference = articulate(truth.state0.points, truth.state0.labels, truth.motions(), fraction)
            written.append(write_pointcloud(out_dir / f'truth_{i:02d}.ply', reference))
    logger.info("Wrote %d intermediate states to %s", steps, out_dir)
    return written
