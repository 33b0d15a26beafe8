"""
Optimization driver: association, Adam steps, prune/merge cycles, refinement.
최적화 구동부 (연관, 경사 단계, 가지치기/병합 주기, 정제)

Schedule (iteration = completed steps, counted across cycles):
- prune every ``prune_every`` iterations
- joint types decided from ``type_freeze_at`` on, then frozen
- merge round every ``merge_every`` iterations; a cycle reports whether
  any merge happened
"""
from dataclasses import dataclass, field as dataclass_field
from pathlib import Path
from typing import Any, Dict, List, Optional, Union
import json
import logging

import numpy as np

from config import JointType, PipelineConfig
from errors import OptimizationError
from fields import GaussianField, PartProposal, alive_proposals, assign
from objectives import Anchor, LossReport, Targets, capture_anchors, objective_refine, objective_stage1
from optimization.adam import Adam
from optimization.merging import adjacency, evaluate_merges, select_and_fuse
from optimization.pruning import enforce_joint_type, joint_constraint_violation, prune_motions
from proposals import ProposalInit


logger = logging.getLogger(__name__)

MOTION_GROUPS = ('rotation', 'translation', 'pivot')


# ============================================================================
# EVENT LOG
# ============================================================================

class EventLog:
    """
    Ordered run events (prunes, freezes, merges, cycle boundaries).

    Every event gets a strictly increasing ``seq``; iterations never
    decrease.
    """

    def __init__(self):
        self._events: List[Dict[str, Any]] = []

    def __len__(self) -> int:
        return len(self._events)

    def __iter__(self):
        return iter(self._events)

    def append(self, kind: str, iteration: int, **payload) -> Dict[str, Any]:
        if self._events and iteration < self._events[-1]['iteration']:
            raise ValueError(f"event iteration {iteration} precedes {self._events[-1]['iteration']}")
        event = {'seq': len(self._events), 'kind': kind, 'iteration': int(iteration), **payload}
        self._events.append(event)
        return event

    def of_kind(self, kind: str) -> List[Dict[str, Any]]:
        return [e for e in self._events if e['kind'] == kind]

    def to_list(self) -> List[Dict[str, Any]]:
        return list(self._events)

    def write_json(self, path: Union[str, Path]) -> Path:
        path = Path(path)
        with open(path, 'w', encoding='utf-8') as handle:
            json.dump(self._events, handle, indent=2, default=to_builtin)
        return path


def to_builtin(value: Any) -> Any:
    """JSON fallback for numpy scalars and arrays."""
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, JointType):
        return value.value
    raise TypeError(f"{type(value).__name__} is not JSON serializable")


# ============================================================================
# STATE
# ============================================================================

@dataclass
class OptState:
    """
    Everything the optimizer owns.

    Attributes:
        field: Gaussian primitives (state 0)
        proposals: alive proposals, in column order
        anchors: GMM moments captured at the last association or merge
        targets: state-1 cloud and reference views
        config: pipeline configuration
        iteration: completed optimizer steps
        events: run event log
        adam: optimizer moments
        loss_rows: one row of loss terms per step
    """
    field: GaussianField
    proposals: List[PartProposal]
    anchors: List[Anchor]
    targets: Targets
    config: PipelineConfig = dataclass_field(default_factory=PipelineConfig)
    iteration: int = 0
    events: EventLog = dataclass_field(default_factory=EventLog)
    adam: Optional[Adam] = None
    loss_rows: List[Dict[str, Any]] = dataclass_field(default_factory=list)

    def __post_init__(self):
        if not self.proposals:
            raise ValueError("OptState needs at least one proposal")
        if self.adam is None:
            self.adam = Adam(self.config.steps)

    @property
    def part_count(self) -> int:
        return len(self.proposals)


def associate(
    field: GaussianField,
    init: ProposalInit,
    targets: Targets,
    config: Optional[PipelineConfig] = None,
) -> OptState:
    """
    Attach the initialized proposals to the field and capture anchors.
    가우시안-제안 연관

    Raises:
        ValueError: No proposals (static objects never reach the optimizer)
    """
    config = config or PipelineConfig()
    proposals = [p.copy() for p in alive_proposals(init.proposals)]
    if not proposals:
        raise ValueError("associate needs at least one proposal")
    state = OptState(field.copy(), proposals, capture_anchors(proposals), targets, config)
    logger.info("Associated %d proposals with %d primitives", len(proposals), len(field))
    return state


# ============================================================================
# STEPS
# ============================================================================

def _diagnostics(state: OptState, report: LossReport) -> Dict[str, Any]:
    return {
        'iteration': state.iteration,
        'terms': report.terms,
        'total': report.total,
        'grad_norms': report.grad.norms(),
        'proposals': [p.to_dict() for p in state.proposals],
    }


def _frozen_rows(proposals: List[PartProposal]) -> Dict[str, np.ndarray]:
    types = [p.motion.joint_type for p in proposals]
    return {
        'rotation': np.array([t == JointType.PRISMATIC for t in types], dtype=bool),
        'translation': np.array([t == JointType.REVOLUTE for t in types], dtype=bool),
    }


def _apply(state: OptState, report: LossReport, stage: str) -> LossReport:
    if not np.isfinite(report.total) or not report.grad.is_finite():
        raise OptimizationError(f"Non-finite loss at iteration {state.iteration}",
                                _diagnostics(state, report))

    grad = report.grad
    adam = state.adam
    frozen = _frozen_rows(state.proposals)
    proposals = state.proposals

    rotation = adam.update('rotation', np.stack([p.motion.r for p in proposals]), grad.rotation,
                           frozen['rotation'])
    translation = adam.update('translation', np.stack([p.motion.t for p in proposals]),
                              grad.translation, frozen['translation'])
    pivot = adam.update('pivot', np.stack([p.motion.c for p in proposals]), grad.pivot)
    mu = adam.update('mu', np.stack([p.mu for p in proposals]), grad.mu)
    log_s = adam.update('log_s', np.stack([p.log_s for p in proposals]), grad.log_s)
    w_raw = adam.update('w_raw', np.array([p.w_raw for p in proposals]), grad.w_raw)
    log_s = np.maximum(log_s, np.log(state.config.gaussian.min_gmm_scale))

    for m, proposal in enumerate(proposals):
        proposal.motion = proposal.motion.with_params(r=rotation[m], t=translation[m], c=pivot[m])
        proposal.mu = mu[m]
        proposal.log_s = log_s[m]
        proposal.w_raw = float(w_raw[m])
        if joint_constraint_violation(proposal.motion) > 0.0:
            raise OptimizationError(f"Joint-type constraint broken for part {m}",
                                    _diagnostics(state, report))

    state.field.centers = adam.update('centers', state.field.centers, grad.centers)
    state.field.static_logits = adam.update('static_logits', state.field.static_logits,
                                            grad.static_logits)
    state.iteration += 1

    row = {'iteration': state.iteration, 'stage': stage, 'parts': len(proposals), **report.row()}
    state.loss_rows.append(row)
    if state.iteration % state.config.schedule.log_every == 0:
        logger.info("Iter %d [%s] loss=%.5f parts=%d", state.iteration, stage, report.total, len(proposals))
    else:
        logger.debug("Iter %d [%s] %s", state.iteration, stage, report.terms)
    return report


def step(state: OptState) -> LossReport:
    """
    One Adam update of the stage-1 objective.
    1단계 목적함수에 대한 한 번의 Adam 갱신

    Raises:
        OptimizationError: Non-finite loss or gradient, broken joint constraint
    """
    report = objective_stage1(state.field, state.proposals, state.anchors, state.targets, state.config)
    return _apply(state, report, 'stage1')


# ============================================================================
# SCHEDULED OPERATIONS
# ============================================================================

def prune(state: OptState) -> List[dict]:
    """Run collision pruning; pruned parts restart their motion moments."""
    config = state.config
    assignment = assign(state.field, state.proposals, config.gaussian.epsilon)
    reports = prune_motions(state.field, state.proposals, assignment, state.iteration,
                            config.prune, seed=config.seed + state.iteration)
    for report in reports:
        for name in MOTION_GROUPS:
            state.adam.reset_rows(name, [report.pruned])
        state.events.append('prune', state.iteration, **{k: v for k, v in report.to_dict().items()
                                                         if k not in ('kind', 'iteration')})
    return [r.to_dict() for r in reports]


def freeze_joint_types(state: OptState) -> int:
    """Apply the joint-type decision; returns how many parts were decided now."""
    schedule = state.config.schedule
    prune_config = state.config.prune
    decided = 0
    for m, proposal in enumerate(state.proposals):
        before = proposal.motion
        after = enforce_joint_type(before, state.iteration, schedule.type_freeze_at,
                                   prune_config.revolute_min_deg,
                                   prune_config.prismatic_min_translation)
        if after is before:
            continue
        proposal.motion = after
        decided += 1
        state.events.append('freeze', state.iteration, part=m, joint_type=after.joint_type.value,
                            angle_deg=float(np.degrees(before.angle)),
                            translation=float(np.linalg.norm(before.t)))
        logger.info("Iter %d: part %d frozen as %s", state.iteration, m, after.joint_type.value)
    return decided


def merge_round(state: OptState) -> bool:
    """
    One integration round; returns True when the part count dropped.
    제안 통합 1회 수행
    """
    config = state.config
    if state.part_count < 2:
        return False
    assignment = assign(state.field, state.proposals, config.gaussian.epsilon)
    pairs = adjacency(assignment, state.field.centers, config.merge.adjacency_k)
    if not pairs:
        return False
    candidates = evaluate_merges(state.field, state.proposals, pairs, state.targets.views1,
                                 config, assignment)
    fused, log = select_and_fuse(state.field, state.proposals, candidates, assignment,
                                 config.merge.tau_merge, config.gaussian.min_gmm_scale)
    if not log:
        return False

    state.proposals = fused
    state.anchors = capture_anchors(fused)
    state.adam.reset()
    for entry in log:
        state.events.append('merge', state.iteration, **{k: v for k, v in entry.items() if k != 'kind'})
    logger.info("Iter %d: %d merges, %d parts remain", state.iteration, len(log), len(fused))
    return True


def run_cycle(state: OptState) -> bool:
    """
    ``cycle_iters`` stage-1 steps with scheduled pruning, freezing and merging.
    최적화 주기 1회 (가지치기 / 유형 고정 / 병합 포함)

    Returns:
        True when at least one merge happened
    """
    config = state.config
    schedule = config.schedule
    merged = False
    state.events.append('cycle_start', state.iteration, parts=state.part_count)
    for _ in range(schedule.cycle_iters):
        step(state)
        it = state.iteration
        if config.ablation.prune and it % schedule.prune_every == 0:
            prune(state)
        if it >= schedule.type_freeze_at:
            freeze_joint_types(state)
        if config.ablation.merge and it % schedule.merge_every == 0:
            merged = merge_round(state) or merged
    state.events.append('cycle_end', state.iteration, parts=state.part_count, merged=merged)
    return merged


def optimize(state: OptState) -> OptState:
    """Repeat cycles until a cycle merges nothing or ``max_cycles`` is reached."""
    config = state.config
    cycles = config.schedule.max_cycles if config.ablation.merge else 1
    for cycle in range(cycles):
        logger.info("Cycle %d: %d parts", cycle + 1, state.part_count)
        if not run_cycle(state):
            break
    return state


def refine(state: OptState, iterations: Optional[int] = None) -> OptState:
    """
    Post-processing refinement on both states' views with the collision term.
    후처리 정제 (양 상태 깊이 + 충돌 손실)

    Joint types stay frozen; zero iterations leave the state untouched.
    """
    iterations = state.config.schedule.refine_iters if iterations is None else iterations
    if iterations <= 0:
        return state
    state.adam.reset()
    state.events.append('refine_start', state.iteration, iterations=iterations)
    for _ in range(iterations):
        report = objective_refine(state.field, state.proposals, state.targets, state.config)
        _apply(state, report, 'refine')
    state.events.append('refine_end', state.iteration)
    return state
