"""
Proposal integration: adjacency, motion-swap scoring and fusion.
제안 통합 (인접성, 모션 교체 점수, 병합)

Two adjacent proposals are merged when moving one with the other's motion
barely changes the rendered depth error of the end state.
"""
from dataclasses import dataclass
from typing import Iterable, List, Optional, Sequence, Set, Tuple
import logging

import numpy as np

from config import PipelineConfig
from errors import DegenerateGeometryError
from fields import GaussianField, PartAssignment, PartProposal, alive_proposals, assign, transform_object
from geometry import KNNIndex, obb_from_points
from rendering import DepthView, depth_l1, render_views


logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class MergeCandidate:
    """
    Motion swap of one ordered pair.

    Attributes:
        pair: (i, j) alive columns; i is moved by j's motion
        current: score of the current state
        swapped: score after the swap
    """
    pair: Tuple[int, int]
    current: float
    swapped: float

    @property
    def delta(self) -> float:
        return abs(self.current - self.swapped)

    def to_dict(self) -> dict:
        return {'pair': list(self.pair), 'current': self.current,
                'swapped': self.swapped, 'delta': self.delta}


# ============================================================================
# ADJACENCY
# ============================================================================

def adjacency(assignment: PartAssignment, centers: np.ndarray, k: int = 8) -> Set[Tuple[int, int]]:
    """
    Unordered pairs of parts whose member centers are k-NN neighbors.
    부분 인접성 (이동 중심 합집합 위 k-NN)

    The search runs over the union of all G_m (a primitive shared by two
    parts appears once per part). Pair (i, j) is adjacent when a center of
    G_i has a neighbor, other than itself, belonging to G_j.
    """
    m = assignment.count
    if m < 2:
        return set()

    rows, labels = [], []
    for part in range(m):
        members = assignment.members(part)
        rows.append(members)
        labels.append(np.full(len(members), part, dtype=np.int64))
    source = np.concatenate(rows)
    labels = np.concatenate(labels)
    total = len(source)
    if total < 2:
        return set()

    points = np.asarray(centers, dtype=np.float64)[source]
    k_eff = min(k, total - 1)
    idx, _ = KNNIndex(points).query(points, k_eff + 1)
    entries = np.arange(total)[:, None]
    is_self = idx == entries
    drop = np.where(is_self.any(axis=1), np.argmax(is_self, axis=1), k_eff)
    keep = np.ones_like(idx, dtype=bool)
    keep[np.arange(total), drop] = False
    neighbors = idx[keep].reshape(total, k_eff)

    a = np.repeat(labels, k_eff)
    b = labels[neighbors.ravel()]
    cross = a != b
    pairs = np.unique(np.sort(np.column_stack([a[cross], b[cross]]), axis=1), axis=0)
    return {(int(i), int(j)) for i, j in pairs}


# ============================================================================
# SCORING
# ============================================================================

def _score(field: GaussianField, proposals: Sequence[PartProposal], assignment: PartAssignment,
           views: Sequence[DepthView], config: PipelineConfig) -> float:
    transformed = transform_object(field, proposals, assignment, config.gaussian.cull_weight)
    rendered = render_views(transformed, [v.camera for v in views], config.render)
    height, width = views[0].depth.shape
    total = sum(depth_l1(r, v) for r, v in zip(rendered, views))
    return float(total / (len(views) * height * width))


def score(
    field: GaussianField,
    proposals: Sequence[PartProposal],
    views: Sequence[DepthView],
    config: Optional[PipelineConfig] = None,
    assignment: Optional[PartAssignment] = None,
) -> float:
    """
    Mean per-pixel depth L1 of T(G) over the end-state views.
    깊이 렌더 점수 S(T)

    Raises:
        ValueError: No views
    """
    if not views:
        raise ValueError("score needs at least one view")
    config = config or PipelineConfig()
    if assignment is None:
        assignment = assign(field, proposals, config.gaussian.epsilon)
    return _score(field, proposals, assignment, views, config)


def evaluate_merges(
    field: GaussianField,
    proposals: Sequence[PartProposal],
    pairs: Iterable[Tuple[int, int]],
    views: Sequence[DepthView],
    config: Optional[PipelineConfig] = None,
    assignment: Optional[PartAssignment] = None,
) -> List[MergeCandidate]:
    """
    Score every ordered version of the adjacent pairs.
    인접 쌍의 모션 교체 점수 평가

    For (i, j) part i's copies are moved by j's motion; the rest of the
    state is unchanged. The part probabilities do not depend on motions,
    so one assignment serves every swap.
    """
    config = config or PipelineConfig()
    alive = [p.copy() for p in alive_proposals(proposals)]
    if assignment is None:
        assignment = assign(field, alive, config.gaussian.epsilon)
    current = score(field, alive, views, config, assignment)

    candidates = []
    for a, b in sorted(pairs):
        for i, j in ((a, b), (b, a)):
            swapped = list(alive)
            swapped[i] = alive[i].copy()
            swapped[i].motion = alive[j].motion
            value = _score(field, swapped, assignment, views, config)
            candidates.append(MergeCandidate((i, j), current, value))
            logger.debug("Swap %d←%d: ΔS=%.3e", i, j, candidates[-1].delta)
    return candidates


# ============================================================================
# FUSION
# ============================================================================

def fuse_proposals(
    field: GaussianField,
    assignment: PartAssignment,
    proposals: Sequence[PartProposal],
    i: int,
    j: int,
    min_scale: float = 1e-3,
) -> PartProposal:
    """
    Proposal covering G_i ∪ G_j and moving with j's motion.

    μ and the per-axis std are refit to the union of member centers
    (std clamped at ``min_scale``), ω = ω_i + ω_j, the OBB is refit.
    """
    pi, pj = proposals[i], proposals[j]
    members = np.union1d(assignment.members(i), assignment.members(j))
    weight = pi.weight + pj.weight
    if len(members) == 0:
        return PartProposal.from_moments(pj.mu, pj.scale, weight, pj.motion, pj.obb)

    points = field.centers[members]
    std = np.maximum(points.std(axis=0), min_scale)
    try:
        obb = obb_from_points(points)
    except DegenerateGeometryError:
        obb = None
    return PartProposal.from_moments(points.mean(axis=0), std, weight, pj.motion, obb)


def select_and_fuse(
    field: GaussianField,
    proposals: Sequence[PartProposal],
    candidates: Sequence[MergeCandidate],
    assignment: PartAssignment,
    tau_merge: float = 1e-3,
    min_scale: float = 1e-3,
) -> Tuple[List[PartProposal], List[dict]]:
    """
    Apply the merges of one round.
    병합 후보 선택 및 제안 융합

    Candidates are taken in ascending ΔS (ties by pair) while ΔS < tau_merge;
    a part already merged this round is skipped. The fused proposal takes
    j's place and i is removed.

    Returns:
        (alive proposals after the round, merge log entries)
    """
    alive = [p.copy() for p in alive_proposals(proposals)]
    consumed: Set[int] = set()
    fused = {}
    log = []
    for candidate in sorted(candidates, key=lambda c: (c.delta, c.pair)):
        if candidate.delta >= tau_merge:
            break
        i, j = candidate.pair
        if i in consumed or j in consumed:
            continue
        fused[j] = fuse_proposals(field, assignment, alive, i, j, min_scale)
        consumed.update((i, j))
        log.append({'kind': 'merge', 'absorbed': i, 'survivor': j, 'delta': candidate.delta})

    if not log:
        return alive, []

    absorbed = {entry['absorbed'] for entry in log}
    result = []
    for m, proposal in enumerate(alive):
        if m in absorbed:
            continue
        result.append(fused.get(m, proposal))
    for entry in log:
        entry['survivor_after'] = entry['survivor'] - sum(1 for a in absorbed if a < entry['survivor'])
        logger.info("Merged part %d into %d (ΔS=%.3e)", entry['absorbed'], entry['survivor'], entry['delta'])
    return result, log
