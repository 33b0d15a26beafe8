"""
Mobility proposal initialization stage.
이동 부분 제안 초기화 단계

extract → over-segment → merge overlaps → per-proposal joint search, then
GMM components from the member moments with half-state motions.
"""
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Sequence, Union
import json
import logging

import numpy as np

from config import PipelineConfig
from errors import DegenerateGeometryError
from fields import PartProposal
from geometry import KNNIndex, PointCloud, RigidMotion, as_points, obb_from_points
from proposals.motion_search import MotionInit, halve_init, identity_init, search_motion
from proposals.segmentation import (
    Segmentation,
    baseline_segmentation,
    default_tau,
    extract_movable,
    merge_overlapping,
    oversegment,
)


logger = logging.getLogger(__name__)


@dataclass
class ProposalInit:
    """
    Output of the initialization stage.

    Attributes:
        tau: movable threshold used
        movable: P⁰ indices of the movable points
        segmentation: proposals over ``movable`` (None when nothing moves)
        motion_inits: per proposal search result (None where not searched)
        proposals: GMM components with half-state motions
    """
    tau: float
    movable: np.ndarray
    segmentation: Optional[Segmentation] = None
    motion_inits: List[Optional[MotionInit]] = field(default_factory=list)
    proposals: List[PartProposal] = field(default_factory=list)

    @property
    def is_static(self) -> bool:
        return len(self.proposals) == 0

    def to_dict(self) -> dict:
        entries = []
        if self.segmentation is not None:
            for m, members in enumerate(self.segmentation.members):
                mi = self.motion_inits[m] if m < len(self.motion_inits) else None
                entries.append({
                    'seed': int(self.movable[self.segmentation.seeds[m]]),
                    'points': self.movable[members].tolist(),
                    'motion_init': None if mi is None else mi.to_dict(),
                })
        return {
            'tau': float(self.tau),
            'movable_count': int(len(self.movable)),
            'proposals': entries,
            'gmm': [p.to_dict() for p in self.proposals],
        }


def proposal_moments(points: np.ndarray, min_scale: float):
    """Mean and per-axis std (clamped to ``min_scale``) of a point set."""
    return points.mean(axis=0), np.maximum(points.std(axis=0), min_scale)


def proposals_from_segmentation(
    points: np.ndarray,
    segmentation: Segmentation,
    motions: Sequence[RigidMotion],
    min_scale: float = 1e-3,
) -> List[PartProposal]:
    """
    One GMM component per proposal from its member points.

    μ and s are the member mean and std, ω = |P̂_m| / Σ|P̂_k|. Empty
    proposals are dropped with a warning.
    """
    sizes = segmentation.sizes()
    total = float(sizes.sum())
    out = []
    for m, members in enumerate(segmentation.members):
        if len(members) == 0:
            logger.warning("Dropping empty proposal %d", m)
            continue
        member_points = points[members]
        mean, std = proposal_moments(member_points, min_scale)
        try:
            obb = obb_from_points(member_points)
        except DegenerateGeometryError:
            obb = None
        out.append(PartProposal.from_moments(mean, std, len(members) / total, motions[m], obb))
    return out


def initialize_proposals(
    p0: Union[PointCloud, np.ndarray],
    p1: Union[PointCloud, np.ndarray],
    config: Optional[PipelineConfig] = None,
) -> ProposalInit:
    """
    Run the initialization stage.
    제안 초기화 실행

    Returns:
        ProposalInit; no proposals when no point moves
    """
    config = config or PipelineConfig()
    init = config.init
    points0 = as_points(p0)
    index1 = KNNIndex(p1)

    tau = init.tau if init.tau is not None else default_tau(points0, init.tau_factor)
    movable = extract_movable(points0, index1, tau)
    logger.info("Movable extraction: %d of %d points above tau=%.4g", len(movable), len(points0), tau)
    if len(movable) == 0:
        logger.warning("No movable points found; the object is static")
        return ProposalInit(tau, movable)

    moving = points0[movable]
    points1 = index1.points
    arrived = points1[extract_movable(points1, KNNIndex(points0), tau)]
    if config.ablation.overseg:
        n = min(init.seed_count, len(moving))
        if n < init.seed_count:
            logger.warning("Only %d movable points; using %d seeds", len(moving), n)
        segmentation = oversegment(moving, n, seed=init.seed, feature_knn=init.feature_knn,
                                   beta_factor=init.beta_factor,
                                   shared_margin=init.shared_cost_margin)
        segmentation = merge_overlapping(segmentation, init.overlap_threshold)
    else:
        parts = config.ablation.baseline_parts or init.seed_count
        segmentation = baseline_segmentation(moving, parts)

    motion_inits: List[Optional[MotionInit]] = []
    motions: List[RigidMotion] = []
    for m, members in enumerate(segmentation.members):
        part = moving[members]
        mi = None
        if config.ablation.motion_init and len(part) >= 3:
            try:
                mi = search_motion(part, index1, init, pivot_target=arrived)
            except DegenerateGeometryError as error:
                logger.warning("Proposal %d: %s; starting from the identity", m, error)
        motion_inits.append(mi)
        motions.append(halve_init(mi) if mi is not None else identity_init(part))

    proposals = proposals_from_segmentation(moving, segmentation, motions,
                                            config.gaussian.min_gmm_scale)
    logger.info("Initialized %d proposals", len(proposals))
    return ProposalInit(tau, movable, segmentation, motion_inits, proposals)


def write_init_json(path: Union[str, Path], result: ProposalInit) -> Path:
    """Write ``proposals_init.json``."""
    path = Path(path)
    with open(path, 'w', encoding='utf-8') as handle:
        json.dump(result.to_dict(), handle, indent=2)
    return path
