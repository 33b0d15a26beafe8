# Proposals package: movable extraction, over-segmentation, joint search
from .segmentation import (
    Segmentation,
    default_tau,
    extract_movable,
    point_features,
    oversegment,
    overlap_ratio,
    merge_overlapping,
    baseline_segmentation,
)
from .motion_search import (
    MotionInit,
    select_face,
    pivot_candidates,
    search_motion,
    screw_from_motion,
    polish_motion,
    halve_init,
    identity_init,
)
from .initializer import (
    ProposalInit,
    proposal_moments,
    proposals_from_segmentation,
    initialize_proposals,
    write_init_json,
)

__all__ = [
    # Segmentation
    'Segmentation',
    'default_tau',
    'extract_movable',
    'point_features',
    'oversegment',
    'overlap_ratio',
    'merge_overlapping',
    'baseline_segmentation',
    # Joint search
    'MotionInit',
    'select_face',
    'pivot_candidates',
    'search_motion',
    'screw_from_motion',
    'polish_motion',
    'halve_init',
    'identity_init',
    # Stage
    'ProposalInit',
    'proposal_moments',
    'proposals_from_segmentation',
    'initialize_proposals',
    'write_init_json',
]
