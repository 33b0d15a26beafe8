# Optimization package: pruning, proposal integration, Adam, cycles, refinement
from .pruning import (
    CollisionReport,
    obb_overlap_volume,
    transform_obb,
    prune_prismatic,
    prune_revolute,
    planned_action,
    enforce_joint_type,
    joint_constraint_violation,
    detect_collisions,
    member_obbs,
    prune_motions,
)
from .merging import (
    MergeCandidate,
    adjacency,
    score,
    evaluate_merges,
    fuse_proposals,
    select_and_fuse,
)
from .adam import Adam
from .optimizer import (
    EventLog,
    to_builtin,
    OptState,
    associate,
    step,
    prune,
    freeze_joint_types,
    merge_round,
    run_cycle,
    optimize,
    refine,
)

__all__ = [
    # Pruning
    'CollisionReport',
    'obb_overlap_volume',
    'transform_obb',
    'prune_prismatic',
    'prune_revolute',
    'planned_action',
    'enforce_joint_type',
    'joint_constraint_violation',
    'detect_collisions',
    'member_obbs',
    'prune_motions',
    # Merging
    'MergeCandidate',
    'adjacency',
    'score',
    'evaluate_merges',
    'fuse_proposals',
    'select_and_fuse',
    # Optimizer
    'Adam',
    'EventLog',
    'to_builtin',
    'OptState',
    'associate',
    'step',
    'prune',
    'freeze_joint_types',
    'merge_round',
    'run_cycle',
    'optimize',
    'refine',
]
