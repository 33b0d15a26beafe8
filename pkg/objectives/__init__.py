# Objectives package: loss terms and the two optimization objectives
from .terms import (
    TermResult,
    Anchor,
    member_copies,
    depth_term,
    rest_depth_term,
    loss_cd,
    loss_pc,
    loss_ls,
    loss_reg,
    loss_col,
    capture_anchors,
)
from .objective import (
    Targets,
    LossReport,
    combine,
    objective_stage1,
    objective_refine,
)

__all__ = [
    # Terms
    'TermResult',
    'Anchor',
    'member_copies',
    'depth_term',
    'rest_depth_term',
    'loss_cd',
    'loss_pc',
    'loss_ls',
    'loss_reg',
    'loss_col',
    'capture_anchors',
    # Objectives
    'Targets',
    'LossReport',
    'combine',
    'objective_stage1',
    'objective_refine',
]
