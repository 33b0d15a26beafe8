"""
Stage-1 and refinement objectives.
1단계 최적화 목적함수 및 후처리 정제 목적함수

stage 1:  L = L_depth(T(G), views¹) + λ_cd L_cd + λ_pc L_pc + λ_ls L_ls + λ_reg L_reg
refine:   L = L_depth(G, views⁰) + L_depth(T(G), views¹) + λ_col L_col
"""
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple
import logging

from config import PipelineConfig
from fields import (
    GaussianField,
    PartAssignment,
    PartProposal,
    StateGradient,
    TransformedField,
    assign,
    transform_object,
)
from geometry import KNNIndex, PointCloud
from objectives.terms import (
    Anchor,
    TermResult,
    depth_term,
    loss_cd,
    loss_col,
    loss_ls,
    loss_pc,
    loss_reg,
    rest_depth_term,
)
from rendering import DepthView


logger = logging.getLogger(__name__)


@dataclass
class Targets:
    """
    Observations the objectives compare against.

    Attributes:
        p1: index over the state-1 cloud
        views1: state-1 reference depth views
        views0: state-0 reference depth views (refinement only)
    """
    p1: KNNIndex
    views1: List[DepthView]
    views0: List[DepthView] = field(default_factory=list)

    @classmethod
    def from_clouds(cls, p1: PointCloud, views1: Sequence[DepthView],
                    views0: Sequence[DepthView] = ()) -> 'Targets':
        return cls(KNNIndex(p1), list(views1), list(views0))


@dataclass
class LossReport:
    """
    Per-term values, their weights and the combined gradient.

    ``total`` is Σ weights[name] · terms[name] and ``grad`` the same
    weighted sum of the per-term gradients.
    """
    terms: Dict[str, float]
    weights: Dict[str, float]
    total: float
    grad: StateGradient
    assignment: Optional[PartAssignment] = None
    warnings: Dict[str, str] = field(default_factory=dict)

    def row(self) -> Dict[str, float]:
        out = dict(self.terms)
        out['total'] = self.total
        return out


def combine(results: Dict[str, TermResult], weights: Dict[str, float], n: int, m: int,
            assignment: Optional[PartAssignment] = None) -> LossReport:
    """Weighted sum of term values and gradients."""
    grad = StateGradient.zeros(n, m)
    total = 0.0
    warnings = {}
    for name, result in results.items():
        weight = weights[name]
        total += weight * result.value
        grad.add_(result.grad, weight)
        if result.warning:
            warnings[name] = result.warning
    return LossReport({name: r.value for name, r in results.items()}, dict(weights),
                      float(total), grad, assignment, warnings)


def _transform(field: GaussianField, proposals: Sequence[PartProposal],
               config: PipelineConfig) -> Tuple[PartAssignment, TransformedField]:
    assignment = assign(field, proposals, config.gaussian.epsilon)
    transformed = transform_object(field, proposals, assignment, config.gaussian.cull_weight)
    return assignment, transformed


def objective_stage1(
    field: GaussianField,
    proposals: Sequence[PartProposal],
    anchors: Sequence[Anchor],
    targets: Targets,
    config: Optional[PipelineConfig] = None,
) -> LossReport:
    """
    Stage-1 objective over the alive proposals.
    1단계 목적함수 (깊이 + Chamfer + 대조 + 평활 + 정규화)
    """
    config = config or PipelineConfig()
    w = config.weights
    assignment, transformed = _transform(field, proposals, config)
    results = {
        'depth': depth_term(field, proposals, assignment, transformed, targets.views1, config.render),
        'cd': loss_cd(field, proposals, assignment, transformed, targets.p1),
        'pc': loss_pc(field, proposals, assignment),
        'ls': loss_ls(field, assignment, w.ls_k),
        'reg': loss_reg(proposals, anchors, len(field), w.mu, w.s),
    }
    weights = {'depth': 1.0, 'cd': w.cd, 'pc': w.pc, 'ls': w.ls, 'reg': w.reg}
    return combine(results, weights, len(field), assignment.count, assignment)


def objective_refine(
    field: GaussianField,
    proposals: Sequence[PartProposal],
    targets: Targets,
    config: Optional[PipelineConfig] = None,
) -> LossReport:
    """
    Refinement objective with both states' views and the collision term.
    후처리 정제 목적함수 (양 상태 깊이 + 충돌)

    Raises:
        ValueError: No state-0 views
    """
    config = config or PipelineConfig()
    if not targets.views0:
        raise ValueError("objective_refine needs state-0 reference views")
    assignment, transformed = _transform(field, proposals, config)
    results = {
        'depth0': rest_depth_term(field, assignment, targets.views0, config.render),
        'depth': depth_term(field, proposals, assignment, transformed, targets.views1, config.render),
        'col': loss_col(field, proposals, assignment, transformed, config.weights.col_k),
    }
    weights = {'depth0': 1.0, 'depth': 1.0, 'col': config.weights.col}
    return combine(results, weights, len(field), assignment.count, assignment)
