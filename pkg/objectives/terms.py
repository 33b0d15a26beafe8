"""
Individual loss terms with analytic gradients.
개별 손실 항과 해석적 기울기

Every term returns its unweighted value and a StateGradient over the
alive proposals; the objectives combine them.
"""
from dataclasses import dataclass
from typing import List, Optional, Sequence
import logging

import numpy as np

from config import RenderConfig
from fields import (
    GaussianField,
    PartAssignment,
    PartProposal,
    StateGradient,
    TransformedField,
    alive_proposals,
    assignment_backward,
    motion_backward,
    transform_backward,
)
from geometry import KNNIndex
from rendering import DepthView, depth_loss_grad


logger = logging.getLogger(__name__)


@dataclass
class TermResult:
    """Unweighted value of one term and its gradient."""
    value: float
    grad: StateGradient
    warning: Optional[str] = None


@dataclass(frozen=True)
class Anchor:
    """GMM moments captured at association (μ̂, ŝ)."""
    mu: np.ndarray
    scale: np.ndarray


def _empty(assignment: PartAssignment) -> StateGradient:
    n, m = assignment.movable.shape
    return StateGradient.zeros(n, m)


def member_copies(assignment: PartAssignment, transformed: TransformedField) -> np.ndarray:
    """Indices of moved copies whose primitive belongs to that part's G_m."""
    movable = np.flatnonzero(transformed.movable_mask)
    prob = assignment.movable[transformed.source[movable], transformed.part[movable]]
    return movable[prob > assignment.epsilon]


# ============================================================================
# DEPTH
# ============================================================================

def depth_term(
    field: GaussianField,
    proposals: Sequence[PartProposal],
    assignment: PartAssignment,
    transformed: TransformedField,
    views: Sequence[DepthView],
    render_config: Optional[RenderConfig] = None,
) -> TermResult:
    """Depth loss of T(G) against the state-1 views."""
    result = depth_loss_grad(transformed, views, render_config)
    grad = transform_backward(field, proposals, assignment, transformed,
                              result.grad_centers, result.grad_opacities)
    return TermResult(result.loss, grad)


def rest_depth_term(
    field: GaussianField,
    assignment: PartAssignment,
    views: Sequence[DepthView],
    render_config: Optional[RenderConfig] = None,
) -> TermResult:
    """Depth loss of the untransformed G against the state-0 views."""
    result = depth_loss_grad(field.as_splats(), views, render_config)
    grad = _empty(assignment)
    grad.centers += result.grad_centers
    return TermResult(result.loss, grad)


# ============================================================================
# POINT-BASED TERMS
# ============================================================================

def loss_cd(
    field: GaussianField,
    proposals: Sequence[PartProposal],
    assignment: PartAssignment,
    transformed: TransformedField,
    target: KNNIndex,
) -> TermResult:
    """
    One-sided Chamfer of the moved member centers (∪ G_m) to P¹.

    Mean squared nearest distance; an empty union gives 0.
    """
    grad = _empty(assignment)
    copies = member_copies(assignment, transformed)
    if len(copies) == 0:
        return TermResult(0.0, grad, "no movable members")

    centers = transformed.centers[copies]
    nearest, d2 = target.nearest(centers)
    value = float(d2.mean())
    grad_points = 2.0 * (centers - target.points[nearest]) / len(copies)
    motion_backward(proposals, field.centers, transformed.source[copies],
                    transformed.part[copies], grad_points, grad)
    return TermResult(value, grad)


def loss_pc(
    field: GaussianField,
    proposals: Sequence[PartProposal],
    assignment: PartAssignment,
) -> TermResult:
    """
    Mean non-maximum normalized part probability.
    부분 대조 손실

    Over primitives whose largest P̂ exceeds ε: (1 − max_k R_k) / (M − 1)
    with R the per-primitive normalized likelihoods. M = 1 gives 0.
    """
    grad = _empty(assignment)
    m = assignment.count
    if m < 2:
        return TermResult(0.0, grad)
    rows = np.flatnonzero(assignment.member_mask.any(axis=1) & assignment.valid)
    if len(rows) == 0:
        return TermResult(0.0, grad)

    R = assignment.normalized[rows]
    top = np.argmax(R, axis=1)
    value = float(np.mean((1.0 - R[np.arange(len(rows)), top]) / (m - 1)))

    g_norm = np.zeros_like(assignment.normalized)
    g_norm[rows, top] = -1.0 / ((m - 1) * len(rows))
    grad.add_(assignment_backward(assignment, field, proposals, grad_normalized=g_norm))
    return TermResult(value, grad)


def loss_ls(field: GaussianField, assignment: PartAssignment, k: int = 20) -> TermResult:
    """
    Local smoothness of the static probability.
    정적 확률의 지역 평활 손실

    Mean over primitives and their k nearest neighbors of |P_s(i) − P_s(j)|;
    k is capped at N − 1 and fewer than two primitives give 0.
    """
    grad = _empty(assignment)
    n = len(field)
    k_eff = min(k, n - 1)
    if k_eff < 1:
        return TermResult(0.0, grad)

    idx, _ = KNNIndex(field.centers).query(field.centers, k_eff + 1)
    rows = np.arange(n)[:, None]
    is_self = idx == rows
    # Drop self, or the farthest neighbor when duplicates pushed self out.
    drop = np.where(is_self.any(axis=1), np.argmax(is_self, axis=1), k_eff)
    keep = np.ones_like(idx, dtype=bool)
    keep[np.arange(n), drop] = False
    neighbors = idx[keep].reshape(n, k_eff)

    P_s = field.static_prob
    diff = P_s[:, None] - P_s[neighbors]
    value = float(np.abs(diff).mean())

    sign = np.sign(diff) / (n * k_eff)
    g_static = sign.sum(axis=1)
    np.add.at(g_static, neighbors.ravel(), -sign.ravel())
    grad.static_logits += g_static * P_s * (1.0 - P_s)
    return TermResult(value, grad)


def loss_reg(
    proposals: Sequence[PartProposal],
    anchors: Sequence[Anchor],
    n: int,
    lambda_mu: float = 0.5,
    lambda_s: float = 0.1,
) -> TermResult:
    """
    (1/M) Σ_m [λ_μ ‖μ_m − μ̂_m‖₁ + λ_s ‖s_m − ŝ_m‖₁].
    초기 GMM 모멘트로의 정규화

    Args:
        anchors: One per alive proposal, in order
        n: Primitive count (sizes the gradient buffer)
    """
    alive = alive_proposals(proposals)
    m = len(alive)
    grad = StateGradient.zeros(n, m)
    if m == 0:
        return TermResult(0.0, grad)
    if len(anchors) != m:
        raise ValueError(f"{len(anchors)} anchors for {m} proposals")

    value = 0.0
    for i, (proposal, anchor) in enumerate(zip(alive, anchors)):
        d_mu = proposal.mu - anchor.mu
        scale = proposal.scale
        d_s = scale - anchor.scale
        value += lambda_mu * np.abs(d_mu).sum() + lambda_s * np.abs(d_s).sum()
        grad.mu[i] = lambda_mu * np.sign(d_mu) / m
        grad.log_s[i] = lambda_s * np.sign(d_s) * scale / m
    return TermResult(float(value / m), grad)


def loss_col(
    field: GaussianField,
    proposals: Sequence[PartProposal],
    assignment: PartAssignment,
    transformed: TransformedField,
    k: int = 32,
) -> TermResult:
    """
    Collision term between moved and static copies.
    이동 부분과 정적 부분 간 충돌 손실

    Mean over moved member copies of the mean modulated opacity α̂ of their
    k nearest static copies (P_s > ε), plus the mirrored term. Gradients
    reach the opacities only. An empty side gives 0 and a warning.
    """
    grad = _empty(assignment)
    movable = member_copies(assignment, transformed)
    static = np.flatnonzero(~transformed.movable_mask)
    static = static[assignment.static[transformed.source[static]] > assignment.epsilon]
    if len(movable) == 0 or len(static) == 0:
        logger.warning("Collision loss skipped: %d movable and %d static copies",
                       len(movable), len(static))
        return TermResult(0.0, grad, "one side empty")

    g_opacity = np.zeros(len(transformed))
    value = 0.0
    for queries, references in ((movable, static), (static, movable)):
        k_eff = min(k, len(references))
        idx, _ = KNNIndex(transformed.centers[references]).query(transformed.centers[queries], k_eff)
        neighbors = references[idx]
        value += float(transformed.opacities[neighbors].mean())
        np.add.at(g_opacity, neighbors.ravel(), 1.0 / (len(queries) * k_eff))

    grad.add_(transform_backward(field, proposals, assignment, transformed,
                                 np.zeros_like(transformed.centers), g_opacity))
    return TermResult(value, grad)


def capture_anchors(proposals: Sequence[PartProposal]) -> List[Anchor]:
    """Current (μ, s) of every alive proposal."""
    return [Anchor(p.mu.copy(), p.scale.copy()) for p in alive_proposals(proposals)]
