"""
Whole-object transformation T(G) with opacity modulation.
물체 전체 변환 T(G)와 불투명도 변조

The static copy of primitive i carries α_i · P_s(x_i); the copy for part
m is moved by that part's motion and carries α_i · P̂_m(x_i).
"""
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from fields.assignment import PartAssignment, assignment_backward
from fields.gaussian_field import GaussianField
from fields.gradients import StateGradient
from fields.proposal import PartProposal, alive_proposals
from geometry import rotate_quaternion, rotation6d_backward
from rendering import SplatSet


STATIC_PART = -1


@dataclass
class TransformedField:
    """
    Materialized T(G).

    Attributes:
        centers: (K, 3) copy centers
        quats: (K, 4) copy orientations
        sigmas: (K,) splat footprints
        opacities: (K,) modulated opacities α̂
        source: (K,) primitive index of each copy
        part: (K,) proposal column, ``STATIC_PART`` for static copies
    """
    centers: np.ndarray
    quats: np.ndarray
    sigmas: np.ndarray
    opacities: np.ndarray
    source: np.ndarray
    part: np.ndarray

    def __len__(self) -> int:
        return len(self.centers)

    @property
    def movable_mask(self) -> np.ndarray:
        return self.part != STATIC_PART

    def as_splats(self) -> SplatSet:
        return SplatSet(self.centers, self.sigmas, self.opacities)


def transform_object(
    field: GaussianField,
    proposals: Sequence[PartProposal],
    assignment: PartAssignment,
    min_weight: float = 0.0,
) -> TransformedField:
    """
    Build T(G): one static copy plus one moved copy per movable part.

    Args:
        field: Primitives at state 0
        proposals: Proposals; columns of ``assignment`` follow the alive ones
        assignment: Part probabilities of ``field``
        min_weight: Copies whose probability is not above this are dropped
            (0 keeps every copy)

    Returns:
        TransformedField, static copies first, then parts in column order
    """
    alive = alive_proposals(proposals)
    if len(assignment) != len(field) or assignment.count != len(alive):
        raise ValueError("assignment does not match the field and proposals")

    def keep(prob: np.ndarray) -> np.ndarray:
        if min_weight > 0:
            return np.flatnonzero(prob > min_weight)
        return np.arange(len(prob))

    sigmas = field.sigmas
    chunks = []
    idx = keep(assignment.static)
    chunks.append((field.centers[idx], field.quats[idx], idx,
                   field.alphas[idx] * assignment.static[idx], STATIC_PART))
    for m, proposal in enumerate(alive):
        idx = keep(assignment.movable[:, m])
        motion = proposal.motion
        chunks.append((motion.apply(field.centers[idx]), rotate_quaternion(motion, field.quats[idx]),
                       idx, field.alphas[idx] * assignment.movable[idx, m], m))

    return TransformedField(
        centers=np.vstack([c[0] for c in chunks]),
        quats=np.vstack([c[1] for c in chunks]),
        sigmas=np.concatenate([sigmas[c[2]] for c in chunks]),
        opacities=np.concatenate([c[3] for c in chunks]),
        source=np.concatenate([c[2] for c in chunks]).astype(np.int64),
        part=np.concatenate([np.full(len(c[2]), c[4], dtype=np.int64) for c in chunks]),
    )


def motion_backward(
    proposals: Sequence[PartProposal],
    centers: np.ndarray,
    source: np.ndarray,
    part: np.ndarray,
    grad_points: np.ndarray,
    grad: StateGradient,
) -> StateGradient:
    """
    Accumulate the gradient of moved points x̂ = R(x − c) + c + t.

    Args:
        proposals: Alive proposals (columns)
        centers: (N, 3) untransformed primitive centers
        source: (K,) primitive of each moved point
        part: (K,) column of each moved point (static entries are skipped)
        grad_points: (K, 3) dL/dx̂
        grad: Buffer updated in place
    """
    for m, proposal in enumerate(alive_proposals(proposals)):
        sel = np.flatnonzero(part == m)
        if len(sel) == 0:
            continue
        motion = proposal.motion
        rot = motion.rotation
        g = grad_points[sel]
        src = source[sel]
        np.add.at(grad.centers, src, g @ rot)
        g_rot = g.T @ (centers[src] - motion.c)
        grad.rotation[m] += rotation6d_backward(motion.r, g_rot)
        total = g.sum(axis=0)
        grad.translation[m] += total
        grad.pivot[m] += total - rot.T @ total
    return grad


def transform_backward(
    field: GaussianField,
    proposals: Sequence[PartProposal],
    assignment: PartAssignment,
    transformed: TransformedField,
    grad_centers: np.ndarray,
    grad_opacities: np.ndarray,
) -> StateGradient:
    """
    Backpropagate render gradients on T(G) to the optimization variables.

    Args:
        grad_centers: (K, 3) dL/d(copy center)
        grad_opacities: (K,) dL/d(copy opacity)
    """
    n, m = assignment.movable.shape
    grad = StateGradient.zeros(n, m)
    static = ~transformed.movable_mask
    src = transformed.source

    np.add.at(grad.centers, src[static], grad_centers[static])
    motion_backward(proposals, field.centers, src, transformed.part, grad_centers, grad)

    g_alpha = grad_opacities * field.alphas[src]
    g_static = np.zeros(n)
    np.add.at(g_static, src[static], g_alpha[static])
    g_movable = np.zeros((n, m))
    movable = ~static
    np.add.at(g_movable, (src[movable], transformed.part[movable]), g_alpha[movable])

    grad.add_(assignment_backward(assignment, field, proposals,
                                  grad_movable=g_movable, grad_static=g_static))
    return grad
