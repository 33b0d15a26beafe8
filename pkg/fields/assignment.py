"""
Soft part assignment of primitives.
프리미티브의 부분 할당

P̂_m(x_i) = (1 − P_s(x_i)) · P_m(x_i) / Σ_k P_k(x_i)

A primitive whose likelihood sum underflows in float64 gets all-zero
movable probabilities and is treated as static.
"""
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.special import logsumexp

from fields.gaussian_field import GaussianField
from fields.gradients import StateGradient
from fields.proposal import PartProposal, alive_proposals, log_likelihood_backward, log_part_likelihood


LOG_TINY = float(np.log(np.finfo(np.float64).tiny))


@dataclass
class PartAssignment:
    """
    Per-primitive part probabilities.

    Columns follow the alive proposals in their list order.

    Attributes:
        normalized: (N, M) P_m / Σ_k P_k (zero rows where the sum underflows)
        static: (N,) P_s
        movable: (N, M) P̂_m
        valid: (N,) False where the likelihood sum underflows
        epsilon: membership threshold of G_m
    """
    normalized: np.ndarray
    static: np.ndarray
    movable: np.ndarray
    valid: np.ndarray
    epsilon: float = 0.01

    @property
    def count(self) -> int:
        return self.movable.shape[1]

    def __len__(self) -> int:
        return self.movable.shape[0]

    @property
    def member_mask(self) -> np.ndarray:
        """(N, M) membership of G_m (strict P̂_m > ε)."""
        return self.movable > self.epsilon

    def members(self, m: int) -> np.ndarray:
        return np.flatnonzero(self.movable[:, m] > self.epsilon)

    @property
    def static_mask(self) -> np.ndarray:
        return self.static > self.epsilon

    @property
    def hard_labels(self) -> np.ndarray:
        """0 = static, m + 1 = proposal column m (argmax, ties to the lower label)."""
        stacked = np.column_stack([self.static, self.movable])
        return np.argmax(stacked, axis=1)


def assign(
    field: GaussianField,
    proposals: Sequence[PartProposal],
    epsilon: float = 0.01,
) -> PartAssignment:
    """
    Assign primitives to the static part and the alive proposals.

    Raises:
        ValueError: No alive proposal
    """
    alive = alive_proposals(proposals)
    if not alive:
        raise ValueError("assign needs at least one alive proposal")
    log_p = log_part_likelihood(alive, field.centers)
    total = logsumexp(log_p, axis=1)
    valid = total >= LOG_TINY
    normalized = np.zeros_like(log_p)
    normalized[valid] = np.exp(log_p[valid] - total[valid, None])
    static = field.static_prob
    movable = (1.0 - static)[:, None] * normalized
    return PartAssignment(normalized, static, movable, valid, epsilon)


def assignment_backward(
    assignment: PartAssignment,
    field: GaussianField,
    proposals: Sequence[PartProposal],
    grad_movable: Optional[np.ndarray] = None,
    grad_static: Optional[np.ndarray] = None,
    grad_normalized: Optional[np.ndarray] = None,
) -> StateGradient:
    """
    Backpropagate gradients on P̂, P_s and the normalized likelihoods.

    Returns:
        StateGradient with centers, static_logits and GMM parameters filled
    """
    alive = alive_proposals(proposals)
    n, m = assignment.movable.shape
    grad = StateGradient.zeros(n, m)
    R = assignment.normalized
    P_s = assignment.static

    g_norm = np.zeros((n, m))
    g_static = np.zeros(n) if grad_static is None else np.array(grad_static, dtype=np.float64)
    if grad_movable is not None:
        g_norm += (1.0 - P_s)[:, None] * grad_movable
        g_static -= np.sum(grad_movable * R, axis=1)
    if grad_normalized is not None:
        g_norm += grad_normalized
    g_norm[~assignment.valid] = 0.0

    grad.static_logits[:] = g_static * P_s * (1.0 - P_s)

    g_log = R * (g_norm - np.sum(R * g_norm, axis=1, keepdims=True))
    if np.any(g_log):
        back = log_likelihood_backward(alive, field.centers, g_log)
        grad.mu[:] = back.mu
        grad.log_s[:] = back.log_s
        grad.w_raw[:] = back.w_raw
        grad.centers[:] = back.x
    return grad
