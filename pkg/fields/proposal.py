"""
Part proposals and their GMM likelihoods.
부분 제안(proposal)과 GMM 우도

P_m(x) = ω_m · N(x; μ_m, diag(s_m²)), with ω_m = softplus(w_raw) and
s_m = exp(log_s). Likelihoods are evaluated in the log domain.
"""
from dataclasses import dataclass, field, replace
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.special import expit

from geometry import OBB, RigidMotion


LOG_2PI = np.log(2.0 * np.pi)


def softplus(x):
    return np.logaddexp(0.0, x)


def inverse_softplus(y):
    """x with softplus(x) = y (y > 0)."""
    y = np.asarray(y, dtype=np.float64)
    return y + np.log(-np.expm1(-y))


@dataclass
class PartProposal:
    """
    One mobility proposal: GMM component plus motion hypothesis.

    Attributes:
        mu: (3,) component mean
        log_s: (3,) log of the per-axis standard deviations
        w_raw: softplus-parameterized mixture weight
        motion: part motion (state 0 → state 1)
        obb: latest OBB of the member centers
        alive: False once merged away
    """
    mu: np.ndarray
    log_s: np.ndarray
    w_raw: float
    motion: RigidMotion = field(default_factory=RigidMotion)
    obb: Optional[OBB] = None
    alive: bool = True

    def __post_init__(self):
        self.mu = np.array(self.mu, dtype=np.float64).reshape(3)
        self.log_s = np.array(self.log_s, dtype=np.float64).reshape(3)
        self.w_raw = float(self.w_raw)

    @classmethod
    def from_moments(cls, mean, std, weight: float, motion: Optional[RigidMotion] = None,
                     obb: Optional[OBB] = None) -> 'PartProposal':
        return cls(mean, np.log(np.asarray(std, dtype=np.float64)), float(inverse_softplus(weight)),
                   motion or RigidMotion.identity(mean), obb)

    @property
    def scale(self) -> np.ndarray:
        return np.exp(self.log_s)

    @property
    def weight(self) -> float:
        return float(softplus(self.w_raw))

    @property
    def covariance(self) -> np.ndarray:
        return np.diag(self.scale ** 2)

    def copy(self) -> 'PartProposal':
        return replace(self, mu=self.mu.copy(), log_s=self.log_s.copy())

    def to_dict(self) -> dict:
        return {
            'mu': self.mu.tolist(),
            'scale': self.scale.tolist(),
            'weight': self.weight,
            'motion': self.motion.to_dict(),
            'obb': None if self.obb is None else self.obb.to_dict(),
            'alive': self.alive,
        }

    @classmethod
    def from_dict(cls, data: dict) -> 'PartProposal':
        return cls(
            mu=data['mu'],
            log_s=np.log(np.asarray(data['scale'], dtype=np.float64)),
            w_raw=float(inverse_softplus(data['weight'])),
            motion=RigidMotion.from_dict(data['motion']),
            obb=None if data.get('obb') is None else OBB.from_dict(data['obb']),
            alive=bool(data.get('alive', True)),
        )


def alive_proposals(proposals: Sequence[PartProposal]) -> List[PartProposal]:
    return [p for p in proposals if p.alive]


def _stack(proposals: Sequence[PartProposal]) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    mu = np.stack([p.mu for p in proposals])
    log_s = np.stack([p.log_s for p in proposals])
    w_raw = np.array([p.w_raw for p in proposals])
    return mu, log_s, w_raw


def log_part_likelihood(proposals: Sequence[PartProposal], x: np.ndarray) -> np.ndarray:
    """
    log P_m(x) for every point and proposal.

    Args:
        proposals: Proposals (all are evaluated)
        x: (N, 3) points or a single 3-vector

    Returns:
        (N, M) log-likelihoods

    Raises:
        ValueError: No proposals
    """
    if not proposals:
        raise ValueError("part likelihood needs at least one proposal")
    x = np.atleast_2d(np.asarray(x, dtype=np.float64))
    mu, log_s, w_raw = _stack(proposals)
    z = (x[:, None, :] - mu[None]) / np.exp(log_s)[None]
    return (np.log(softplus(w_raw))[None]
            - 1.5 * LOG_2PI
            - log_s.sum(axis=1)[None]
            - 0.5 * np.sum(z * z, axis=2))


def part_likelihood(proposals: Sequence[PartProposal], x: np.ndarray) -> np.ndarray:
    """
    P_m(x) = ω_m · N(x; μ_m, Σ_m).
    부분 우도 (가중 정규 밀도)

    Returns:
        (N, M) likelihoods; a single 3-vector gives shape (1, M)
    """
    return np.exp(log_part_likelihood(proposals, x))


@dataclass
class LikelihoodGradient:
    """Gradients reached through log P_m(x)."""
    mu: np.ndarray
    log_s: np.ndarray
    w_raw: np.ndarray
    x: np.ndarray


def log_likelihood_backward(
    proposals: Sequence[PartProposal],
    x: np.ndarray,
    grad_log: np.ndarray,
) -> LikelihoodGradient:
    """
    Backpropagate dL/d(log P) (N, M) to μ, log s, w_raw and x.
    """
    x = np.atleast_2d(np.asarray(x, dtype=np.float64))
    mu, log_s, w_raw = _stack(proposals)
    inv_var = np.exp(-2.0 * log_s)
    diff = x[:, None, :] - mu[None]
    g = grad_log[:, :, None]

    d_mu = np.sum(g * diff * inv_var[None], axis=0)
    d_log_s = np.sum(g * (diff * diff * inv_var[None] - 1.0), axis=0)
    d_w = grad_log.sum(axis=0) * expit(w_raw) / softplus(w_raw)
    d_x = -np.sum(g * diff * inv_var[None], axis=1)
    return LikelihoodGradient(d_mu, d_log_s, d_w, d_x)


def part_likelihood_backward(
    proposals: Sequence[PartProposal],
    x: np.ndarray,
    grad_output: np.ndarray,
) -> LikelihoodGradient:
    """Backpropagate dL/dP (N, M) of ``part_likelihood``."""
    likelihood = part_likelihood(proposals, x)
    return log_likelihood_backward(proposals, x, grad_output * likelihood)
