"""
Gradient buffers of the optimization variables.
"""
from dataclasses import dataclass, fields
from typing import Dict

import numpy as np


@dataclass
class StateGradient:
    """
    dL/d(parameter) for every optimized group.

    Per-primitive: centers (N, 3), static_logits (N,).
    Per-proposal: mu (M, 3), log_s (M, 3), w_raw (M,), rotation (M, 6),
    pivot (M, 3), translation (M, 3).
    """
    centers: np.ndarray
    static_logits: np.ndarray
    mu: np.ndarray
    log_s: np.ndarray
    w_raw: np.ndarray
    rotation: np.ndarray
    pivot: np.ndarray
    translation: np.ndarray

    @classmethod
    def zeros(cls, n: int, m: int) -> 'StateGradient':
        return cls(
            centers=np.zeros((n, 3)),
            static_logits=np.zeros(n),
            mu=np.zeros((m, 3)),
            log_s=np.zeros((m, 3)),
            w_raw=np.zeros(m),
            rotation=np.zeros((m, 6)),
            pivot=np.zeros((m, 3)),
            translation=np.zeros((m, 3)),
        )

    def items(self):
        for f in fields(self):
            yield f.name, getattr(self, f.name)

    def add_(self, other: 'StateGradient', weight: float = 1.0) -> 'StateGradient':
        """In-place ``self += weight · other``."""
        for name, value in other.items():
            getattr(self, name)[...] += weight * value
        return self

    def scaled(self, weight: float) -> 'StateGradient':
        return StateGradient(**{name: weight * value for name, value in self.items()})

    def is_finite(self) -> bool:
        return all(np.all(np.isfinite(value)) for _, value in self.items())

    def norms(self) -> Dict[str, float]:
        return {name: float(np.linalg.norm(value)) for name, value in self.items()}
