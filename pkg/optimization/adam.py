"""
Adaptive-moment updates with per-group step sizes.
파라미터 그룹별 Adam 업데이트
"""
from typing import Dict, Iterable, Optional

import numpy as np

from config import StepSizes


GROUP_STEP = {
    'rotation': 'rotation',
    'translation': 'translation',
    'pivot': 'pivot',
    'centers': 'centers',
    'mu': 'gmm',
    'log_s': 'gmm',
    'w_raw': 'gmm',
    'static_logits': 'static_logits',
}


class Adam:
    """
    Adam over named parameter arrays.

    Moments and step counts are kept per row (first axis) so single rows
    can be frozen or reset without disturbing the rest of the group.
    """

    def __init__(self, steps: Optional[StepSizes] = None):
        self.steps = steps or StepSizes()
        self._moments: Dict[str, tuple] = {}

    def learning_rate(self, name: str) -> float:
        return getattr(self.steps, GROUP_STEP[name])

    def _moments_for(self, name: str, shape) -> tuple:
        state = self._moments.get(name)
        if state is None or state[0].shape != shape:
            state = (np.zeros(shape), np.zeros(shape), np.zeros(shape[0], dtype=np.int64))
            self._moments[name] = state
        return state

    def update(
        self,
        name: str,
        param: np.ndarray,
        grad: np.ndarray,
        frozen: Optional[np.ndarray] = None,
    ) -> np.ndarray:
        """
        Return the updated copy of ``param``.

        Args:
            name: Group name (key of GROUP_STEP)
            param: Current values, first axis = rows
            grad: Same shape as ``param``
            frozen: Optional (rows,) mask of rows left untouched
        """
        param = np.asarray(param, dtype=np.float64)
        grad = np.asarray(grad, dtype=np.float64)
        if param.shape != grad.shape:
            raise ValueError(f"{name}: gradient shape {grad.shape} != parameter shape {param.shape}")
        if param.shape[0] == 0:
            return param.copy()

        m, v, count = self._moments_for(name, param.shape)
        active = np.ones(param.shape[0], dtype=bool) if frozen is None else ~np.asarray(frozen, bool)
        b1, b2 = self.steps.beta1, self.steps.beta2

        count[active] += 1
        m[active] = b1 * m[active] + (1.0 - b1) * grad[active]
        v[active] = b2 * v[active] + (1.0 - b2) * grad[active] ** 2

        steps = count[active].reshape((-1,) + (1,) * (param.ndim - 1))
        m_hat = m[active] / (1.0 - b1 ** steps)
        v_hat = v[active] / (1.0 - b2 ** steps)
        out = param.copy()
        out[active] -= self.learning_rate(name) * m_hat / (np.sqrt(v_hat) + self.steps.eps)
        return out

    def reset(self, names: Optional[Iterable[str]] = None) -> None:
        """Forget the moments of the given groups (all when None)."""
        if names is None:
            self._moments.clear()
            return
        for name in names:
            self._moments.pop(name, None)

    def reset_rows(self, name: str, rows: Iterable[int]) -> None:
        state = self._moments.get(name)
        if state is None:
            return
        rows = list(rows)
        for array in state:
            array[rows] = 0
