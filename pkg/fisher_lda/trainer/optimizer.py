"""
optimizer.py

Learning-rate schedule and SGD with Nesterov momentum.
"""

import logging
from typing import Dict, Mapping

import numpy as np

from ..exceptions import ConsistencyError
from .config import TrainConfig

logger = logging.getLogger(__name__)


def learning_rate(config: TrainConfig, epoch: int) -> float:
    """lr_init * 2^(-floor(epoch / lr_halving_period_epochs))."""
    return config.lr_init * 2.0 ** (-(epoch // config.lr_halving_period_epochs))


class NesterovSGD:
    """
    SGD with Nesterov momentum in the lookahead-free form

        buf <- momentum * buf + g
        theta <- theta - lr * (g + momentum * buf)

    Weight decay adds ``weight_decay * theta`` to g for weight matrices only
    (names ending in ".W"), or for every parameter when ``decay_all_params``.
    """

    def __init__(self, momentum: float, weight_decay: float, decay_all_params: bool = False):
        self.momentum = momentum
        self.weight_decay = weight_decay
        self.decay_all_params = decay_all_params
        self.buffers: Dict[str, np.ndarray] = {}

    def decays(self, name: str) -> bool:
        return self.weight_decay > 0 and (self.decay_all_params or name.endswith(".W"))

    def step(self, params: Mapping[str, np.ndarray], grads: Mapping[str, np.ndarray], lr: float) -> None:
        """Update the arrays of ``params`` in place."""
        missing = set(grads) - set(params)
        if missing:
            raise ConsistencyError(f"Gradients for unknown parameters: {sorted(missing)}")
        for name, param in params.items():
            if name not in grads:
                continue
            grad = np.asarray(grads[name], dtype=np.float64)
            if grad.shape != param.shape:
                raise ConsistencyError(f"Gradient of {name} has shape {grad.shape}, parameter {param.shape}")
            if self.decays(name):
                grad = grad + self.weight_decay * param
            buffer = self.buffers.get(name)
            buffer = grad.copy() if buffer is None else self.momentum * buffer + grad
            self.buffers[name] = buffer
            param -= lr * (grad + self.momentum * buffer)
