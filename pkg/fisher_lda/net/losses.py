"""
losses.py

Softmax cross-entropy for the classification baseline.
"""

from typing import Tuple

import numpy as np
from scipy.special import log_softmax

from ..exceptions import DimensionError, LabelError


def cross_entropy_loss(logits: np.ndarray, labels: np.ndarray) -> Tuple[float, np.ndarray]:
    """
    Mean negative log-likelihood of the target classes and its gradient w.r.t. the logits.

    Raises:
        LabelError: If a label lies outside [0, C)
    """
    logits = np.asarray(logits, dtype=np.float64)
    labels = np.asarray(labels)
    if logits.ndim != 2 or labels.shape != (logits.shape[0],):
        raise DimensionError(f"Logits {logits.shape} and labels {labels.shape} do not agree")
    num_rows, num_classes = logits.shape
    if np.any(labels < 0) or np.any(labels >= num_classes):
        raise LabelError(f"Labels must lie in [0, {num_classes})")

    log_probs = log_softmax(logits, axis=1)
    rows = np.arange(num_rows)
    loss = -float(np.mean(log_probs[rows, labels]))

    grad = np.exp(log_probs)
    grad[rows, labels] -= 1.0
    return loss, grad / num_rows
