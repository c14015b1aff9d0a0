"""
scatter.py

Within-class, total and between-class scatter of a labelled batch:

    S_c = Xc_centered^T Xc_centered / (N_c - 1)
    S_w = (1/C) sum_c S_c
    S_t = X_centered^T X_centered / (N - 1)
    S_b = S_t - S_w

With these divisors S_b need not be positive semidefinite.
"""

from dataclasses import dataclass
from typing import Tuple

import numpy as np

from ..exceptions import BatchCompositionError, DimensionError


@dataclass(eq=False)
class ScatterSet:
    s_w: np.ndarray
    s_b: np.ndarray
    s_t: np.ndarray
    class_means: np.ndarray
    counts: np.ndarray
    classes: np.ndarray

    @property
    def num_classes(self) -> int:
        return self.classes.shape[0]

    @property
    def dim(self) -> int:
        return self.s_w.shape[0]


def check_batch(hidden: np.ndarray, labels: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """
    Validate a labelled batch.

    Returns:
        tuple: (hidden as float64, labels, distinct classes, class index of every row)

    Raises:
        BatchCompositionError: Fewer than two classes, or a class with a single row
    """
    hidden = np.asarray(hidden, dtype=np.float64)
    labels = np.asarray(labels)
    if hidden.ndim != 2 or labels.shape != (hidden.shape[0],):
        raise DimensionError(f"Hidden batch {hidden.shape} and labels {labels.shape} do not agree")
    classes, index, counts = np.unique(labels, return_inverse=True, return_counts=True)
    if classes.shape[0] < 2:
        raise BatchCompositionError(f"Scatter needs at least 2 classes, batch has {classes.shape[0]}")
    singletons = classes[counts < 2]
    if singletons.size:
        raise BatchCompositionError(f"Classes with a single sample in the batch: {singletons.tolist()}")
    return hidden, labels, classes, index.reshape(-1)


def scatter(hidden: np.ndarray, labels: np.ndarray) -> ScatterSet:
    """Scatter matrices of a batch whose classes each have at least two rows."""
    hidden, labels, classes, index = check_batch(hidden, labels)
    num_rows, dim = hidden.shape
    num_classes = classes.shape[0]

    class_means = np.zeros((num_classes, dim))
    counts = np.zeros(num_classes, dtype=np.int64)
    s_w = np.zeros((dim, dim))
    for c in range(num_classes):
        rows = hidden[index == c]
        counts[c] = rows.shape[0]
        class_means[c] = rows.mean(axis=0)
        centered = rows - class_means[c]
        s_w += centered.T @ centered / (counts[c] - 1)
    s_w /= num_classes

    centered = hidden - hidden.mean(axis=0)
    s_t = centered.T @ centered / (num_rows - 1)

    s_w = 0.5 * (s_w + s_w.T)
    s_t = 0.5 * (s_t + s_t.T)
    return ScatterSet(s_w=s_w, s_b=s_t - s_w, s_t=s_t, class_means=class_means, counts=counts, classes=classes)
