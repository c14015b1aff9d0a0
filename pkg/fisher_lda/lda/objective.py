"""
objective.py

Eigenvalue objective over the smallest eigenvalues and its gradient with
respect to the hidden batch representation.

For a simple eigenpair (v, e) with e^T (S_w + lambda I) e = 1 the first order
perturbation is dv = e^T (dS_b - v dS_w) e = e^T (dS_t - (1 + v) dS_w) e, and

    d(e^T S_t e)/dX   = 2/(N-1)          X_centered e e^T
    d(e^T S_w e)/dX_c = 2/(C (N_c - 1))  Xc_centered e e^T
"""

from typing import Tuple

import numpy as np

from ..exceptions import ConsistencyError
from .eigen import EigenSolution
from .scatter import check_batch

OBJECTIVES = ("smallest", "all")


def lda_loss(eigenvalues: np.ndarray, epsilon: float, objective: str = "smallest") -> Tuple[float, np.ndarray]:
    """
    Mean of the eigenvalues that lie below min + epsilon.

    Returns:
        tuple: (loss, mask of participating eigenvalues); the minimum always participates.
        With ``objective="all"`` every eigenvalue participates.
    """
    eigenvalues = np.asarray(eigenvalues, dtype=np.float64)
    if eigenvalues.size == 0:
        raise ValueError("lda_loss needs at least one eigenvalue")
    if objective not in OBJECTIVES:
        raise ValueError(f"objective must be one of {OBJECTIVES}, got {objective!r}")

    if objective == "all":
        mask = np.ones(eigenvalues.shape, dtype=bool)
    else:
        lowest = eigenvalues.min()
        mask = eigenvalues < lowest + epsilon
        mask[np.argmin(eigenvalues)] = True
    return float(eigenvalues[mask].mean()), mask


def lda_grad_hidden(hidden: np.ndarray, labels: np.ndarray, solution: EigenSolution,
                    active_mask: np.ndarray) -> np.ndarray:
    """
    Gradient of the mean active eigenvalue with respect to every hidden entry.

    Raises:
        ConsistencyError: If the mask or eigenvectors do not fit the solution or the batch
    """
    hidden, labels, classes, index = check_batch(hidden, labels)
    active_mask = np.asarray(active_mask, dtype=bool)
    if active_mask.shape != solution.eigenvalues.shape:
        raise ConsistencyError(
            f"Active mask of shape {active_mask.shape} does not fit {solution.eigenvalues.shape[0]} eigenvalues"
        )
    if solution.eigenvectors.shape[1] != hidden.shape[1]:
        raise ConsistencyError(
            f"Eigenvectors have dimension {solution.eigenvectors.shape[1]}, hidden batch {hidden.shape[1]}"
        )
    if not np.any(active_mask):
        raise ConsistencyError("Active mask selects no eigenvalue")

    num_rows = hidden.shape[0]
    num_classes = classes.shape[0]
    total_centered = hidden - hidden.mean(axis=0)

    class_centered = np.empty_like(hidden)
    class_scale = np.empty(num_rows)
    for c in range(num_classes):
        rows = index == c
        class_centered[rows] = hidden[rows] - hidden[rows].mean(axis=0)
        class_scale[rows] = 2.0 / (num_classes * (rows.sum() - 1))

    grad = np.zeros_like(hidden)
    for value, vector in zip(solution.eigenvalues[active_mask], solution.eigenvectors[active_mask]):
        outer = np.outer(vector, vector)
        grad += (2.0 / (num_rows - 1)) * total_centered @ outer
        grad -= (1.0 + value) * class_scale[:, None] * (class_centered @ outer)
    return grad / active_mask.sum()
