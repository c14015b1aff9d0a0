"""
eigen.py

Regularized generalized eigenproblem S_b e = v (S_w + lambda I) e, solved by
reducing it to a symmetric standard problem with the Cholesky factor of
S_w + lambda I.
"""

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.linalg

from ..exceptions import DimensionError, RegularizationError
from .scatter import ScatterSet, scatter

logger = logging.getLogger(__name__)

RESIDUAL_TOL = 1e-6


@dataclass(eq=False)
class EigenSolution:
    """Eigenpairs sorted ascending; eigenvectors are rows, normalized so e^T (S_w + lambda I) e = 1."""
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    lambda_reg: float

    def project(self, hidden: np.ndarray) -> np.ndarray:
        """Coordinates of hidden rows along the eigenvectors."""
        return np.asarray(hidden, dtype=np.float64) @ self.eigenvectors.T


def _fix_signs(vectors: np.ndarray) -> np.ndarray:
    for row in vectors:
        nonzero = np.flatnonzero(np.abs(row) > 1e-12)
        if nonzero.size and row[nonzero[0]] < 0:
            row *= -1.0
    return vectors


def regularized_within(scatter_set: ScatterSet, lambda_reg: float) -> np.ndarray:
    return scatter_set.s_w + lambda_reg * np.eye(scatter_set.dim)


def lda_solve(scatter_set: ScatterSet, lambda_reg: float, num_eigen: Optional[int] = None) -> EigenSolution:
    """
    Top eigenpairs of the regularized generalized problem.

    Args:
        scatter_set: Scatter matrices of the batch
        lambda_reg: Ridge added to the within-class scatter
        num_eigen: Number of leading eigenpairs to keep, C - 1 by default

    Raises:
        RegularizationError: If S_w + lambda I is not positive definite
        DimensionError: If fewer than ``num_eigen`` eigenpairs exist
    """
    dim = scatter_set.dim
    if num_eigen is None:
        num_eigen = scatter_set.num_classes - 1
    if not 1 <= num_eigen <= dim:
        raise DimensionError(
            f"Cannot extract {num_eigen} eigenpairs from a {dim}-dimensional representation; "
            f"the hidden width must be at least C - 1"
        )

    regularized = regularized_within(scatter_set, lambda_reg)
    try:
        factor = scipy.linalg.cholesky(regularized, lower=True)
    except np.linalg.LinAlgError as e:
        raise RegularizationError(f"S_w + {lambda_reg} I is not positive definite: {e}")

    half = scipy.linalg.solve_triangular(factor, scatter_set.s_b, lower=True)
    reduced = scipy.linalg.solve_triangular(factor, half.T, lower=True)
    reduced = 0.5 * (reduced + reduced.T)

    values, vectors = scipy.linalg.eigh(reduced)
    values = values[dim - num_eigen:]
    vectors = scipy.linalg.solve_triangular(factor.T, vectors[:, dim - num_eigen:], lower=False)

    solution = EigenSolution(eigenvalues=values, eigenvectors=_fix_signs(vectors.T.copy()), lambda_reg=lambda_reg)

    residuals = eigen_residuals(scatter_set, solution)
    bound = RESIDUAL_TOL * (1.0 + np.abs(values)) * np.linalg.norm(solution.eigenvectors, axis=1)
    if np.any(residuals > bound):
        logger.warning(f"Eigen residuals exceed tolerance: max {np.max(residuals - bound):.3e} over bound")
    return solution


def eigen_residuals(scatter_set: ScatterSet, solution: EigenSolution) -> np.ndarray:
    """Norms ||S_b e_i - v_i (S_w + lambda I) e_i|| for every eigenpair."""
    regularized = regularized_within(scatter_set, solution.lambda_reg)
    vectors = solution.eigenvectors
    lhs = vectors @ scatter_set.s_b
    rhs = solution.eigenvalues[:, None] * (vectors @ regularized)
    return np.linalg.norm(lhs - rhs, axis=1)


def lda_projection(hidden: np.ndarray, labels: np.ndarray, lambda_reg: float) -> EigenSolution:
    """Discriminant directions of a whole labelled training set."""
    scatter_set = scatter(hidden, labels)
    solution = lda_solve(scatter_set, lambda_reg)
    logger.info(f"LDA projection onto {solution.eigenvalues.shape[0]} directions from {len(labels)} samples")
    return solution
