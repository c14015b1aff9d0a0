"""
Scatter matrices, the regularized generalized eigenproblem and the eigenvalue objective.
"""

from .eigen import EigenSolution, eigen_residuals, lda_projection, lda_solve
from .objective import lda_grad_hidden, lda_loss
from .scatter import ScatterSet, scatter

__all__ = [
    "EigenSolution",
    "ScatterSet",
    "eigen_residuals",
    "lda_grad_hidden",
    "lda_loss",
    "lda_projection",
    "lda_solve",
    "scatter",
]
