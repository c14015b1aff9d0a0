"""
Diagonal Gaussian mixture vocabulary: representation, posteriors and EM fitting.
"""

from .em import gmm_fit_em
from .model import (
    LOG_VARIANCE_FLOOR, VARIANCE_FLOOR, EmDiagnostics, GmmModel, log_likelihood, posteriors,
    posteriors_batch, weighted_log_densities,
)

__all__ = [
    "EmDiagnostics",
    "GmmModel",
    "LOG_VARIANCE_FLOOR",
    "VARIANCE_FLOOR",
    "gmm_fit_em",
    "log_likelihood",
    "posteriors",
    "posteriors_batch",
    "weighted_log_densities",
]
