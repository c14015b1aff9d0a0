"""
pca.py

PCA reduction of raw local descriptors: sample covariance (divisor N-1),
dense symmetric eigendecomposition, components sorted by decreasing
variance with the first nonzero coordinate of each basis row made positive.
"""

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import linalg

from ..exceptions import DimensionError, InsufficientDataError, RankError

logger = logging.getLogger(__name__)

SIGN_TOLERANCE = 1e-12


@dataclass
class PcaModel:
    """Mean, orthonormal basis rows and the variance each row explains."""
    mean: np.ndarray
    basis: np.ndarray
    explained_variance: np.ndarray

    @property
    def in_dim(self) -> int:
        return int(self.mean.shape[0])

    @property
    def out_dim(self) -> int:
        return int(self.basis.shape[0])


def _fix_signs(basis: np.ndarray) -> np.ndarray:
    for row in basis:
        nonzero = np.flatnonzero(np.abs(row) > SIGN_TOLERANCE)
        if nonzero.size and row[nonzero[0]] < 0:
            row *= -1.0
    return basis


def pca_fit(data: np.ndarray, out_dim: Optional[int] = None) -> PcaModel:
    """
    Fit PCA on an N x D_raw matrix.

    Args:
        data: Training descriptors, one per row
        out_dim: Number of components; None keeps min(N-1, D_raw)

    Raises:
        InsufficientDataError: Fewer than two rows
        DimensionError: out_dim larger than min(N-1, D_raw)
        RankError: All rows identical
    """
    data = np.asarray(data, dtype=np.float64)
    if data.ndim != 2:
        raise DimensionError(f"PCA expects a 2-D matrix, got shape {data.shape}")
    n_samples, n_dims = data.shape
    if n_samples < 2:
        raise InsufficientDataError(f"PCA needs at least 2 rows, got {n_samples}")

    max_dim = min(n_samples - 1, n_dims)
    if out_dim is None:
        out_dim = max_dim
    if out_dim < 1 or out_dim > max_dim:
        raise DimensionError(f"out_dim={out_dim} outside [1, {max_dim}] for data of shape {data.shape}")

    mean = data.mean(axis=0)
    centered = data - mean
    achievable_rank = int(np.linalg.matrix_rank(centered))
    if achievable_rank == 0:
        raise RankError("All rows are identical; covariance has rank 0", achievable_rank=0)

    covariance = centered.T @ centered / (n_samples - 1)
    eigenvalues, eigenvectors = linalg.eigh(covariance)
    order = np.argsort(-eigenvalues, kind='stable')[:out_dim]

    basis = _fix_signs(np.ascontiguousarray(eigenvectors[:, order].T))
    explained = np.clip(eigenvalues[order], 0.0, None)

    if out_dim > achievable_rank:
        logger.warning(f"PCA keeps {out_dim} components but the data only has rank {achievable_rank}")
    logger.debug(f"PCA fitted on {n_samples} x {n_dims}, kept {out_dim} components")
    return PcaModel(mean=mean, basis=basis, explained_variance=explained)


def pca_project(model: PcaModel, descriptors: np.ndarray) -> np.ndarray:
    """Project rows onto the basis: basis . (row - mean)."""
    descriptors = np.atleast_2d(np.asarray(descriptors, dtype=np.float64))
    if descriptors.shape[1] != model.in_dim:
        raise DimensionError(
            f"Descriptors have {descriptors.shape[1]} columns, PCA model expects {model.in_dim}"
        )
    return (descriptors - model.mean) @ model.basis.T


def pca_reconstruct(model: PcaModel, coords: np.ndarray) -> np.ndarray:
    """Map projected coordinates back into descriptor space."""
    coords = np.atleast_2d(np.asarray(coords, dtype=np.float64))
    if coords.shape[1] != model.out_dim:
        raise DimensionError(f"Coordinates have {coords.shape[1]} columns, PCA model has {model.out_dim}")
    return coords @ model.basis + model.mean
