"""
encode.py

Fisher-vector encoding of a descriptor set against a Gaussian mixture,
followed by signed square root and division by the square root of the l1
norm. The layout is [phi_1 ... phi_K, psi_1 ... psi_K], each block of
length D.
"""

import logging
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..exceptions import DimensionError
from ..gmm.model import GmmModel, posteriors_batch

logger = logging.getLogger(__name__)

# Coordinates smaller than this in magnitude get the zero subgradient of the signed square root.
SQRT_SUBGRADIENT_EPS = 1e-12


@dataclass(eq=False)
class FisherVector:
    """Aggregated Fisher vector; ``normalized`` tells whether the power/norm step ran."""
    values: np.ndarray
    normalized: bool = False

    def __len__(self) -> int:
        return self.values.shape[0]


def fv_encode(model: GmmModel, descriptors: np.ndarray) -> FisherVector:
    """
    Average-pooled Fisher vector of a descriptor set.

    Args:
        model: Mixture vocabulary
        descriptors: M x D descriptor matrix

    Returns:
        FisherVector: Unnormalized vector of length 2*K*D

    Raises:
        DimensionError: If the descriptor dimension differs from the mixture's
    """
    descriptors = model.check_dim(descriptors)
    num_descriptors = descriptors.shape[0]
    if num_descriptors < 1:
        raise DimensionError("Cannot encode an empty descriptor set")

    gamma = posteriors_batch(model, descriptors)
    weights = model.weights
    means = model.means
    stds = model.stds

    # Zeroth, first and second order soft statistics.
    s0 = gamma.sum(axis=0)
    s1 = gamma.T @ descriptors
    s2 = gamma.T @ (descriptors * descriptors)

    first = (s1 - means * s0[:, None]) / stds
    second = (s2 - 2.0 * means * s1 + means * means * s0[:, None]) / (stds * stds) - s0[:, None]

    phi = first / (num_descriptors * np.sqrt(weights)[:, None])
    psi = second / (num_descriptors * np.sqrt(2.0 * weights)[:, None])
    return FisherVector(np.concatenate([phi.ravel(), psi.ravel()]), normalized=False)


def fv_normalize(fv: FisherVector) -> FisherVector:
    """
    Signed square root of every coordinate divided by sqrt(||fv||_1).

    The result has unit l2 norm; an all-zero input stays zero.
    """
    if fv.normalized:
        raise ValueError("Fisher vector is already normalized")
    values = np.asarray(fv.values, dtype=np.float64)
    l1_norm = np.abs(values).sum()
    if l1_norm == 0.0:
        logger.warning("Fisher vector is identically zero; leaving it unnormalized-zero")
        return FisherVector(np.zeros_like(values), normalized=True)
    return FisherVector(np.sign(values) * np.sqrt(np.abs(values) / l1_norm), normalized=True)


def fv_normalize_backward(raw_values: np.ndarray, upstream: np.ndarray) -> np.ndarray:
    """
    Vector-Jacobian product of fv_normalize.

    Args:
        raw_values: Unnormalized Fisher vector Phi
        upstream: Gradient u with respect to the normalized vector

    Returns:
        np.ndarray: u^T d(normalized)/d(Phi)
    """
    raw_values = np.asarray(raw_values, dtype=np.float64)
    upstream = np.asarray(upstream, dtype=np.float64)
    if raw_values.shape != upstream.shape:
        raise DimensionError(f"Upstream shape {upstream.shape} differs from Fisher vector shape {raw_values.shape}")

    magnitude = np.abs(raw_values)
    l1_norm = magnitude.sum()
    if l1_norm == 0.0:
        return np.zeros_like(raw_values)

    active = magnitude >= SQRT_SUBGRADIENT_EPS
    signs = np.sign(raw_values)
    normalized = signs * np.sqrt(magnitude / l1_norm)
    projection = float(upstream @ normalized)

    grad = np.zeros_like(raw_values)
    root = np.sqrt(magnitude[active])
    grad[active] = upstream[active] / (2.0 * root * np.sqrt(l1_norm)) - signs[active] * projection / (2.0 * l1_norm)
    return grad


def fv_encode_image(models: Sequence[GmmModel], channels: Sequence[np.ndarray]) -> FisherVector:
    """Encode and normalize every channel, then concatenate in channel order."""
    if len(models) != len(channels):
        raise DimensionError(f"Got {len(channels)} descriptor channels for {len(models)} mixtures")
    parts = [fv_normalize(fv_encode(model, descriptors)).values for model, descriptors in zip(models, channels)]
    return FisherVector(np.concatenate(parts), normalized=True)
