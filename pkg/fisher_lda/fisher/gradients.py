"""
gradients.py

Gradients of the normalized, average-pooled Fisher vector with respect to the
log-reparametrized mixture (log pi~, mu, log sigma^2).

For one descriptor x, write alpha_kd = (x_d - mu_kd) / sigma_kd and, for an
upstream vector g on the raw Fisher vector,

    h_k = sum_d g_phi_kd alpha_kd / sqrt(pi_k)
        + sum_d g_psi_kd (alpha_kd^2 - 1) / sqrt(2 pi_k)

so that g^T Phi(x) = sum_k gamma_k h_k. With H = sum_k gamma_k h_k and
r_k = gamma_k (h_k - H) the posterior derivatives collapse into r_k, and

    d/d log pi~_m   = r_m - gamma_m h_m / 2 + pi_m H / 2
    d/d mu_kd       = r_k alpha_kd / sigma_kd
                      - gamma_k (g_phi_kd / sqrt(pi_k) + 2 g_psi_kd alpha_kd / sqrt(2 pi_k)) / sigma_kd
    d/d log s2_kd   = r_k (alpha_kd^2 - 1) / 2
                      - gamma_k (g_phi_kd alpha_kd / (2 sqrt(pi_k)) + g_psi_kd alpha_kd^2 / sqrt(2 pi_k))

The per-descriptor terms are averaged, matching the average pooling.
"""

import logging
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from ..exceptions import DimensionError
from ..gmm.model import GmmModel, posteriors_batch
from .encode import fv_encode, fv_normalize_backward

logger = logging.getLogger(__name__)


class GmmGradient(NamedTuple):
    """Gradient of a scalar with respect to the reparametrized mixture."""
    d_log_weights_unnorm: np.ndarray
    d_means: np.ndarray
    d_log_vars: np.ndarray

    def __add__(self, other: "GmmGradient") -> "GmmGradient":
        return GmmGradient(
            self.d_log_weights_unnorm + other.d_log_weights_unnorm,
            self.d_means + other.d_means,
            self.d_log_vars + other.d_log_vars,
        )

    def scaled(self, factor: float) -> "GmmGradient":
        return GmmGradient(factor * self.d_log_weights_unnorm, factor * self.d_means, factor * self.d_log_vars)

    def is_finite(self) -> bool:
        return all(np.all(np.isfinite(block)) for block in self)

    @classmethod
    def zeros_like(cls, model: GmmModel) -> "GmmGradient":
        return cls(np.zeros(model.num_components), np.zeros_like(model.means), np.zeros_like(model.log_vars))


@dataclass(eq=False)
class FvGmmGradient:
    """Full Jacobians of the normalized Fisher vector (rows) w.r.t. the mixture parameters (columns)."""
    d_log_weights: np.ndarray
    d_means: np.ndarray
    d_log_vars: np.ndarray


class _DescriptorTerms:
    """Per-descriptor quantities shared by every upstream vector."""

    def __init__(self, model: GmmModel, descriptors: np.ndarray, gamma_threshold: float):
        self.model = model
        self.weights = model.weights
        self.stds = model.stds
        self.gamma = posteriors_batch(model, descriptors)
        self.alpha = (descriptors[:, None, :] - model.means[None, :, :]) / self.stds[None, :, :]
        if gamma_threshold > 0.0:
            self.mask = (self.gamma > gamma_threshold).astype(np.float64)
        else:
            self.mask = None

    def vjp(self, raw_grad: np.ndarray) -> GmmGradient:
        """Averaged gradient for an upstream gradient on the raw (unnormalized) Fisher vector."""
        num_components, dim = self.model.num_components, self.model.dim
        g_phi = raw_grad[:num_components * dim].reshape(num_components, dim)
        g_psi = raw_grad[num_components * dim:].reshape(num_components, dim)

        inv_sqrt_w = 1.0 / np.sqrt(self.weights)
        inv_sqrt_2w = 1.0 / np.sqrt(2.0 * self.weights)
        alpha = self.alpha
        alpha_sq = alpha * alpha
        gamma = self.gamma

        first = np.einsum('kd,nkd->nk', g_phi, alpha) * inv_sqrt_w
        second = np.einsum('kd,nkd->nk', g_psi, alpha_sq - 1.0) * inv_sqrt_2w
        h = first + second
        total = np.sum(gamma * h, axis=1, keepdims=True)
        r = gamma * (h - total)

        d_weights = r - 0.5 * gamma * h + 0.5 * self.weights[None, :] * total

        direct_means = -(g_phi * inv_sqrt_w[:, None])[None] - 2.0 * (g_psi * inv_sqrt_2w[:, None])[None] * alpha
        d_means = (r[:, :, None] * alpha + gamma[:, :, None] * direct_means) / self.stds[None]

        direct_vars = -0.5 * (g_phi * inv_sqrt_w[:, None])[None] * alpha - (g_psi * inv_sqrt_2w[:, None])[None] * alpha_sq
        d_vars = r[:, :, None] * 0.5 * (alpha_sq - 1.0) + gamma[:, :, None] * direct_vars

        if self.mask is not None:
            d_weights = d_weights * self.mask
            d_means = d_means * self.mask[:, :, None]
            d_vars = d_vars * self.mask[:, :, None]

        return GmmGradient(d_weights.mean(axis=0), d_means.mean(axis=0), d_vars.mean(axis=0))


def _subsample(descriptors: np.ndarray, subsample_fraction: float, seed: int) -> np.ndarray:
    if not 0.0 < subsample_fraction <= 1.0:
        raise ValueError(f"subsample_fraction must lie in (0, 1], got {subsample_fraction}")
    num_descriptors = descriptors.shape[0]
    if subsample_fraction >= 1.0:
        return descriptors
    count = max(1, int(math.ceil(subsample_fraction * num_descriptors)))
    rng = np.random.default_rng(seed)
    rows = np.sort(rng.choice(num_descriptors, size=count, replace=False))
    return descriptors[rows]


def fv_grad_gmm(model: GmmModel, descriptors: np.ndarray, upstream: np.ndarray,
                gamma_threshold: float = 0.0, subsample_fraction: float = 1.0,
                seed: int = 0) -> GmmGradient:
    """
    Back-propagate an upstream gradient on the normalized Fisher vector into the mixture.

    Args:
        model: Mixture vocabulary
        descriptors: M x D descriptors of one image
        upstream: Gradient with respect to the normalized Fisher vector (length 2*K*D)
        gamma_threshold: Descriptor/component pairs with gamma at or below this contribute nothing
        subsample_fraction: Fraction of descriptors whose terms are averaged
        seed: Seed of the descriptor subsample

    Returns:
        GmmGradient: upstream^T J for J the Jacobian w.r.t. (log pi~, mu, log sigma^2)
    """
    descriptors = model.check_dim(descriptors)
    upstream = np.asarray(upstream, dtype=np.float64).reshape(-1)
    if upstream.shape[0] != model.fv_length:
        raise DimensionError(f"Upstream has length {upstream.shape[0]}, expected {model.fv_length}")

    raw = fv_encode(model, descriptors)
    raw_grad = fv_normalize_backward(raw.values, upstream)
    terms = _DescriptorTerms(model, _subsample(descriptors, subsample_fraction, seed), gamma_threshold)
    return terms.vjp(raw_grad)


def fv_jacobian_gmm(model: GmmModel, descriptors: np.ndarray, gamma_threshold: float = 0.0) -> FvGmmGradient:
    """Assemble the full Jacobians one unit upstream vector at a time."""
    descriptors = model.check_dim(descriptors)
    raw = fv_encode(model, descriptors)
    terms = _DescriptorTerms(model, descriptors, gamma_threshold)

    length = model.fv_length
    num_components, dim = model.num_components, model.dim
    d_weights = np.zeros((length, num_components))
    d_means = np.zeros((length, num_components * dim))
    d_vars = np.zeros((length, num_components * dim))
    unit = np.zeros(length)
    for row in range(length):
        unit[row] = 1.0
        grad = terms.vjp(fv_normalize_backward(raw.values, unit))
        d_weights[row] = grad.d_log_weights_unnorm
        d_means[row] = grad.d_means.ravel()
        d_vars[row] = grad.d_log_vars.ravel()
        unit[row] = 0.0
    return FvGmmGradient(d_weights, d_means, d_vars)
