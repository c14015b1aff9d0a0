"""
model.py

Diagonal-covariance Gaussian mixture stored in the log-reparametrized form
the optimizer works on: unnormalized log weights, means and log variances.
Normalized weights are always obtained through a softmax on read.
"""

import logging
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np
from scipy.special import logsumexp, softmax

from ..exceptions import DimensionError

logger = logging.getLogger(__name__)

VARIANCE_FLOOR = 1e-8
LOG_VARIANCE_FLOOR = float(np.log(VARIANCE_FLOOR))
_LOG_2PI = float(np.log(2.0 * np.pi))

# Upper bound on rows * K * D elements materialised per chunk.
_CHUNK_ELEMENTS = 4_000_000


@dataclass
class EmDiagnostics:
    """Trace of one EM fit."""
    log_likelihoods: List[float] = field(default_factory=list)
    iterations: int = 0
    converged: bool = False
    reseeded: List[int] = field(default_factory=list)


@dataclass(eq=False)
class GmmModel:
    """
    Diagonal Gaussian mixture G = (log pi~, mu, log sigma^2).

    The variance floor is applied on construction, so every instance satisfies
    exp(log_vars) >= VARIANCE_FLOOR.
    """
    log_weights_unnorm: np.ndarray
    means: np.ndarray
    log_vars: np.ndarray
    diagnostics: Optional[EmDiagnostics] = field(default=None, repr=False)

    def __post_init__(self):
        self.log_weights_unnorm = np.asarray(self.log_weights_unnorm, dtype=np.float64).reshape(-1)
        self.means = np.atleast_2d(np.asarray(self.means, dtype=np.float64))
        self.log_vars = np.atleast_2d(np.asarray(self.log_vars, dtype=np.float64))

        num_components = self.log_weights_unnorm.shape[0]
        if num_components < 1:
            raise DimensionError("A mixture needs at least one component")
        if self.means.shape[0] != num_components or self.log_vars.shape != self.means.shape:
            raise DimensionError(
                f"Inconsistent mixture shapes: weights {self.log_weights_unnorm.shape}, "
                f"means {self.means.shape}, log_vars {self.log_vars.shape}"
            )
        self.log_vars = np.maximum(self.log_vars, LOG_VARIANCE_FLOOR)

    @property
    def num_components(self) -> int:
        return self.means.shape[0]

    @property
    def dim(self) -> int:
        return self.means.shape[1]

    @property
    def weights(self) -> np.ndarray:
        """Normalized mixture weights pi."""
        return softmax(self.log_weights_unnorm)

    @property
    def log_weights(self) -> np.ndarray:
        return self.log_weights_unnorm - logsumexp(self.log_weights_unnorm)

    @property
    def variances(self) -> np.ndarray:
        return np.exp(self.log_vars)

    @property
    def stds(self) -> np.ndarray:
        return np.exp(0.5 * self.log_vars)

    @property
    def fv_length(self) -> int:
        """Length 2*K*D of the Fisher vector this vocabulary produces."""
        return 2 * self.num_components * self.dim

    def with_parameters(self, log_weights_unnorm: Optional[np.ndarray] = None,
                        means: Optional[np.ndarray] = None,
                        log_vars: Optional[np.ndarray] = None) -> "GmmModel":
        """Return a new model with some parameters replaced; the variance floor is re-applied."""
        return GmmModel(
            log_weights_unnorm=self.log_weights_unnorm.copy() if log_weights_unnorm is None else log_weights_unnorm,
            means=self.means.copy() if means is None else means,
            log_vars=self.log_vars.copy() if log_vars is None else log_vars,
        )

    def copy(self) -> "GmmModel":
        return self.with_parameters()

    def check_dim(self, data: np.ndarray, source: str = "descriptors") -> np.ndarray:
        data = np.asarray(data, dtype=np.float64)
        if data.ndim != 2 or data.shape[1] != self.dim:
            raise DimensionError(f"{source} have shape {data.shape}, mixture expects {self.dim} columns")
        return data


def weighted_log_densities(model: GmmModel, data: np.ndarray) -> np.ndarray:
    """N x K matrix of log(pi_k) + log N(x_i | mu_k, sigma_k^2)."""
    data = model.check_dim(data)
    num_rows = data.shape[0]
    inv_vars = np.exp(-model.log_vars)
    log_norm = -0.5 * (model.dim * _LOG_2PI + model.log_vars.sum(axis=1))

    out = np.empty((num_rows, model.num_components))
    step = max(1, _CHUNK_ELEMENTS // max(1, model.num_components * model.dim))
    for start in range(0, num_rows, step):
        chunk = data[start:start + step]
        diff = chunk[:, None, :] - model.means[None, :, :]
        out[start:start + step] = log_norm - 0.5 * np.einsum('nkd,kd->nk', diff * diff, inv_vars)
    return out + model.log_weights


def posteriors_batch(model: GmmModel, data: np.ndarray) -> np.ndarray:
    """Soft assignments gamma, one row per descriptor; rows sum to 1."""
    weighted = weighted_log_densities(model, data)
    return np.exp(weighted - logsumexp(weighted, axis=1, keepdims=True))


def posteriors(model: GmmModel, x: np.ndarray) -> np.ndarray:
    """Soft assignment gamma_k(x) of a single descriptor."""
    return posteriors_batch(model, np.asarray(x, dtype=np.float64).reshape(1, -1))[0]


def log_likelihood(model: GmmModel, data: np.ndarray) -> float:
    """Mean per-point log-likelihood."""
    return float(np.mean(logsumexp(weighted_log_densities(model, data), axis=1)))
