"""
em.py

Expectation maximization for the diagonal Gaussian mixture vocabulary,
seeded by k-means++ and a short k-means run.
"""

import logging
import warnings
from typing import Optional, Tuple

import numpy as np
from scipy.cluster.vq import kmeans2
from scipy.special import logsumexp

from ..exceptions import DimensionError, InsufficientDataError
from .model import VARIANCE_FLOOR, EmDiagnostics, GmmModel, weighted_log_densities

logger = logging.getLogger(__name__)

KMEANS_ITERATIONS = 10
# Components whose responsibility mass falls below this are treated as empty.
EMPTY_COMPONENT_MASS = 1e-10
MONOTONICITY_SLACK = 1e-9


def _kmeans_labels(data: np.ndarray, num_components: int, rng: np.random.Generator) -> np.ndarray:
    distinct = np.unique(data, axis=0).shape[0]
    minit = '++' if distinct >= num_components else 'points'
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter('always')
        _, labels = kmeans2(data, num_components, iter=KMEANS_ITERATIONS, minit=minit,
                            missing='warn', seed=rng)
    for warning in caught:
        logger.debug(f"k-means seeding: {warning.message}")
    return labels


def _m_step(data: np.ndarray, resp: np.ndarray, rng: np.random.Generator,
            global_var: np.ndarray) -> Tuple[GmmModel, list]:
    num_rows = data.shape[0]
    mass = resp.sum(axis=0)
    reseeded = [int(k) for k in np.flatnonzero(mass < EMPTY_COMPONENT_MASS)]
    safe_mass = np.where(mass < EMPTY_COMPONENT_MASS, 1.0, mass)

    means = (resp.T @ data) / safe_mass[:, None]
    avg_sq = (resp.T @ (data * data)) / safe_mass[:, None]
    variances = np.maximum(avg_sq - means * means, VARIANCE_FLOOR)
    weights = mass / num_rows

    for k in reseeded:
        means[k] = data[rng.integers(num_rows)]
        variances[k] = global_var
        weights[k] = 1.0 / num_rows
        logger.warning(f"EM component {k} became empty; reseeded at a random data point")

    model = GmmModel(log_weights_unnorm=np.log(weights), means=means, log_vars=np.log(variances))
    return model, reseeded


def _e_step(model: GmmModel, data: np.ndarray) -> Tuple[np.ndarray, float]:
    weighted = weighted_log_densities(model, data)
    norm = logsumexp(weighted, axis=1, keepdims=True)
    return np.exp(weighted - norm), float(np.mean(norm))


def gmm_fit_em(data: np.ndarray, num_components: int, seed: int, max_iters: int = 100,
               tol: float = 1e-6, max_samples: Optional[int] = None) -> GmmModel:
    """
    Fit a diagonal Gaussian mixture by EM.

    Args:
        data: N x D training descriptors
        num_components: Number of components K
        seed: Seed of the subsample, the k-means seeding and any reseeding
        max_iters: Maximum number of EM iterations
        tol: Stop once the mean log-likelihood improves by less than this
        max_samples: Fit on a seeded subsample of at most this many rows

    Returns:
        GmmModel: Fitted mixture with its EmDiagnostics attached

    Raises:
        InsufficientDataError: If N < K
    """
    data = np.asarray(data, dtype=np.float64)
    if data.ndim != 2:
        raise DimensionError(f"EM expects a 2-D matrix, got shape {data.shape}")
    if num_components < 1:
        raise ValueError(f"num_components must be >= 1, got {num_components}")
    if data.shape[0] < num_components:
        raise InsufficientDataError(
            f"EM needs at least K={num_components} rows, got {data.shape[0]}"
        )

    rng = np.random.default_rng(seed)
    if max_samples is not None and data.shape[0] > max_samples:
        rows = np.sort(rng.choice(data.shape[0], size=max_samples, replace=False))
        data = data[rows]
        logger.debug(f"EM fitting on a subsample of {max_samples} rows")

    global_var = np.maximum(data.var(axis=0), VARIANCE_FLOOR)

    labels = _kmeans_labels(data, num_components, rng)
    resp = np.zeros((data.shape[0], num_components))
    resp[np.arange(data.shape[0]), labels] = 1.0

    diagnostics = EmDiagnostics()
    model, reseeded = _m_step(data, resp, rng, global_var)
    diagnostics.reseeded.extend(reseeded)
    resp, current = _e_step(model, data)
    diagnostics.log_likelihoods.append(current)

    for iteration in range(1, max_iters + 1):
        model, reseeded = _m_step(data, resp, rng, global_var)
        diagnostics.reseeded.extend(reseeded)
        resp, updated = _e_step(model, data)
        diagnostics.log_likelihoods.append(updated)
        diagnostics.iterations = iteration
        logger.debug(f"EM iteration {iteration}: mean log-likelihood {updated:.6f}")

        if not reseeded and updated < current - MONOTONICITY_SLACK:
            logger.warning(f"EM log-likelihood decreased at iteration {iteration}: {current} -> {updated}")
        if not reseeded and updated - current < tol:
            diagnostics.converged = True
            break
        current = updated

    model.diagnostics = diagnostics
    logger.info(
        f"EM fit K={num_components} on {data.shape[0]} x {data.shape[1]} data: "
        f"{diagnostics.iterations} iterations, log-likelihood {diagnostics.log_likelihoods[-1]:.6f}, "
        f"converged={diagnostics.converged}"
    )
    return model
