"""
embed.py

Eval-mode embedding of images and the distance matrices used for matching.
"""

import logging
from typing import Sequence

import numpy as np
from scipy.spatial.distance import cdist

from ..dataset.descriptors import DescriptorSet
from ..exceptions import DimensionError, StateError
from ..net.layers import forward
from ..trainer.state import TrainState

logger = logging.getLogger(__name__)

DISTANCES = ("euclidean", "cosine", "raw_euclidean")
EMBED_SPACES = ("hidden", "lda")


def l2_normalize_rows(matrix: np.ndarray) -> np.ndarray:
    """Unit-norm rows; all-zero rows stay zero."""
    matrix = np.asarray(matrix, dtype=np.float64)
    norms = np.linalg.norm(matrix, axis=1, keepdims=True)
    return np.divide(matrix, norms, out=np.zeros_like(matrix), where=norms > 0)


def embed(state: TrainState, descriptor_sets: Sequence[DescriptorSet], space: str = "hidden",
          normalize: bool = True, threads: int = 1) -> np.ndarray:
    """
    Map images to the learned latent space.

    Args:
        state: Trained state
        descriptor_sets: Images to embed
        space: "hidden" for the last layer output, "lda" to project it onto the
            discriminant directions stored in the state
        normalize: l2-normalize every row
        threads: Workers for Fisher-vector encoding

    Raises:
        StateError: If the state is untrained or has no discriminant projection for space="lda"
    """
    if space not in EMBED_SPACES:
        raise ValueError(f"space must be one of {EMBED_SPACES}, got {space!r}")
    state.require_initialized()
    if state.epoch == 0:
        logger.warning("Embedding with a network that has not been trained")
    if not descriptor_sets:
        return np.zeros((0, state.net.output_dim))

    fvs = state.encode_many(descriptor_sets, threads=threads)
    hidden, _ = forward(state.net, fvs, mode="eval")
    if space == "lda":
        if state.lda_projection is None:
            raise StateError("State has no discriminant projection; train with embed_space='lda'")
        hidden = state.lda_projection.project(hidden)
    return l2_normalize_rows(hidden) if normalize else hidden


def distance_matrix(probes: np.ndarray, gallery: np.ndarray, metric: str = "euclidean") -> np.ndarray:
    """
    Probe-by-gallery distances.

    "euclidean" works on l2-normalized rows, "raw_euclidean" on the rows as
    given and "cosine" is one minus the cosine similarity.
    """
    if metric not in DISTANCES:
        raise ValueError(f"metric must be one of {DISTANCES}, got {metric!r}")
    probes = np.atleast_2d(np.asarray(probes, dtype=np.float64))
    gallery = np.atleast_2d(np.asarray(gallery, dtype=np.float64))
    if probes.shape[1] != gallery.shape[1]:
        raise DimensionError(f"Probe width {probes.shape[1]} differs from gallery width {gallery.shape[1]}")
    if metric == "euclidean":
        return cdist(l2_normalize_rows(probes), l2_normalize_rows(gallery), metric="euclidean")
    if metric == "cosine":
        return cdist(probes, gallery, metric="cosine")
    return cdist(probes, gallery, metric="euclidean")
