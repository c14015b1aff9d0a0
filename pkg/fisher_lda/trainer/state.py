"""
state.py

Training state: the per-channel PCA and mixture vocabulary, the network,
optimizer buffers, counters and the per-epoch log, plus the Fisher-vector
cache that is valid until the next mixture update.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from ..dataset.descriptors import DescriptorSet
from ..dataset.pca import PcaModel, pca_project
from ..exceptions import LabelError, StateError
from ..fisher.encode import fv_encode_image
from ..gmm.model import GmmModel
from ..lda.eigen import EigenSolution
from ..net.layers import NetParams
from .config import TrainConfig
from .optimizer import NesterovSGD

logger = logging.getLogger(__name__)


@dataclass
class EpochRecord:
    """One line of the training log."""
    epoch: int
    loss: float
    lr: float
    eigenvalues: List[float] = field(default_factory=list)
    eta: Optional[float] = None

    def to_dict(self) -> Dict[str, Any]:
        return {
            "epoch": self.epoch,
            "loss": self.loss,
            "lr": self.lr,
            "eigenvalues": list(self.eigenvalues),
            "eta": self.eta,
        }

    @classmethod
    def from_dict(cls, record: Dict[str, Any]) -> "EpochRecord":
        eta = record.get("eta")
        return cls(
            epoch=int(record["epoch"]),
            loss=float(record["loss"]),
            lr=float(record["lr"]),
            eigenvalues=[float(v) for v in record.get("eigenvalues", [])],
            eta=None if eta is None else float(eta),
        )


@dataclass(eq=False)
class TrainState:
    config: TrainConfig
    channel_names: Tuple[str, ...]
    pcas: List[PcaModel]
    gmms: List[GmmModel]
    net: Optional[NetParams]
    optimizer: NesterovSGD
    classes: np.ndarray
    epoch: int = 0
    step: int = 0
    log: List[EpochRecord] = field(default_factory=list)
    lda_projection: Optional[EigenSolution] = None
    fv_cache: Dict[str, np.ndarray] = field(default_factory=dict, repr=False)
    projected_cache: Dict[str, List[np.ndarray]] = field(default_factory=dict, repr=False)

    @property
    def seed(self) -> int:
        return self.config.seed

    @property
    def is_initialized(self) -> bool:
        return bool(self.gmms) and self.net is not None

    @property
    def fv_dim(self) -> int:
        return sum(gmm.fv_length for gmm in self.gmms)

    def require_initialized(self) -> None:
        if not self.is_initialized:
            raise StateError("Training state has no mixture vocabulary or network yet")

    def label_indices(self, labels: Sequence[int]) -> np.ndarray:
        """Map identity labels to head output indices."""
        labels = np.asarray(labels)
        indices = np.searchsorted(self.classes, labels)
        valid = (indices < self.classes.shape[0]) & (self.classes[np.minimum(indices, self.classes.shape[0] - 1)] == labels)
        if not np.all(valid):
            raise LabelError(f"Labels not seen during training: {sorted(set(labels[~valid].tolist()))}")
        return indices

    def project_channels(self, descriptor_set: DescriptorSet) -> List[np.ndarray]:
        """PCA-projected descriptors of every configured channel, cached by image id."""
        cached = self.projected_cache.get(descriptor_set.image_id)
        if cached is not None:
            return cached
        projected = []
        for index, (name, pca) in enumerate(zip(self.channel_names, self.pcas)):
            projected.append(pca_project(pca, descriptor_set.channel(name, index)))
        self.projected_cache[descriptor_set.image_id] = projected
        return projected

    def encode(self, descriptor_set: DescriptorSet, gmms: Optional[Sequence[GmmModel]] = None) -> np.ndarray:
        """Normalized, channel-concatenated Fisher vector of one image."""
        models = self.gmms if gmms is None else gmms
        return fv_encode_image(models, self.project_channels(descriptor_set)).values

    def encode_many(self, descriptor_sets: Sequence[DescriptorSet], gmms: Optional[Sequence[GmmModel]] = None,
                    use_cache: bool = True, threads: int = 1) -> np.ndarray:
        """
        Stack the Fisher vectors of several images.

        The cache is used only when encoding under the state's own mixtures.
        """
        use_cache = use_cache and gmms is None
        todo = [s for s in descriptor_sets if not (use_cache and s.image_id in self.fv_cache)]
        # Projections are filled sequentially so worker threads only read the cache.
        for descriptor_set in todo:
            self.project_channels(descriptor_set)

        if threads > 1 and len(todo) > 1:
            with ThreadPoolExecutor(max_workers=threads) as executor:
                encoded = list(executor.map(lambda s: self.encode(s, gmms), todo))
        else:
            encoded = [self.encode(s, gmms) for s in todo]

        fresh = {s.image_id: fv for s, fv in zip(todo, encoded)}
        if use_cache:
            self.fv_cache.update(fresh)
            return np.stack([self.fv_cache[s.image_id] for s in descriptor_sets])
        return np.stack([fresh[s.image_id] for s in descriptor_sets])

    def invalidate_fv_cache(self) -> None:
        if self.fv_cache:
            logger.debug(f"Dropping {len(self.fv_cache)} cached Fisher vectors")
        self.fv_cache.clear()
