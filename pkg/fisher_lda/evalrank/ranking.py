"""
ranking.py

Single-shot CMC and mean average precision.

Ties in distance are broken by gallery index: every ranking uses a stable
argsort over the gallery in its stored order.
"""

import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from ..exceptions import DimensionError, ProtocolError
from ..shared_utils.seeding import derive_rng, derive_seed
from .embed import distance_matrix

logger = logging.getLogger(__name__)


@dataclass
class ProbeRanking:
    """Gallery order of one probe in the first trial."""
    probe: str
    gallery: List[str]
    distances: List[float]
    match_rank: int


@dataclass
class RankingResult:
    cmc: np.ndarray
    map_value: float
    num_trials: int
    rankings: List[ProbeRanking] = field(default_factory=list)
    excluded_probes: int = 0

    def rank(self, k: int) -> float:
        """CMC at rank k (1-based); ranks past the gallery size read the last entry."""
        if k < 1:
            raise ValueError(f"Rank must be >= 1, got {k}")
        return float(self.cmc[min(k, self.cmc.shape[0]) - 1])

    def to_dict(self) -> Dict[str, Any]:
        return {
            "cmc": [float(v) for v in self.cmc],
            "mAP": self.map_value,
            "num_trials": self.num_trials,
            "excluded_probes": self.excluded_probes,
            "rankings": [
                {"probe": r.probe, "gallery": r.gallery, "distances": r.distances, "match_rank": r.match_rank}
                for r in self.rankings
            ],
        }


def _as_labels(labels: Sequence[int], count: int, name: str) -> np.ndarray:
    labels = np.asarray(labels).reshape(-1)
    if labels.shape[0] != count:
        raise DimensionError(f"{name} has {labels.shape[0]} entries for {count} embeddings")
    return labels


def match_ranks(distances: np.ndarray, probe_labels: np.ndarray, gallery_labels: np.ndarray) -> np.ndarray:
    """1-based rank of the first true match of every probe."""
    order = np.argsort(distances, axis=1, kind="stable")
    hits = gallery_labels[order] == probe_labels[:, None]
    if not np.all(hits.any(axis=1)):
        missing = sorted(set(probe_labels[~hits.any(axis=1)].tolist()))
        raise ProtocolError(f"Probe identities absent from the gallery: {missing}")
    return np.argmax(hits, axis=1) + 1


def cmc_from_ranks(ranks: np.ndarray, length: int) -> np.ndarray:
    counts = np.bincount(ranks - 1, minlength=length)[:length]
    return np.cumsum(counts) / ranks.shape[0]


def single_shot_gallery(gallery_labels: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """One uniformly chosen gallery index per identity, in gallery order."""
    chosen = [rng.choice(np.flatnonzero(gallery_labels == label)) for label in np.unique(gallery_labels)]
    return np.sort(np.asarray(chosen, dtype=np.int64))


def cmc_evaluate(probe_embeddings: np.ndarray, probe_labels: Sequence[int],
                 gallery_embeddings: np.ndarray, gallery_labels: Sequence[int],
                 trials: int = 10, seed: int = 0, metric: str = "euclidean",
                 probe_ids: Optional[Sequence[str]] = None,
                 gallery_ids: Optional[Sequence[str]] = None) -> RankingResult:
    """
    Single-shot CMC averaged over trials.

    Every trial samples one gallery exemplar per identity and ranks it against
    every probe. ``map_value`` is the single-shot mAP, the mean reciprocal rank
    of the one relevant exemplar.

    Raises:
        ProtocolError: If a probe identity has no gallery image
    """
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    probe_embeddings = np.atleast_2d(probe_embeddings)
    gallery_embeddings = np.atleast_2d(gallery_embeddings)
    probe_labels = _as_labels(probe_labels, probe_embeddings.shape[0], "probe_labels")
    gallery_labels = _as_labels(gallery_labels, gallery_embeddings.shape[0], "gallery_labels")
    if probe_labels.shape[0] == 0:
        raise ProtocolError("No probes to evaluate")

    missing = sorted(set(probe_labels.tolist()) - set(gallery_labels.tolist()))
    if missing:
        raise ProtocolError(f"Probe identities absent from the gallery: {missing}")

    distances = distance_matrix(probe_embeddings, gallery_embeddings, metric)
    num_identities = np.unique(gallery_labels).shape[0]
    cmc_sum = np.zeros(num_identities)
    reciprocal_sum = 0.0
    rankings: List[ProbeRanking] = []

    for trial in range(trials):
        columns = single_shot_gallery(gallery_labels, derive_rng(seed, "single_shot", trial))
        trial_distances = distances[:, columns]
        ranks = match_ranks(trial_distances, probe_labels, gallery_labels[columns])
        cmc_sum += cmc_from_ranks(ranks, num_identities)
        reciprocal_sum += float(np.mean(1.0 / ranks))

        if trial == 0:
            probe_names = probe_ids if probe_ids is not None else [str(i) for i in range(probe_labels.shape[0])]
            gallery_names = gallery_ids if gallery_ids is not None else [str(i) for i in range(gallery_labels.shape[0])]
            for row, rank in enumerate(ranks):
                order = np.argsort(trial_distances[row], kind="stable")
                rankings.append(ProbeRanking(
                    probe=str(probe_names[row]),
                    gallery=[str(gallery_names[columns[i]]) for i in order],
                    distances=[float(trial_distances[row, i]) for i in order],
                    match_rank=int(rank),
                ))

    return RankingResult(cmc=cmc_sum / trials, map_value=reciprocal_sum / trials,
                         num_trials=trials, rankings=rankings)


def average_precisions(probe_embeddings: np.ndarray, probe_labels: Sequence[int],
                       gallery_embeddings: np.ndarray, gallery_labels: Sequence[int],
                       probe_cameras: Optional[Sequence[int]] = None,
                       gallery_cameras: Optional[Sequence[int]] = None,
                       metric: str = "euclidean") -> np.ndarray:
    """
    Average precision of every probe over the full ranked gallery.

    With camera ids, gallery images sharing both identity and camera with the
    probe are discarded. Probes left without a relevant item get NaN.
    """
    probe_embeddings = np.atleast_2d(probe_embeddings)
    gallery_embeddings = np.atleast_2d(gallery_embeddings)
    probe_labels = _as_labels(probe_labels, probe_embeddings.shape[0], "probe_labels")
    gallery_labels = _as_labels(gallery_labels, gallery_embeddings.shape[0], "gallery_labels")
    use_cameras = probe_cameras is not None and gallery_cameras is not None
    if use_cameras:
        probe_cameras = _as_labels(probe_cameras, probe_labels.shape[0], "probe_cameras")
        gallery_cameras = _as_labels(gallery_cameras, gallery_labels.shape[0], "gallery_cameras")

    distances = distance_matrix(probe_embeddings, gallery_embeddings, metric)
    precisions = np.full(probe_labels.shape[0], np.nan)
    for row in range(probe_labels.shape[0]):
        order = np.argsort(distances[row], kind="stable")
        matches = gallery_labels[order] == probe_labels[row]
        if use_cameras:
            keep = ~(matches & (gallery_cameras[order] == probe_cameras[row]))
            matches = matches[keep]
        num_relevant = int(matches.sum())
        if num_relevant == 0:
            continue
        hits = np.cumsum(matches)
        positions = np.arange(1, matches.shape[0] + 1)
        precisions[row] = float(np.sum((hits / positions)[matches]) / num_relevant)
    return precisions


def map_evaluate(probe_embeddings: np.ndarray, probe_labels: Sequence[int],
                 gallery_embeddings: np.ndarray, gallery_labels: Sequence[int],
                 probe_cameras: Optional[Sequence[int]] = None,
                 gallery_cameras: Optional[Sequence[int]] = None,
                 metric: str = "euclidean") -> float:
    """
    Mean average precision over the probes that have a relevant gallery item.

    Raises:
        ProtocolError: If no probe has a relevant gallery item
    """
    precisions = average_precisions(probe_embeddings, probe_labels, gallery_embeddings, gallery_labels,
                                    probe_cameras, gallery_cameras, metric)
    excluded = int(np.isnan(precisions).sum())
    if excluded == precisions.shape[0]:
        raise ProtocolError("No probe has a relevant gallery item")
    if excluded:
        logger.warning(f"Excluded {excluded} of {precisions.shape[0]} probes without relevant gallery items from mAP")
    return float(np.nanmean(precisions))


def split_probe_gallery(labels: Sequence[int], cameras: Sequence[int], seed: int) -> Tuple[np.ndarray, np.ndarray]:
    """
    Probe and gallery indices.

    With two or more cameras the smallest camera id holds the probes and the
    others the gallery. Otherwise one random image of every identity that has
    at least two images becomes a probe and the rest form the gallery.
    """
    labels = np.asarray(labels).reshape(-1)
    cameras = np.asarray(cameras).reshape(-1)
    indices = np.arange(labels.shape[0])
    distinct = np.unique(cameras)
    if distinct.shape[0] >= 2:
        probe_mask = cameras == distinct[0]
        return indices[probe_mask], indices[~probe_mask]

    rng = derive_rng(seed, "split")
    probes = []
    for label in np.unique(labels):
        members = indices[labels == label]
        if members.shape[0] >= 2:
            probes.append(int(rng.choice(members)))
    probe_mask = np.isin(indices, probes)
    return indices[probe_mask], indices[~probe_mask]


def evaluate_protocol(embeddings: np.ndarray, labels: Sequence[int], cameras: Sequence[int],
                      trials: int = 10, seed: int = 0, metric: str = "euclidean",
                      image_ids: Optional[Sequence[str]] = None) -> RankingResult:
    """
    Cross-camera single-shot CMC plus multi-shot mAP on one embedded split.

    With a single camera the random probe split is redrawn every trial and
    results are averaged over trials. Gallery images are then never discarded
    for sharing the probe's camera.

    Raises:
        ProtocolError: If a probe identity has no gallery image
    """
    embeddings = np.atleast_2d(embeddings)
    labels = _as_labels(labels, embeddings.shape[0], "labels")
    cameras = _as_labels(cameras, embeddings.shape[0], "cameras")
    ids = list(image_ids) if image_ids is not None else [str(i) for i in range(labels.shape[0])]
    cross_camera = np.unique(cameras).shape[0] >= 2

    def run(probe_idx, gallery_idx, trial_count, trial_seed):
        result = cmc_evaluate(
            embeddings[probe_idx], labels[probe_idx], embeddings[gallery_idx], labels[gallery_idx],
            trials=trial_count, seed=trial_seed, metric=metric,
            probe_ids=[ids[i] for i in probe_idx], gallery_ids=[ids[i] for i in gallery_idx],
        )
        precisions = average_precisions(
            embeddings[probe_idx], labels[probe_idx], embeddings[gallery_idx], labels[gallery_idx],
            cameras[probe_idx] if cross_camera else None,
            cameras[gallery_idx] if cross_camera else None,
            metric,
        )
        return result, precisions

    if cross_camera:
        probe_idx, gallery_idx = split_probe_gallery(labels, cameras, seed)
        result, precisions = run(probe_idx, gallery_idx, trials, seed)
    else:
        cmcs, all_precisions, result = [], [], None
        for trial in range(trials):
            probe_idx, gallery_idx = split_probe_gallery(labels, cameras, derive_seed(seed, "split_trial", trial))
            trial_result, trial_precisions = run(probe_idx, gallery_idx, 1, derive_seed(seed, "trial", trial))
            if result is None:
                result = trial_result
            cmcs.append(trial_result.cmc)
            all_precisions.append(trial_precisions)
        result.cmc = np.mean(cmcs, axis=0)
        result.num_trials = trials
        precisions = np.concatenate(all_precisions)

    excluded = int(np.isnan(precisions).sum())
    if excluded == precisions.shape[0]:
        raise ProtocolError("No probe has a relevant gallery item")
    if excluded:
        logger.warning(f"Excluded {excluded} of {precisions.shape[0]} probe evaluations without relevant gallery items from mAP")
    result.map_value = float(np.nanmean(precisions))
    result.excluded_probes = excluded
    logger.info(f"Evaluated {result.num_trials} trials: rank-1 {result.rank(1):.4f}, mAP {result.map_value:.4f}")
    return result
