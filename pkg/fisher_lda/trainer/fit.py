"""
fit.py

Unsupervised initialization (PCA and EM per channel) and the alternating
training loop: an epoch of network steps, then a mixture update round every
``gmm_update_period_epochs`` epochs, until the epoch budget or a loss plateau.
"""

import logging
import math
from typing import Callable, List, Optional, Sequence

import numpy as np

from ..dataset.descriptors import DescriptorSet
from ..dataset.manifest import Manifest, load_descriptor_sets
from ..dataset.pca import pca_fit, pca_project
from ..exceptions import ConfigError, InsufficientDataError
from ..gmm.em import gmm_fit_em
from ..net.layers import init_net
from ..shared_utils.seeding import derive_rng, derive_seed
from .config import TrainConfig
from .optimizer import NesterovSGD, learning_rate
from .sampler import sample_batch
from .state import EpochRecord, TrainState
from .steps import train_step_gmm, train_step_theta

logger = logging.getLogger(__name__)

EpochCallback = Callable[[TrainState, EpochRecord], None]


def init_state(config: TrainConfig, descriptor_sets: Sequence[DescriptorSet]) -> TrainState:
    """
    Fit PCA and the EM mixture of every channel and build an untrained network.

    Raises:
        InsufficientDataError: If the training pool is empty or has fewer than two identities
        ConfigError: If the last hidden width cannot hold the discriminant directions of a batch
    """
    if not descriptor_sets:
        raise InsufficientDataError("Training split is empty")
    classes = np.unique([s.label for s in descriptor_sets])
    if classes.shape[0] < 2:
        raise InsufficientDataError(f"Training needs at least 2 identities, got {classes.shape[0]}")

    classes_per_batch = min(classes.shape[0], config.batch_size // config.min_per_class)
    if config.loss_kind == "lda" and config.hidden_widths[-1] < classes_per_batch - 1:
        raise ConfigError(
            f"Last hidden width {config.hidden_widths[-1]} is smaller than the "
            f"{classes_per_batch - 1} discriminant directions of a batch"
        )

    pcas, gmms = [], []
    for index, channel in enumerate(config.channels):
        stacked = np.vstack([s.channel(channel.name, index) for s in descriptor_sets])
        sample = stacked
        if stacked.shape[0] > config.pca_max_samples:
            rows = derive_rng(config.seed, "pca", index).choice(stacked.shape[0], config.pca_max_samples, replace=False)
            sample = stacked[np.sort(rows)]
        pca = pca_fit(sample, channel.pca_dim)
        projected = pca_project(pca, stacked)
        gmm = gmm_fit_em(projected, channel.num_components, seed=derive_seed(config.seed, "em", index),
                         max_iters=config.em_max_iters, tol=config.em_tol, max_samples=config.em_max_samples)
        logger.info(
            f"Channel '{channel.name}': PCA {pca.in_dim} -> {pca.out_dim}, "
            f"{gmm.num_components} mixture components fitted on {stacked.shape[0]} descriptors"
        )
        pcas.append(pca)
        gmms.append(gmm)

    fv_dim = sum(gmm.fv_length for gmm in gmms)
    net = init_net(
        fv_dim, config.hidden_widths, config.dropout_rate, seed=derive_seed(config.seed, "net"),
        num_classes=classes.shape[0] if config.loss_kind == "cross_entropy" else None,
        bn_momentum=config.bn_momentum,
    )
    optimizer = NesterovSGD(config.momentum, config.weight_decay, config.weight_decay_all_params)
    return TrainState(
        config=config, channel_names=config.channel_names, pcas=pcas, gmms=gmms,
        net=net, optimizer=optimizer, classes=classes,
    )


def steps_per_epoch(config: TrainConfig, pool_size: int) -> int:
    if config.steps_per_epoch is not None:
        return config.steps_per_epoch
    return max(1, math.ceil(pool_size / config.batch_size))


def _plateaued(config: TrainConfig, log: List[EpochRecord]) -> bool:
    if not config.early_stop or len(log) < config.early_stop_patience:
        return False
    recent = [record.loss for record in log[-config.early_stop_patience:]]
    return max(recent) - min(recent) < config.early_stop_tol


def run_epoch(state: TrainState, descriptor_sets: Sequence[DescriptorSet]) -> EpochRecord:
    """Train one epoch of network steps, followed by a mixture round when one is due."""
    config = state.config
    epoch = state.epoch
    lr = learning_rate(config, epoch)

    values, eigenvalues = [], np.zeros(0)
    for step in range(steps_per_epoch(config, len(descriptor_sets))):
        batch = sample_batch(descriptor_sets, config.batch_size, config.min_per_class,
                             seed=derive_seed(config.seed, "batch", epoch, step))
        metrics = train_step_theta(state, [descriptor_sets[p] for p in batch.positions], batch.labels, lr)
        values.append(metrics.objective if config.loss_kind == "lda" else -metrics.objective)
        eigenvalues = metrics.eigenvalues

    eta = None
    period = config.gmm_update_period_epochs
    if period and (epoch + 1) % period == 0:
        batches = []
        for index in range(config.gmm_update_batches):
            batch = sample_batch(descriptor_sets, config.batch_size, config.min_per_class,
                                 seed=derive_seed(config.seed, "gmm_batch", epoch, index))
            batches.append(([descriptor_sets[p] for p in batch.positions], batch.labels))
        eta = train_step_gmm(state, batches).eta

    record = EpochRecord(epoch=epoch, loss=float(np.mean(values)), lr=lr,
                         eigenvalues=[float(v) for v in eigenvalues], eta=eta)
    state.log.append(record)
    state.epoch += 1
    spectrum = ", ".join(f"{v:.4g}" for v in record.eigenvalues)
    logger.info(
        f"Epoch {epoch}: loss {record.loss:.6g}, lr {lr:g}"
        + (f", eigenvalues [{spectrum}]" if spectrum else "")
        + ("" if eta is None else f", eta {eta:g}")
    )
    return record


def fit_descriptor_sets(config: TrainConfig, descriptor_sets: Sequence[DescriptorSet],
                        state: Optional[TrainState] = None,
                        on_epoch: Optional[EpochCallback] = None) -> TrainState:
    """
    Train on an in-memory pool, starting from ``state`` when resuming.

    The returned state holds the full per-epoch log.
    """
    if state is None:
        state = init_state(config, descriptor_sets)
    state.config = config

    while state.epoch < config.epochs:
        record = run_epoch(state, descriptor_sets)
        if on_epoch is not None:
            on_epoch(state, record)
        if _plateaued(config, state.log):
            logger.info(f"Stopping early after epoch {record.epoch}: loss plateau below {config.early_stop_tol:g}")
            break
    return state


def fit(config: TrainConfig, manifest: Manifest, on_epoch: Optional[EpochCallback] = None) -> TrainState:
    """Load the train split of ``manifest`` and run training."""
    entries = manifest.split("train")
    descriptor_sets = load_descriptor_sets(manifest, entries, config.channel_names)
    logger.info(f"Training on {len(descriptor_sets)} images of {len({s.label for s in descriptor_sets})} identities")
    return fit_descriptor_sets(config, descriptor_sets, on_epoch=on_epoch)
