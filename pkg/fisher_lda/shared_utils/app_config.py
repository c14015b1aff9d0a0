"""
Application configuration module.

Holds the recorded default of every run-configuration key. Training defaults
follow the published schedule (batch 128, learning rate 0.05 halved every 50
epochs, momentum 0.9, weight decay 1e-4, lambda 1e-3, epsilon 1, K=256,
4096-1024-1024 hidden units, dropout 0.2); desk-scale runs override them.
"""

import copy
import logging
from typing import Any, Dict, Iterable

from ..exceptions import ConfigError

# Initialize logger for this module
logger = logging.getLogger(__name__)

DEFAULT_TRAIN_CONFIG: Dict[str, Any] = {
    "batch_size": 128,
    "lr_init": 0.05,
    "momentum": 0.9,
    "weight_decay": 1e-4,
    "weight_decay_all_params": False,
    "lr_halving_period_epochs": 50,
    "epochs": 50,
    "lambda_reg": 1e-3,
    "epsilon_offset": 1.0,
    "lda_objective": "smallest",
    "gmm_update_period_epochs": 5,
    "gmm_update_batches": 2,
    "line_search_grid": [1e-4, 1e-3, 1e-2, 1e-1, 1.0],
    "gamma_threshold": 1e-5,
    "subsample_fraction": 0.10,
    "loss_kind": "lda",
    "seed": 0,
    "channels": [
        {"name": "default", "pca_dim": None, "num_components": 256}
    ],
    "hidden_widths": [4096, 1024, 1024],
    "dropout_rate": 0.2,
    "bn_momentum": 0.9,
    "min_per_class": 2,
    "steps_per_epoch": None,
    "em_max_iters": 100,
    "em_tol": 1e-6,
    "em_max_samples": 50000,
    "pca_max_samples": 100000,
    "early_stop": False,
    "early_stop_patience": 10,
    "early_stop_tol": 1e-5,
    "threads": 1,
}

DEFAULT_RUN_CONFIG: Dict[str, Any] = {
    **DEFAULT_TRAIN_CONFIG,
    "manifest": "manifest.json",
    "output_dir": "runs/default",
    "eval_trials": 10,
    "eval_ranks": [1, 5, 10, 20],
    "distance": "euclidean",
    "embed_space": "hidden",
    "synth_num_ids": 16,
    "synth_per_id": 8,
    "synth_dim": 16,
    "synth_descriptors_per_image": 48,
}


def default_train_config() -> Dict[str, Any]:
    """Return a deep copy of the training defaults."""
    return copy.deepcopy(DEFAULT_TRAIN_CONFIG)


def default_run_config() -> Dict[str, Any]:
    """Return a deep copy of the run defaults."""
    return copy.deepcopy(DEFAULT_RUN_CONFIG)


def reject_unknown_keys(values: Dict[str, Any], allowed: Iterable[str], source: str = "config") -> None:
    """Raise ConfigError listing every key of ``values`` that is not in ``allowed``."""
    unknown = sorted(set(values) - set(allowed))
    if unknown:
        raise ConfigError(f"Unknown keys in {source}: {', '.join(unknown)}")


def merge_with_defaults(overrides: Dict[str, Any], defaults: Dict[str, Any], source: str = "config") -> Dict[str, Any]:
    """Overlay ``overrides`` on a copy of ``defaults`` after rejecting unknown keys."""
    reject_unknown_keys(overrides, defaults.keys(), source)
    merged = copy.deepcopy(defaults)
    merged.update(copy.deepcopy(overrides))
    logger.debug(f"Merged {len(overrides)} overrides from {source}")
    return merged
