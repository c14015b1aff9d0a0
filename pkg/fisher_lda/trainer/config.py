"""
config.py

Typed training configuration built from the flat defaults in app_config.
"""

import logging
from dataclasses import asdict, dataclass, field, fields
from typing import Any, Dict, Optional, Tuple

from ..exceptions import ConfigError
from ..shared_utils.app_config import DEFAULT_TRAIN_CONFIG, merge_with_defaults, reject_unknown_keys

logger = logging.getLogger(__name__)

LOSS_KINDS = ("lda", "cross_entropy")
LDA_OBJECTIVES = ("smallest", "all")
CHANNEL_KEYS = ("name", "pca_dim", "num_components")


@dataclass(frozen=True)
class ChannelSpec:
    """One descriptor channel: its PCA output width (None keeps the maximum) and mixture size."""
    name: str
    pca_dim: Optional[int] = None
    num_components: int = 256

    @classmethod
    def from_dict(cls, record: Dict[str, Any]) -> "ChannelSpec":
        if not isinstance(record, dict):
            raise ConfigError(f"Channel definition must be an object, got {record!r}")
        reject_unknown_keys(record, CHANNEL_KEYS, "channel definition")
        if "name" not in record:
            raise ConfigError("Channel definition is missing 'name'")
        pca_dim = record.get("pca_dim")
        spec = cls(
            name=str(record["name"]),
            pca_dim=None if pca_dim is None else int(pca_dim),
            num_components=int(record.get("num_components", 256)),
        )
        if spec.pca_dim is not None and spec.pca_dim < 1:
            raise ConfigError(f"Channel {spec.name}: pca_dim must be >= 1 or null")
        if spec.num_components < 1:
            raise ConfigError(f"Channel {spec.name}: num_components must be >= 1")
        return spec

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


def _default(key: str):
    value = DEFAULT_TRAIN_CONFIG[key]
    if isinstance(value, list):
        if key == "channels":
            channels = tuple(ChannelSpec.from_dict(record) for record in value)
            return field(default_factory=lambda: channels)
        frozen = tuple(value)
        return field(default_factory=lambda: frozen)
    return field(default=value)


@dataclass(frozen=True)
class TrainConfig:
    """Hyperparameters of one training run; see DEFAULT_TRAIN_CONFIG for the recorded defaults."""
    batch_size: int = _default("batch_size")
    lr_init: float = _default("lr_init")
    momentum: float = _default("momentum")
    weight_decay: float = _default("weight_decay")
    weight_decay_all_params: bool = _default("weight_decay_all_params")
    lr_halving_period_epochs: int = _default("lr_halving_period_epochs")
    epochs: int = _default("epochs")
    lambda_reg: float = _default("lambda_reg")
    epsilon_offset: float = _default("epsilon_offset")
    lda_objective: str = _default("lda_objective")
    gmm_update_period_epochs: int = _default("gmm_update_period_epochs")
    gmm_update_batches: int = _default("gmm_update_batches")
    line_search_grid: Tuple[float, ...] = _default("line_search_grid")
    gamma_threshold: float = _default("gamma_threshold")
    subsample_fraction: float = _default("subsample_fraction")
    loss_kind: str = _default("loss_kind")
    seed: int = _default("seed")
    channels: Tuple[ChannelSpec, ...] = _default("channels")
    hidden_widths: Tuple[int, ...] = _default("hidden_widths")
    dropout_rate: float = _default("dropout_rate")
    bn_momentum: float = _default("bn_momentum")
    min_per_class: int = _default("min_per_class")
    steps_per_epoch: Optional[int] = _default("steps_per_epoch")
    em_max_iters: int = _default("em_max_iters")
    em_tol: float = _default("em_tol")
    em_max_samples: int = _default("em_max_samples")
    pca_max_samples: int = _default("pca_max_samples")
    early_stop: bool = _default("early_stop")
    early_stop_patience: int = _default("early_stop_patience")
    early_stop_tol: float = _default("early_stop_tol")
    threads: int = _default("threads")

    def __post_init__(self):
        self.validate()

    @classmethod
    def from_dict(cls, values: Dict[str, Any], source: str = "training config") -> "TrainConfig":
        """Build a config from flat overrides, rejecting unknown keys."""
        merged = merge_with_defaults(values, DEFAULT_TRAIN_CONFIG, source)
        try:
            return cls(
                **{
                    **merged,
                    "line_search_grid": tuple(float(eta) for eta in merged["line_search_grid"]),
                    "hidden_widths": tuple(int(width) for width in merged["hidden_widths"]),
                    "channels": tuple(ChannelSpec.from_dict(record) for record in merged["channels"]),
                }
            )
        except (TypeError, ValueError) as e:
            raise ConfigError(f"Invalid value in {source}: {e}")

    def to_dict(self) -> Dict[str, Any]:
        values = {}
        for item in fields(self):
            value = getattr(self, item.name)
            if item.name == "channels":
                value = [channel.to_dict() for channel in value]
            elif isinstance(value, tuple):
                value = list(value)
            values[item.name] = value
        return values

    @property
    def channel_names(self) -> Tuple[str, ...]:
        return tuple(channel.name for channel in self.channels)

    def replace(self, **changes) -> "TrainConfig":
        values = self.to_dict()
        values.update(changes)
        return TrainConfig.from_dict(values)

    def validate(self) -> None:
        """
        Raises:
            ConfigError: On the first out-of-range value
        """
        checks = [
            (self.lr_init > 0, "lr_init must be positive"),
            (0 <= self.momentum < 1, "momentum must lie in [0, 1)"),
            (self.weight_decay >= 0, "weight_decay must be >= 0"),
            (self.lr_halving_period_epochs >= 1, "lr_halving_period_epochs must be >= 1"),
            (self.epochs >= 0, "epochs must be >= 0"),
            (self.lambda_reg > 0, "lambda_reg must be positive"),
            (self.epsilon_offset >= 0, "epsilon_offset must be >= 0"),
            (self.lda_objective in LDA_OBJECTIVES, f"lda_objective must be one of {LDA_OBJECTIVES}"),
            (self.gmm_update_period_epochs >= 0, "gmm_update_period_epochs must be >= 0 (0 disables G-updates)"),
            (self.gmm_update_batches >= 1, "gmm_update_batches must be >= 1"),
            (len(self.line_search_grid) > 0 and all(eta > 0 for eta in self.line_search_grid),
             "line_search_grid must hold positive step sizes"),
            (self.gamma_threshold >= 0, "gamma_threshold must be >= 0"),
            (0 < self.subsample_fraction <= 1, "subsample_fraction must lie in (0, 1]"),
            (self.loss_kind in LOSS_KINDS, f"loss_kind must be one of {LOSS_KINDS}"),
            (self.seed >= 0, "seed must be >= 0"),
            (len(self.channels) > 0, "at least one channel is required"),
            (len(set(self.channel_names)) == len(self.channels), "channel names must be unique"),
            (len(self.hidden_widths) > 0 and min(self.hidden_widths) >= 1, "hidden_widths must be positive"),
            (0 <= self.dropout_rate < 1, "dropout_rate must lie in [0, 1)"),
            (0 <= self.bn_momentum < 1, "bn_momentum must lie in [0, 1)"),
            (self.min_per_class >= 2, "min_per_class must be >= 2"),
            (self.batch_size >= 2 * self.min_per_class, "batch_size must be at least 2 * min_per_class"),
            (self.steps_per_epoch is None or self.steps_per_epoch >= 1, "steps_per_epoch must be >= 1 or null"),
            (self.em_max_iters >= 0, "em_max_iters must be >= 0"),
            (self.em_tol >= 0, "em_tol must be >= 0"),
            (self.em_max_samples >= 1, "em_max_samples must be >= 1"),
            (self.pca_max_samples >= 2, "pca_max_samples must be >= 2"),
            (self.early_stop_patience >= 1, "early_stop_patience must be >= 1"),
            (self.threads >= 1, "threads must be >= 1"),
        ]
        for passed, message in checks:
            if not passed:
                raise ConfigError(f"Invalid training config: {message}")
