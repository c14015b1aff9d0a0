"""
config.py

Run configuration: every training key plus the dataset, output and
evaluation settings of a command-line run, read from one JSON file.
"""

import hashlib
import json
import logging
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Any, Dict, Optional, Tuple, Union

from ..evalrank.embed import DISTANCES, EMBED_SPACES
from ..exceptions import ConfigError
from ..shared_utils.app_config import DEFAULT_RUN_CONFIG, DEFAULT_TRAIN_CONFIG, merge_with_defaults
from ..shared_utils.path_utils import load_json_file, resolve_path
from ..trainer.config import TrainConfig

logger = logging.getLogger(__name__)

RUN_KEYS = tuple(key for key in DEFAULT_RUN_CONFIG if key not in DEFAULT_TRAIN_CONFIG)


@dataclass(frozen=True)
class RunConfig:
    train: TrainConfig
    manifest: Path
    output_dir: Path
    eval_trials: int
    eval_ranks: Tuple[int, ...]
    distance: str
    embed_space: str
    synth_num_ids: int
    synth_per_id: int
    synth_dim: int
    synth_descriptors_per_image: int

    @classmethod
    def from_dict(cls, values: Dict[str, Any], base_dir: Optional[Path] = None,
                  source: str = "run config") -> "RunConfig":
        """
        Split a flat mapping into training and run settings.

        Relative ``manifest`` and ``output_dir`` resolve against ``base_dir``.

        Raises:
            ConfigError: On unknown keys or invalid values
        """
        merged = merge_with_defaults(values, DEFAULT_RUN_CONFIG, source)
        train = TrainConfig.from_dict({key: merged[key] for key in DEFAULT_TRAIN_CONFIG}, source)
        try:
            config = cls(
                train=train,
                manifest=resolve_path(merged["manifest"], base_dir),
                output_dir=resolve_path(merged["output_dir"], base_dir),
                eval_trials=int(merged["eval_trials"]),
                eval_ranks=tuple(int(k) for k in merged["eval_ranks"]),
                distance=str(merged["distance"]),
                embed_space=str(merged["embed_space"]),
                synth_num_ids=int(merged["synth_num_ids"]),
                synth_per_id=int(merged["synth_per_id"]),
                synth_dim=int(merged["synth_dim"]),
                synth_descriptors_per_image=int(merged["synth_descriptors_per_image"]),
            )
        except (TypeError, ValueError) as e:
            raise ConfigError(f"Invalid value in {source}: {e}")
        config.validate()
        return config

    def validate(self) -> None:
        checks = [
            (self.eval_trials >= 1, "eval_trials must be >= 1"),
            (len(self.eval_ranks) > 0 and min(self.eval_ranks) >= 1, "eval_ranks must be positive"),
            (self.distance in DISTANCES, f"distance must be one of {DISTANCES}"),
            (self.embed_space in EMBED_SPACES, f"embed_space must be one of {EMBED_SPACES}"),
            (self.synth_num_ids >= 4, "synth_num_ids must be >= 4"),
            (self.synth_per_id >= 2, "synth_per_id must be >= 2"),
            (self.synth_dim >= 1, "synth_dim must be >= 1"),
            (self.synth_descriptors_per_image >= 1, "synth_descriptors_per_image must be >= 1"),
        ]
        for passed, message in checks:
            if not passed:
                raise ConfigError(f"Invalid run config: {message}")

    @property
    def normalize_embeddings(self) -> bool:
        return self.distance != "raw_euclidean"

    def to_dict(self) -> Dict[str, Any]:
        values = self.train.to_dict()
        values.update({
            "manifest": str(self.manifest),
            "output_dir": str(self.output_dir),
            "eval_trials": self.eval_trials,
            "eval_ranks": list(self.eval_ranks),
            "distance": self.distance,
            "embed_space": self.embed_space,
            "synth_num_ids": self.synth_num_ids,
            "synth_per_id": self.synth_per_id,
            "synth_dim": self.synth_dim,
            "synth_descriptors_per_image": self.synth_descriptors_per_image,
        })
        return values

    def config_hash(self) -> str:
        """SHA-256 of the canonical JSON form of every setting."""
        canonical = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()

    def with_overrides(self, seed: Optional[int] = None, threads: Optional[int] = None,
                       output_dir: Optional[Union[str, Path]] = None) -> "RunConfig":
        """Apply command-line overrides."""
        changes: Dict[str, Any] = {}
        if seed is not None:
            changes["seed"] = seed
        if threads is not None:
            changes["threads"] = threads
        config = replace(self, train=self.train.replace(**changes)) if changes else self
        if output_dir is not None:
            config = replace(config, output_dir=resolve_path(output_dir))
        return config


def load_run_config(config_path: Union[str, Path]) -> RunConfig:
    """
    Read a run configuration file.

    Raises:
        ConfigError: If the file is missing, is not JSON, or holds invalid settings
    """
    config_path = resolve_path(config_path)
    values = load_json_file(config_path)
    config = RunConfig.from_dict(values, base_dir=config_path.parent, source=str(config_path))
    logger.debug(f"Loaded run config {config_path} (hash {config.config_hash()[:12]})")
    return config
