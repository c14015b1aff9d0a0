"""
Joint training: network steps against the eigenvalue objective, line-searched
mixture updates, schedules, batch sampling and checkpointing.
"""

from .checkpoint import read_checkpoint, write_checkpoint
from .config import ChannelSpec, TrainConfig
from .fit import fit, fit_descriptor_sets, init_state
from .line_search import LineSearchResult, grid_line_search
from .optimizer import NesterovSGD, learning_rate
from .sampler import Batch, sample_batch
from .state import EpochRecord, TrainState
from .steps import batch_objective, train_step_gmm, train_step_theta
from .training_log import read_training_log, write_training_log

__all__ = [
    "read_checkpoint",
    "write_checkpoint",
    "ChannelSpec",
    "TrainConfig",
    "fit",
    "fit_descriptor_sets",
    "init_state",
    "LineSearchResult",
    "grid_line_search",
    "NesterovSGD",
    "learning_rate",
    "Batch",
    "sample_batch",
    "EpochRecord",
    "TrainState",
    "batch_objective",
    "train_step_gmm",
    "train_step_theta",
    "read_training_log",
    "write_training_log",
]
