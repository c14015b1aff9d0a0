"""
Command-line entry point: synth, train, encode and eval.
"""

from .commands import cmd_encode, cmd_eval, cmd_synth, cmd_train
from .config import RunConfig, load_run_config
from .standalone_runner import main

__all__ = ["cmd_encode", "cmd_eval", "cmd_synth", "cmd_train", "RunConfig", "load_run_config", "main"]
