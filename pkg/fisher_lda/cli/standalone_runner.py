#!/usr/bin/env python3
"""
Standalone runner for the fisher_lda pipeline.

This script provides a unified command-line interface for generating
synthetic data, training, encoding images and evaluating retrieval.
"""

import argparse
import sys
from pathlib import Path
from typing import List, Optional

from ..exceptions import FisherLdaError
from ..shared_utils.logging_config import setup_logging
from .commands import cmd_encode, cmd_eval, cmd_synth, cmd_train
from .config import load_run_config

COMMANDS = ("train", "encode", "eval", "synth")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fisher_lda",
        description="Fisher vectors, deep layers and an LDA eigenvalue objective - Standalone Runner",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  python -m fisher_lda synth --config configs/synthetic_quickstart.json
  python -m fisher_lda train --config configs/synthetic_quickstart.json
  python -m fisher_lda eval --config configs/synthetic_quickstart.json
  python -m fisher_lda encode --config configs/synthetic_quickstart.json --ids p0000_04 p0001_05
        """
    )

    parser.add_argument(
        'command',
        choices=COMMANDS,
        help='What to run'
    )

    parser.add_argument(
        '--config',
        required=True,
        help='Run configuration JSON file'
    )

    parser.add_argument(
        '--checkpoint',
        help='Checkpoint to encode or evaluate with (default: <out>/checkpoint.dlfc)'
    )

    parser.add_argument(
        '--out',
        help='Output directory (overrides output_dir of the config)'
    )

    parser.add_argument(
        '--threads',
        type=int,
        help='Maximum number of worker threads'
    )

    parser.add_argument(
        '--seed',
        type=int,
        help='Run seed (overrides the config)'
    )

    parser.add_argument(
        '--self-gallery',
        action='store_true',
        help='eval only: use one image per identity as both probe and gallery'
    )

    parser.add_argument(
        '--ids',
        nargs='*',
        default=[],
        help='encode only: image ids to embed'
    )

    parser.add_argument(
        '--verbose', '-v',
        action='store_true',
        help='Enable debug logging'
    )

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """Main entry point; returns the process exit code."""
    args = build_parser().parse_args(argv)

    try:
        config = load_run_config(args.config).with_overrides(
            seed=args.seed, threads=args.threads, output_dir=args.out,
        )
        setup_logging(config.output_dir / "logs", debug_mode=args.verbose)
        checkpoint = Path(args.checkpoint) if args.checkpoint else None

        if args.command == 'synth':
            return cmd_synth(config)
        if args.command == 'train':
            return cmd_train(config)
        if args.command == 'encode':
            return cmd_encode(config, args.ids, checkpoint)
        return cmd_eval(config, checkpoint, self_gallery=args.self_gallery)
    except FisherLdaError as e:
        print(f"Error: {e}", file=sys.stderr)
        return e.exit_code
    except OSError as e:
        print(f"Error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
