"""
commands.py

The four subcommands. Each takes a loaded RunConfig, writes only below its
output directory and returns 0; failures propagate as FisherLdaError for the
runner to map onto exit codes.
"""

import logging
import platform
import sys
from pathlib import Path
from typing import Optional, Sequence, TextIO

import numpy as np
import scipy

from .. import __version__
from ..dataset.descriptors import write_descriptor_file
from ..dataset.manifest import Manifest, ManifestEntry, load_descriptor_sets, read_manifest, write_manifest
from ..dataset.synth import synth_generate, synth_split
from ..evalrank.embed import embed
from ..evalrank.ranking import cmc_evaluate, evaluate_protocol
from ..evalrank.report import export_cmc_csv, export_report_json, summary_line
from ..exceptions import DivergenceError
from ..lda.eigen import lda_projection
from ..shared_utils.path_utils import ensure_directory_exists, write_json_file
from ..trainer.checkpoint import read_checkpoint, write_checkpoint
from ..trainer.fit import fit_descriptor_sets
from ..trainer.training_log import write_training_log
from .config import RunConfig

logger = logging.getLogger(__name__)

CHECKPOINT_NAME = "checkpoint.dlfc"
DIVERGENCE_DUMP_NAME = "divergence_dump.dlfc"
TRAINING_LOG_NAME = "training_log.ndjson"
RUN_MANIFEST_NAME = "run_manifest.json"


def default_checkpoint(config: RunConfig) -> Path:
    return config.output_dir / CHECKPOINT_NAME


def run_manifest(config: RunConfig, command: str) -> dict:
    """Everything needed to repeat a run: the settings, their hash, the seed and library versions."""
    return {
        "command": command,
        "config_hash": config.config_hash(),
        "seed": config.train.seed,
        "versions": {
            "fisher_lda": __version__,
            "numpy": np.__version__,
            "scipy": scipy.__version__,
            "python": platform.python_version(),
        },
        "config": config.to_dict(),
    }


def cmd_synth(config: RunConfig) -> int:
    """Generate a synthetic dataset: descriptor files plus a manifest under the output directory."""
    out = ensure_directory_exists(config.output_dir)
    channel_names = config.train.channel_names
    descriptor_sets = synth_generate(
        config.synth_num_ids, config.synth_per_id, config.synth_dim, config.train.seed,
        num_descriptors=config.synth_descriptors_per_image, channel_names=channel_names,
    )

    entries = []
    for descriptor_set in descriptor_sets:
        files = {}
        for name in channel_names:
            suffix = "" if len(channel_names) == 1 else f".{name}"
            relative = f"descriptors/{descriptor_set.image_id}{suffix}.dfv"
            write_descriptor_file(descriptor_set.channels[name], out / relative)
            files[name] = relative
        split = synth_split(descriptor_set.label, config.synth_num_ids)
        entries.append(ManifestEntry(descriptor_set.image_id, descriptor_set.label,
                                     descriptor_set.camera_id, files, split))

    manifest_path = write_manifest(Manifest(entries, base_dir=out), out / "manifest.json")
    logger.info(f"Synthetic dataset of {len(entries)} images written to {manifest_path}")
    return 0


def cmd_train(config: RunConfig) -> int:
    """
    Train on the manifest's train split and write checkpoint, training log and run manifest.

    A divergence writes the state it carries to ``divergence_dump.dlfc`` before re-raising.
    """
    out = ensure_directory_exists(config.output_dir)
    manifest = read_manifest(config.manifest)
    descriptor_sets = load_descriptor_sets(manifest, manifest.split("train"), config.train.channel_names)

    try:
        state = fit_descriptor_sets(config.train, descriptor_sets)
    except DivergenceError as e:
        if e.state is not None and e.state.is_initialized:
            write_checkpoint(e.state, out / DIVERGENCE_DUMP_NAME)
            write_training_log(e.state.log, out / TRAINING_LOG_NAME)
        raise

    if config.embed_space == "lda":
        hidden = embed(state, descriptor_sets, space="hidden", normalize=False, threads=config.train.threads)
        labels = np.array([s.label for s in descriptor_sets])
        state.lda_projection = lda_projection(hidden, labels, config.train.lambda_reg)

    write_checkpoint(state, default_checkpoint(config))
    write_training_log(state.log, out / TRAINING_LOG_NAME)
    write_json_file(run_manifest(config, "train"), out / RUN_MANIFEST_NAME)
    if state.log:
        logger.info(f"Training finished after {state.epoch} epochs: loss {state.log[0].loss:.6g} -> {state.log[-1].loss:.6g}")
    else:
        logger.info("Training finished with the unsupervised initialization only")
    return 0


def cmd_encode(config: RunConfig, image_ids: Sequence[str], checkpoint: Optional[Path] = None) -> int:
    """Write the embedding of every requested image as a one-row DFV1 file."""
    if not image_ids:
        logger.info("No image ids given; nothing to encode")
        return 0
    state = read_checkpoint(checkpoint or default_checkpoint(config))
    manifest = read_manifest(config.manifest)
    entries = [manifest.by_id(image_id) for image_id in image_ids]
    descriptor_sets = load_descriptor_sets(manifest, entries, state.channel_names)

    embeddings = embed(state, descriptor_sets, space=config.embed_space,
                       normalize=config.normalize_embeddings, threads=config.train.threads)
    out = ensure_directory_exists(config.output_dir / "embeddings")
    for entry, row in zip(entries, embeddings):
        write_descriptor_file(row[None, :], out / f"{entry.image_id}.dfv")
    logger.info(f"Wrote {len(entries)} embeddings of width {embeddings.shape[1]} to {out}")
    return 0


def cmd_eval(config: RunConfig, checkpoint: Optional[Path] = None, self_gallery: bool = False,
             stdout: Optional[TextIO] = None) -> int:
    """
    Evaluate on the test split, write cmc.csv and eval_report.json, and print
    the rank-k and mAP summary as one JSON line.

    With ``self_gallery`` one image per identity serves as both probe and
    gallery, a sanity check whose rank-1 is 1.
    """
    checkpoint = checkpoint or default_checkpoint(config)
    state = read_checkpoint(checkpoint)
    manifest = read_manifest(config.manifest)
    entries = manifest.split("test")
    descriptor_sets = load_descriptor_sets(manifest, entries, state.channel_names)

    embeddings = embed(state, descriptor_sets, space=config.embed_space,
                       normalize=config.normalize_embeddings, threads=config.train.threads)
    labels = np.array([s.label for s in descriptor_sets])
    cameras = np.array([s.camera_id for s in descriptor_sets])
    image_ids = [s.image_id for s in descriptor_sets]
    seed = config.train.seed

    if self_gallery:
        _, first = np.unique(labels, return_index=True)
        ids = [image_ids[i] for i in first]
        result = cmc_evaluate(embeddings[first], labels[first], embeddings[first], labels[first],
                              trials=config.eval_trials, seed=seed, metric=config.distance,
                              probe_ids=ids, gallery_ids=ids)
    else:
        result = evaluate_protocol(embeddings, labels, cameras, trials=config.eval_trials, seed=seed,
                                   metric=config.distance, image_ids=image_ids)

    out = ensure_directory_exists(config.output_dir)
    export_cmc_csv(result, out / "cmc.csv")
    export_report_json(result, out / "eval_report.json", ranks=config.eval_ranks, extra={
        "checkpoint": str(checkpoint),
        "config_hash": config.config_hash(),
        "seed": seed,
        "self_gallery": self_gallery,
        "distance": config.distance,
        "embed_space": config.embed_space,
    })
    print(summary_line(result, config.eval_ranks), file=stdout or sys.stdout)
    return 0
