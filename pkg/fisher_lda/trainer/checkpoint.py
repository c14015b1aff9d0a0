"""
checkpoint.py

DLFC checkpoint codec.

Layout (little-endian): magic "DLFC", u32 version, u32 section count, then
per section a u32-prefixed UTF-8 name and a u64-prefixed payload. Sections,
in order: meta (JSON), pca, gmm, net, optimizer, rng and, when present, lda.
Arrays are stored as ndim, shape and float64 data.
"""

import json
import logging
from collections import OrderedDict
from pathlib import Path
from typing import Dict, List, Tuple, Union

import numpy as np

from .. import __version__
from ..dataset.pca import PcaModel
from ..exceptions import CheckpointError, FisherLdaError
from ..gmm.model import GmmModel
from ..lda.eigen import EigenSolution
from ..net.layers import DenseLayer, NetParams
from ..shared_utils.binary_io import ByteReader, encode_array, pack_u32, pack_u64
from ..shared_utils.path_utils import ensure_directory_exists
from .config import TrainConfig
from .optimizer import NesterovSGD
from .state import EpochRecord, TrainState

logger = logging.getLogger(__name__)

CHECKPOINT_MAGIC = b"DLFC"
CHECKPOINT_VERSION = 1
REQUIRED_SECTIONS = ("meta", "pca", "gmm", "net", "optimizer", "rng")


def _pack_name(name: str) -> bytes:
    raw = name.encode("utf-8")
    return pack_u32(len(raw)) + raw


def _read_name(reader: ByteReader) -> str:
    raw = reader.read_bytes(reader.read_u32())
    try:
        return raw.decode("utf-8")
    except UnicodeDecodeError as e:
        raise CheckpointError(f"Undecodable name in {reader.source}: {e}")


def _pack_named_arrays(arrays: Dict[str, np.ndarray]) -> bytes:
    chunks = [pack_u32(len(arrays))]
    for name, array in arrays.items():
        chunks.append(_pack_name(name))
        chunks.append(encode_array(array))
    return b"".join(chunks)


def _read_named_arrays(reader: ByteReader) -> "OrderedDict[str, np.ndarray]":
    arrays = OrderedDict()
    for _ in range(reader.read_u32()):
        name = _read_name(reader)
        arrays[name] = reader.read_array()
    return arrays


def _net_arrays(net: NetParams) -> "OrderedDict[str, np.ndarray]":
    arrays = net.named_arrays(include_running=True)
    arrays.setdefault("bn.gamma", net.bn_gamma)
    arrays.setdefault("bn.beta", net.bn_beta)
    return arrays


def _meta(state: TrainState) -> Dict:
    net = state.net
    meta = {
        "version": __version__,
        "config": state.config.to_dict(),
        "channel_names": list(state.channel_names),
        "classes": [int(c) for c in state.classes],
        "epoch": state.epoch,
        "log": [record.to_dict() for record in state.log],
        "net": {
            "num_layers": len(net.layers),
            "dropout_rate": net.dropout_rate,
            "use_batch_norm": net.use_batch_norm,
            "bn_momentum": net.bn_momentum,
            "has_head": net.head is not None,
        },
    }
    if state.lda_projection is not None:
        meta["lda_lambda"] = state.lda_projection.lambda_reg
    return meta


def checkpoint_bytes(state: TrainState) -> bytes:
    """Serialize an initialized training state."""
    state.require_initialized()

    sections: List[Tuple[str, bytes]] = [
        ("meta", json.dumps(_meta(state), sort_keys=True).encode("utf-8")),
        ("pca", pack_u32(len(state.pcas)) + b"".join(
            encode_array(pca.mean) + encode_array(pca.basis) + encode_array(pca.explained_variance)
            for pca in state.pcas)),
        ("gmm", pack_u32(len(state.gmms)) + b"".join(
            pack_u32(gmm.num_components) + pack_u32(gmm.dim)
            + encode_array(gmm.log_weights_unnorm) + encode_array(gmm.means) + encode_array(gmm.log_vars)
            for gmm in state.gmms)),
        ("net", _pack_named_arrays(_net_arrays(state.net))),
        ("optimizer", _pack_named_arrays(OrderedDict(sorted(state.optimizer.buffers.items())))),
        ("rng", pack_u64(state.seed) + pack_u64(state.step)),
    ]
    if state.lda_projection is not None:
        sections.append(("lda", encode_array(state.lda_projection.eigenvalues)
                         + encode_array(state.lda_projection.eigenvectors)))

    chunks = [CHECKPOINT_MAGIC, pack_u32(CHECKPOINT_VERSION), pack_u32(len(sections))]
    for name, payload in sections:
        chunks.append(_pack_name(name))
        chunks.append(pack_u64(len(payload)))
        chunks.append(payload)
    return b"".join(chunks)


def _decode_pcas(reader: ByteReader) -> List[PcaModel]:
    return [
        PcaModel(mean=reader.read_array(), basis=reader.read_array(), explained_variance=reader.read_array())
        for _ in range(reader.read_u32())
    ]


def _decode_gmms(reader: ByteReader) -> List[GmmModel]:
    gmms = []
    for _ in range(reader.read_u32()):
        num_components, dim = reader.read_u32(), reader.read_u32()
        gmm = GmmModel(reader.read_array(), reader.read_array(), reader.read_array())
        if (gmm.num_components, gmm.dim) != (num_components, dim):
            raise CheckpointError(
                f"Mixture header says K={num_components}, D={dim} but arrays hold "
                f"K={gmm.num_components}, D={gmm.dim}"
            )
        gmms.append(gmm)
    return gmms


def _decode_net(arrays: Dict[str, np.ndarray], spec: Dict) -> NetParams:
    layers = [DenseLayer(arrays[f"layer{i}.W"], arrays[f"layer{i}.b"]) for i in range(spec["num_layers"])]
    head = DenseLayer(arrays["head.W"], arrays["head.b"]) if spec["has_head"] else None
    return NetParams(
        layers=layers,
        bn_gamma=arrays["bn.gamma"],
        bn_beta=arrays["bn.beta"],
        bn_running_mean=arrays["bn.running_mean"],
        bn_running_var=arrays["bn.running_var"],
        dropout_rate=spec["dropout_rate"],
        use_batch_norm=spec["use_batch_norm"],
        bn_momentum=spec["bn_momentum"],
        head=head,
    )


def state_from_bytes(data: bytes, source: str = "<bytes>") -> TrainState:
    """
    Decode a DLFC payload.

    Raises:
        CheckpointError: On wrong magic or version, truncation, missing sections
            or inconsistent contents
    """
    reader = ByteReader(data, CheckpointError, source)
    if data[:4] != CHECKPOINT_MAGIC:
        raise CheckpointError(f"Bad magic in {source}: expected {CHECKPOINT_MAGIC!r}, got {data[:4]!r}")
    reader.read_bytes(4)
    version = reader.read_u32()
    if version != CHECKPOINT_VERSION:
        raise CheckpointError(f"Unsupported checkpoint version {version} in {source}")

    sections: Dict[str, ByteReader] = {}
    for _ in range(reader.read_u32()):
        name = _read_name(reader)
        payload = reader.read_bytes(reader.read_u64())
        sections[name] = ByteReader(payload, CheckpointError, f"{source}:{name}")
    reader.expect_end()

    missing = [name for name in REQUIRED_SECTIONS if name not in sections]
    if missing:
        raise CheckpointError(f"Checkpoint {source} lacks sections {missing}")

    try:
        meta = json.loads(sections["meta"].read_bytes(sections["meta"].remaining).decode("utf-8"))
        config = TrainConfig.from_dict(meta["config"], f"{source}:meta")
        pcas = _decode_pcas(sections["pca"])
        gmms = _decode_gmms(sections["gmm"])
        net = _decode_net(_read_named_arrays(sections["net"]), meta["net"])
        optimizer = NesterovSGD(config.momentum, config.weight_decay, config.weight_decay_all_params)
        optimizer.buffers = dict(_read_named_arrays(sections["optimizer"]))
        seed, step = sections["rng"].read_u64(), sections["rng"].read_u64()

        lda_projection = None
        if "lda" in sections:
            lda_projection = EigenSolution(sections["lda"].read_array(), sections["lda"].read_array(),
                                           float(meta["lda_lambda"]))
        for section in sections.values():
            section.expect_end()
    except CheckpointError:
        raise
    except (FisherLdaError, KeyError, TypeError, ValueError) as e:
        raise CheckpointError(f"Inconsistent checkpoint {source}: {type(e).__name__}: {e}")

    if seed != config.seed:
        raise CheckpointError(f"Checkpoint {source} records seed {seed} but its config says {config.seed}")
    if len(pcas) != len(gmms) or len(gmms) != len(meta["channel_names"]):
        raise CheckpointError(f"Checkpoint {source} has mismatched channel sections")

    return TrainState(
        config=config,
        channel_names=tuple(meta["channel_names"]),
        pcas=pcas,
        gmms=gmms,
        net=net,
        optimizer=optimizer,
        classes=np.asarray(meta["classes"], dtype=np.int64),
        epoch=int(meta["epoch"]),
        step=int(step),
        log=[EpochRecord.from_dict(record) for record in meta["log"]],
        lda_projection=lda_projection,
    )


def write_checkpoint(state: TrainState, path: Union[str, Path]) -> Path:
    path = Path(path)
    ensure_directory_exists(path.parent)
    with open(path, 'wb') as f:
        f.write(checkpoint_bytes(state))
    logger.info(f"Wrote checkpoint {path} (epoch {state.epoch}, step {state.step})")
    return path


def read_checkpoint(path: Union[str, Path]) -> TrainState:
    """
    Raises:
        CheckpointError: If the file is missing or cannot be decoded
    """
    path = Path(path)
    try:
        with open(path, 'rb') as f:
            data = f.read()
    except OSError as e:
        raise CheckpointError(f"Cannot read checkpoint {path}: {e}")
    return state_from_bytes(data, str(path))
