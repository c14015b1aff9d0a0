"""
descriptors.py

Per-image descriptor sets and the DFV1 binary descriptor file.

File layout (little-endian): magic b"DFV1", u32 row count M, u32 column
count D, then M*D float32 values row-major.
"""

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Union

import numpy as np

from ..exceptions import DescriptorFormatError, DimensionError, ManifestError
from ..shared_utils.binary_io import ByteReader, pack_u32
from ..shared_utils.path_utils import ensure_directory_exists

logger = logging.getLogger(__name__)

DESCRIPTOR_MAGIC = b"DFV1"
DEFAULT_CHANNEL = "default"


@dataclass
class DescriptorSet:
    """Local descriptors of one image, grouped by named channel."""
    image_id: str
    camera_id: int
    label: int
    channels: Dict[str, np.ndarray] = field(default_factory=dict)

    def __post_init__(self):
        if self.label < 0:
            raise ValueError(f"Label must be >= 0 for image {self.image_id}, got {self.label}")
        if not self.channels:
            raise ValueError(f"Image {self.image_id} has no descriptor channels")
        for name, matrix in self.channels.items():
            self.channels[name] = validate_descriptors(matrix, f"{self.image_id}/{name}")

    @property
    def descriptors(self) -> np.ndarray:
        """Descriptors of the first channel."""
        return next(iter(self.channels.values()))

    @property
    def channel_names(self):
        return list(self.channels)

    def channel(self, name: str, index: int = 0) -> np.ndarray:
        """
        Descriptors of a configured channel. A single-channel image feeds the
        first configured channel whatever its stored name.
        """
        if name in self.channels:
            return self.channels[name]
        if index == 0 and len(self.channels) == 1:
            return self.descriptors
        raise ManifestError(f"Image {self.image_id} has no descriptors for channel '{name}'")


def validate_descriptors(matrix: np.ndarray, source: str) -> np.ndarray:
    """Check that a descriptor matrix is 2-D, nonempty and finite."""
    matrix = np.asarray(matrix, dtype=np.float64)
    if matrix.ndim != 2:
        raise DimensionError(f"Descriptors for {source} must be a 2-D matrix, got shape {matrix.shape}")
    if matrix.shape[0] < 1 or matrix.shape[1] < 1:
        raise DimensionError(f"Descriptors for {source} are empty: shape {matrix.shape}")
    if not np.all(np.isfinite(matrix)):
        raise DescriptorFormatError(f"Descriptors for {source} contain NaN or Inf")
    return matrix


def encode_descriptor_bytes(matrix: np.ndarray) -> bytes:
    matrix = np.atleast_2d(np.asarray(matrix, dtype=np.float64))
    rows, cols = matrix.shape
    return DESCRIPTOR_MAGIC + pack_u32(rows) + pack_u32(cols) + matrix.astype('<f4').tobytes(order='C')


def decode_descriptor_bytes(data: bytes, source: str = "<bytes>") -> np.ndarray:
    reader = ByteReader(data, DescriptorFormatError, source)
    magic = reader.read_bytes(4) if len(data) >= 4 else b""
    if magic != DESCRIPTOR_MAGIC:
        raise DescriptorFormatError(f"Bad magic in {source}: expected {DESCRIPTOR_MAGIC!r}, got {data[:4]!r}")
    rows = reader.read_u32()
    cols = reader.read_u32()
    values = reader.read_values(rows * cols, '<f4')
    reader.expect_end()
    return values.reshape(rows, cols)


def write_descriptor_file(matrix: np.ndarray, path: Union[str, Path]) -> Path:
    """Write a descriptor matrix (or a single vector as M=1) as a DFV1 file."""
    path = Path(path)
    ensure_directory_exists(path.parent)
    with open(path, 'wb') as f:
        f.write(encode_descriptor_bytes(matrix))
    logger.debug(f"Wrote descriptor file {path}")
    return path


def read_descriptor_file(path: Union[str, Path]) -> np.ndarray:
    """
    Read a DFV1 descriptor file.

    Raises:
        DescriptorFormatError: On wrong magic, truncated payload or non-finite values
    """
    path = Path(path)
    with open(path, 'rb') as f:
        data = f.read()
    matrix = decode_descriptor_bytes(data, str(path))
    return validate_descriptors(matrix, str(path))
