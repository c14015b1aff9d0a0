"""
Little-endian binary helpers shared by the descriptor-file and checkpoint codecs.
"""

import struct
from typing import Type

import numpy as np

from ..exceptions import FisherLdaError

_U32 = struct.Struct('<I')
_U64 = struct.Struct('<Q')


def pack_u32(value: int) -> bytes:
    return _U32.pack(int(value))


def pack_u64(value: int) -> bytes:
    return _U64.pack(int(value))


def encode_array(array: np.ndarray) -> bytes:
    """Encode an array as ndim, shape (u32 each) and float64 little-endian data."""
    array = np.asarray(array, dtype=np.float64)
    header = pack_u32(array.ndim) + b''.join(pack_u32(n) for n in array.shape)
    return header + array.astype('<f8').tobytes(order='C')


class ByteReader:
    """Sequential reader over a bytes payload that raises ``error_cls`` on truncation."""

    def __init__(self, data: bytes, error_cls: Type[FisherLdaError], source: str = "<bytes>"):
        self.data = data
        self.offset = 0
        self.error_cls = error_cls
        self.source = source

    @property
    def remaining(self) -> int:
        return len(self.data) - self.offset

    def read_bytes(self, count: int) -> bytes:
        if count < 0 or self.remaining < count:
            raise self.error_cls(
                f"Truncated payload in {self.source}: needed {count} bytes at offset {self.offset}, "
                f"{self.remaining} left"
            )
        chunk = self.data[self.offset:self.offset + count]
        self.offset += count
        return chunk

    def read_u32(self) -> int:
        return _U32.unpack(self.read_bytes(4))[0]

    def read_u64(self) -> int:
        return _U64.unpack(self.read_bytes(8))[0]

    def read_values(self, count: int, dtype: str) -> np.ndarray:
        itemsize = np.dtype(dtype).itemsize
        raw = self.read_bytes(count * itemsize)
        return np.frombuffer(raw, dtype=dtype).astype(np.float64)

    def read_array(self) -> np.ndarray:
        ndim = self.read_u32()
        shape = tuple(self.read_u32() for _ in range(ndim))
        count = int(np.prod(shape)) if shape else 1
        return self.read_values(count, '<f8').reshape(shape)

    def expect_end(self) -> None:
        if self.remaining:
            raise self.error_cls(f"Unexpected {self.remaining} trailing bytes in {self.source}")
