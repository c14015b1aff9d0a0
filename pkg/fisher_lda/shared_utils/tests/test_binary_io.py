# fisher_lda/shared_utils/tests/test_binary_io.py
from unittest import TestCase

import numpy as np
from numpy.testing import assert_array_equal

from fisher_lda.exceptions import CheckpointError
from fisher_lda.shared_utils.binary_io import ByteReader, encode_array, pack_u32, pack_u64


class BinaryIoTestCase(TestCase):

    def test_little_endian_integers(self):
        self.assertEqual(pack_u32(1), b'\x01\x00\x00\x00')
        self.assertEqual(pack_u64(258), b'\x02\x01' + b'\x00' * 6)

    def test_array_layout(self):
        payload = encode_array(np.arange(6.0).reshape(2, 3))
        self.assertEqual(payload[:12], pack_u32(2) + pack_u32(2) + pack_u32(3))
        self.assertEqual(len(payload), 12 + 6 * 8)

        reader = ByteReader(payload, CheckpointError)
        assert_array_equal(reader.read_array(), np.arange(6.0).reshape(2, 3))
        reader.expect_end()

    def test_scalar_array(self):
        reader = ByteReader(encode_array(np.float64(2.5)), CheckpointError)
        self.assertEqual(reader.read_array().shape, ())

    def test_truncation_raises_given_error(self):
        reader = ByteReader(pack_u32(7)[:3], CheckpointError, "part.bin")
        with self.assertRaises(CheckpointError) as ctx:
            reader.read_u32()
        self.assertIn("part.bin", str(ctx.exception))

    def test_trailing_bytes(self):
        reader = ByteReader(pack_u32(1) + b'\x00', CheckpointError)
        self.assertEqual(reader.read_u32(), 1)
        with self.assertRaises(CheckpointError):
            reader.expect_end()
