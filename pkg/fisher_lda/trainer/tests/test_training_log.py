# fisher_lda/trainer/tests/test_training_log.py
import json
import tempfile
from pathlib import Path
from unittest import TestCase

from fisher_lda.exceptions import ConfigError
from fisher_lda.trainer.state import EpochRecord
from fisher_lda.trainer.training_log import append_training_log, read_training_log, write_training_log


class TrainingLogTestCase(TestCase):
    """Test cases for the NDJSON training log."""

    def setUp(self):
        self.temp_dir = tempfile.TemporaryDirectory()
        self.path = Path(self.temp_dir.name) / "training_log.ndjson"
        self.records = [
            EpochRecord(epoch=0, loss=0.5, lr=0.05, eigenvalues=[0.5, 2.0], eta=None),
            EpochRecord(epoch=1, loss=0.75, lr=0.05, eigenvalues=[0.75, 1.5], eta=0.01),
        ]

    def tearDown(self):
        self.temp_dir.cleanup()

    def test_one_record_per_line(self):
        write_training_log(self.records, self.path)
        lines = self.path.read_text(encoding='utf-8').splitlines()
        self.assertEqual(len(lines), 2)
        self.assertEqual(json.loads(lines[0]), {"epoch": 0, "loss": 0.5, "lr": 0.05,
                                                "eigenvalues": [0.5, 2.0], "eta": None})

    def test_read_back(self):
        write_training_log(self.records[:1], self.path)
        append_training_log(self.records[1], self.path)
        self.assertEqual(read_training_log(self.path), self.records)

    def test_invalid_line(self):
        self.path.write_text('{"epoch": 0}\n', encoding='utf-8')
        with self.assertRaises(ConfigError):
            read_training_log(self.path)

    def test_missing_file(self):
        with self.assertRaises(ConfigError):
            read_training_log(self.path)
