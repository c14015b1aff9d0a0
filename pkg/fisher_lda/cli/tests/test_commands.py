# fisher_lda/cli/tests/test_commands.py
import io
import json
import tempfile
from contextlib import redirect_stderr, redirect_stdout
from pathlib import Path
from unittest import TestCase, mock

import numpy as np
from numpy.testing import assert_array_equal

from fisher_lda.cli.standalone_runner import main
from fisher_lda.dataset.descriptors import read_descriptor_file
from fisher_lda.dataset.manifest import read_manifest
from fisher_lda.exceptions import DivergenceError
from fisher_lda.trainer.checkpoint import read_checkpoint
from fisher_lda.trainer.fit import init_state
from fisher_lda.trainer.training_log import read_training_log

TINY_CONFIG = {
    "manifest": "run/manifest.json",
    "output_dir": "run",
    "synth_num_ids": 4,
    "synth_per_id": 4,
    "synth_dim": 8,
    "synth_descriptors_per_image": 16,
    "channels": [{"name": "default", "pca_dim": 4, "num_components": 2}],
    "hidden_widths": [16, 8],
    "dropout_rate": 0.0,
    "batch_size": 8,
    "lr_init": 0.01,
    "epochs": 2,
    "gmm_update_period_epochs": 1,
    "em_max_iters": 20,
    "eval_trials": 2,
}


@mock.patch("fisher_lda.cli.standalone_runner.setup_logging")
class CommandsTestCase(TestCase):
    """Test cases for the synth, train, encode and eval commands through the runner."""

    def setUp(self):
        self.temp_dir = tempfile.TemporaryDirectory()
        self.base = Path(self.temp_dir.name)
        self.out = self.base / "run"

    def tearDown(self):
        self.temp_dir.cleanup()

    def write_config(self, **overrides):
        path = self.base / "config.json"
        path.write_text(json.dumps({**TINY_CONFIG, **overrides}), encoding='utf-8')
        return str(path)

    def run_main(self, *argv):
        stdout, stderr = io.StringIO(), io.StringIO()
        with redirect_stdout(stdout), redirect_stderr(stderr):
            code = main(list(argv))
        return code, stdout.getvalue(), stderr.getvalue()

    def test_missing_manifest(self, mock_setup_logging):
        code, _, stderr = self.run_main("train", "--config", self.write_config())
        self.assertEqual(code, 2)
        self.assertIn("manifest.json", stderr)

    def test_missing_config(self, mock_setup_logging):
        code, _, stderr = self.run_main("train", "--config", str(self.base / "absent.json"))
        self.assertEqual(code, 2)
        self.assertIn("absent.json", stderr)

    def test_synth_train_encode_eval(self, mock_setup_logging):
        config = self.write_config()
        self.assertEqual(self.run_main("synth", "--config", config)[0], 0)
        manifest = read_manifest(self.out / "manifest.json")
        self.assertEqual(len(manifest.entries), 16)
        self.assertEqual(len(manifest.split("test")), 8)
        self.assertEqual({e.label for e in manifest.split("train")}, {0, 1})
        self.assertEqual({e.label for e in manifest.split("test")}, {2, 3})
        self.assertEqual({e.camera_id for e in manifest.split("test")}, {0, 1})

        self.assertEqual(self.run_main("train", "--config", config)[0], 0)
        state = read_checkpoint(self.out / "checkpoint.dlfc")
        self.assertEqual(state.epoch, 2)
        self.assertEqual(len(read_training_log(self.out / "training_log.ndjson")), 2)
        run_manifest = json.loads((self.out / "run_manifest.json").read_text(encoding='utf-8'))
        self.assertEqual(run_manifest["seed"], 0)
        self.assertEqual(len(run_manifest["config_hash"]), 64)
        self.assertIn("numpy", run_manifest["versions"])

        code, _, _ = self.run_main("encode", "--config", config, "--ids", "p0000_02", "p0000_02")
        self.assertEqual(code, 0)
        embedding = read_descriptor_file(self.out / "embeddings" / "p0000_02.dfv")
        self.assertEqual(embedding.shape, (1, 8))

        code, stdout, _ = self.run_main("eval", "--config", config)
        self.assertEqual(code, 0)
        summary = json.loads(stdout.strip().splitlines()[-1])
        self.assertEqual(set(summary), {"rank1", "rank5", "rank10", "rank20", "mAP"})
        report = json.loads((self.out / "eval_report.json").read_text(encoding='utf-8'))
        self.assertEqual(report["summary"], summary)
        self.assertAlmostEqual(report["cmc"][0], summary["rank1"])
        self.assertTrue((self.out / "cmc.csv").exists())

        code, stdout_again, _ = self.run_main("eval", "--config", config)
        self.assertEqual(stdout_again, stdout)

        code, stdout, _ = self.run_main("eval", "--config", config, "--self-gallery")
        self.assertEqual(code, 0)
        self.assertEqual(json.loads(stdout)["rank1"], 1.0)

    def test_zero_epochs_checkpoint(self, mock_setup_logging):
        config = self.write_config(epochs=0)
        self.run_main("synth", "--config", config)
        self.assertEqual(self.run_main("train", "--config", config)[0], 0)
        state = read_checkpoint(self.out / "checkpoint.dlfc")
        self.assertEqual(state.epoch, 0)
        self.assertEqual(state.gmms[0].num_components, 2)
        self.assertEqual(read_training_log(self.out / "training_log.ndjson"), [])

    def test_encode_unknown_and_empty_ids(self, mock_setup_logging):
        config = self.write_config(epochs=0)
        self.run_main("synth", "--config", config)
        self.run_main("train", "--config", config)

        self.assertEqual(self.run_main("encode", "--config", config)[0], 0)
        self.assertFalse((self.out / "embeddings").exists())
        self.assertEqual(self.run_main("encode", "--config", config, "--ids", "nobody")[0], 3)

    def test_encode_same_id_twice_identical(self, mock_setup_logging):
        config = self.write_config(epochs=0)
        self.run_main("synth", "--config", config)
        self.run_main("train", "--config", config)
        self.run_main("encode", "--config", config, "--ids", "p0001_03")
        first = read_descriptor_file(self.out / "embeddings" / "p0001_03.dfv")
        self.run_main("encode", "--config", config, "--ids", "p0001_03")
        assert_array_equal(read_descriptor_file(self.out / "embeddings" / "p0001_03.dfv"), first)

    def test_divergence_dump(self, mock_setup_logging):
        config = self.write_config()
        self.run_main("synth", "--config", config)

        def diverge(train_config, descriptor_sets):
            raise DivergenceError("loss became NaN", init_state(train_config, descriptor_sets))

        with mock.patch("fisher_lda.cli.commands.fit_descriptor_sets", side_effect=diverge):
            code, _, stderr = self.run_main("train", "--config", config)
        self.assertEqual(code, 5)
        self.assertIn("NaN", stderr)
        self.assertTrue((self.out / "divergence_dump.dlfc").exists())

    def test_seed_override(self, mock_setup_logging):
        config = self.write_config(epochs=0)
        self.run_main("synth", "--config", config, "--seed", "3")
        self.assertEqual(self.run_main("train", "--config", config, "--seed", "3")[0], 0)
        self.assertEqual(read_checkpoint(self.out / "checkpoint.dlfc").seed, 3)
        self.assertTrue(np.isfinite(read_checkpoint(self.out / "checkpoint.dlfc").gmms[0].means).all())
