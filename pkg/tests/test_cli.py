"""
Tests for the command-line runner.
"""

import dataclasses
import json
import os
import shutil
import tempfile
import unittest
from unittest.mock import patch

import pandas as pd
import toml
from click.testing import CliRunner

from config import APP_VERSION
from src.augment.rng import Rng
from src.cli.commands import cli
from src.cli.run_config import resolve_run_config
from src.model.params import ModelParams, read_checkpoint
from src.numeric import autodiff as ad
from src.utils.errors import ConfigError, NumericalAbortError

TINY_CONFIG = {
    "seed": 4,
    "cohort": {
        "n_anatomies": 2,
        "embed_dim": 8,
        "n_patients": 8,
        "tokens_per_anatomy": 2,
        "sentences_normal": 4,
        "sentences_abnormal": 2,
        "sentences_per_report": 3,
        "abnormal_rate": 0.5,
        "missing_rate": 0.0,
        "pathology_offset_scale": 0.5,
        "sentence_noise_ratio": 1.0,
        "n_templates": 3,
        "template_noise_scale": 0.1,
    },
    "train": {"epochs": 1, "batch_size": 4, "learning_rate": 0.01, "snapshot_patients": 8},
    "eval": {"histogram_bins": 10},
}


class CliTestCase(unittest.TestCase):
    """Shared temp workspace and a runner with logging setup patched out."""

    def setUp(self):
        self.tmp = tempfile.mkdtemp()
        self.addCleanup(shutil.rmtree, self.tmp, ignore_errors=True)
        patcher = patch("src.cli.commands.setup_logging")
        patcher.start()
        self.addCleanup(patcher.stop)
        self.runner = CliRunner()
        self.config_path = self.write_config(TINY_CONFIG)

    def write_config(self, payload, name="run.toml"):
        path = os.path.join(self.tmp, name)
        with open(path, "w") as f:
            toml.dump(payload, f)
        return path

    def out(self, name):
        return os.path.join(self.tmp, name)

    def invoke(self, *args, config=None):
        return self.runner.invoke(cli, ["--config", config or self.config_path, *args])

    def synth(self, name="synth"):
        result = self.invoke("--out", self.out(name), "synth")
        self.assertEqual(result.exit_code, 0, result.output)
        return os.path.join(self.out(name), "cohort.jsonl")

    def trained_checkpoint(self, cohort_path, *flags, name="train"):
        result = self.invoke("--out", self.out(name), "train", cohort_path, *flags)
        self.assertEqual(result.exit_code, 0, result.output)
        return os.path.join(self.out(name), "checkpoint.json")

    def read(self, *parts):
        with open(os.path.join(self.tmp, *parts)) as f:
            return f.read()


class TestRunConfig(unittest.TestCase):

    def test_flags_override_the_file(self):
        tmp = tempfile.mkdtemp()
        path = os.path.join(tmp, "run.toml")
        with open(path, "w") as f:
            toml.dump({"seed": 2, "train": {"epochs": 7, "lambda": 0.5}}, f)
        cfg = resolve_run_config(path, seed=9, train_overrides={"epochs": 3, "batch_size": None})
        self.assertEqual((cfg.seed, cfg.cohort.seed, cfg.train.seed), (9, 9, 9))
        self.assertEqual(cfg.train.epochs, 3)
        self.assertEqual(cfg.train.lam, 0.5)
        self.assertIn("lambda = 0.5", cfg.to_toml())
        shutil.rmtree(tmp)

    def test_invalid_toml(self):
        tmp = tempfile.mkdtemp()
        path = os.path.join(tmp, "broken.toml")
        with open(path, "w") as f:
            f.write("seed = [\n")
        with self.assertRaises(ConfigError):
            resolve_run_config(path)
        shutil.rmtree(tmp)


class TestSynthCommand(CliTestCase):
    """Test cases for `synth`."""

    def test_writes_cohort_and_manifest(self):
        result = self.invoke("--out", self.out("a"), "synth")
        self.assertEqual(result.exit_code, 0, result.output)
        self.assertIn("# synth effective configuration", result.stdout)
        self.assertIn("n_patients = 8", result.stdout)
        manifest = json.loads(self.read("a", "manifest.json"))
        self.assertEqual(manifest["command"], "synth")
        self.assertEqual(manifest["outputs"], ["cohort.jsonl"])
        self.assertEqual(manifest["version"], APP_VERSION)

    def test_same_config_gives_identical_files(self):
        self.synth("a")
        self.synth("b")
        self.assertEqual(self.read("a", "cohort.jsonl"), self.read("b", "cohort.jsonl"))

    def test_dry_run_writes_nothing(self):
        result = self.invoke("--out", self.out("dry"), "--dry-run", "synth")
        self.assertEqual(result.exit_code, 0, result.output)
        self.assertFalse(os.path.exists(self.out("dry")))

    def test_dry_run_does_not_generate(self):
        with patch("src.cli.commands.generate_cohort") as generate:
            result = self.invoke("--out", self.out("dry"), "--dry-run", "synth")
        self.assertEqual(result.exit_code, 0, result.output)
        generate.assert_not_called()

    def test_dry_run_rejects_embed_dim_below_anatomy_count(self):
        config = dict(TINY_CONFIG, cohort=dict(TINY_CONFIG["cohort"], embed_dim=1))
        result = self.invoke("--dry-run", "synth", config=self.write_config(config, "thin.toml"))
        self.assertEqual(result.exit_code, 2)
        self.assertIn("embed_dim", result.output)

    def test_zero_patients_is_a_usage_error(self):
        config = dict(TINY_CONFIG, cohort=dict(TINY_CONFIG["cohort"], n_patients=0))
        result = self.invoke("--out", self.out("bad"), "synth", config=self.write_config(config, "bad.toml"))
        self.assertEqual(result.exit_code, 2)
        self.assertIn("n_patients", result.output)

    def test_unknown_config_key(self):
        config = dict(TINY_CONFIG, cohort=dict(TINY_CONFIG["cohort"], n_organs=3))
        result = self.invoke("synth", config=self.write_config(config, "typo.toml"))
        self.assertEqual(result.exit_code, 2)

    def test_version(self):
        result = self.runner.invoke(cli, ["--version"])
        self.assertEqual(result.exit_code, 0)
        self.assertIn(APP_VERSION, result.output)


class TestTrainCommand(CliTestCase):
    """Test cases for `train`."""

    def test_outputs(self):
        cohort_path = self.synth()
        self.trained_checkpoint(cohort_path)
        trace = [json.loads(line) for line in self.read("train", "trace.jsonl").splitlines()]
        self.assertEqual(len(trace), 2)
        self.assertIn("loss_global", trace[0])
        snapshots = json.loads(self.read("train", "snapshots.json"))
        self.assertEqual(set(snapshots), {"clip_events", "snapshots"})
        manifest = json.loads(self.read("train", "manifest.json"))
        self.assertEqual(sorted(manifest["outputs"]), ["checkpoint.json", "snapshots.json", "trace.jsonl"])
        self.assertIn(cohort_path, manifest["inputs"])

    def test_zero_epochs_writes_the_initialization(self):
        cohort_path = self.synth()
        checkpoint = self.trained_checkpoint(cohort_path, "--epochs", "0")
        params, pooling = read_checkpoint(checkpoint)
        self.assertEqual(pooling, "positional")
        self.assertTrue(params.equals(ModelParams.initialize(2, 8, Rng(4, stream=(0,)))))
        self.assertEqual(self.read("train", "trace.jsonl"), "")

    def test_no_global(self):
        cohort_path = self.synth()
        self.trained_checkpoint(cohort_path, "--no-global", "--pooling", "mean")
        for line in self.read("train", "trace.jsonl").splitlines():
            self.assertNotIn("loss_global", json.loads(line))
        self.assertEqual(read_checkpoint(os.path.join(self.out("train"), "checkpoint.json"))[1], "mean")

    def test_numerical_abort(self):
        cohort_path = self.synth()
        error = NumericalAbortError(2, {"w_visual": 1.5})
        with patch("src.cli.commands.train", side_effect=error):
            result = self.invoke("--out", self.out("nan"), "train", cohort_path)
        self.assertEqual(result.exit_code, 3)
        payload = json.loads(next(line for line in result.stdout.splitlines() if line.startswith('{"error"')))
        self.assertEqual(payload["step"], 2)
        self.assertEqual(payload["parameter_norms"], {"w_visual": 1.5})

    def test_batch_larger_than_cohort(self):
        cohort_path = self.synth()
        result = self.invoke("--out", self.out("big"), "train", cohort_path, "--batch-size", "9")
        self.assertEqual(result.exit_code, 2)

    def test_corrupt_cohort(self):
        path = os.path.join(self.tmp, "broken.jsonl")
        with open(path, "w") as f:
            f.write("{}\n")
        result = self.invoke("--out", self.out("x"), "train", path)
        self.assertEqual(result.exit_code, 2)
        self.assertIn(path, result.output)

    def test_non_utf8_cohort(self):
        path = os.path.join(self.tmp, "binary.jsonl")
        with open(path, "wb") as f:
            f.write(b'{"format": "\xff\xfe"}\n')
        result = self.invoke("--out", self.out("x"), "train", path)
        self.assertEqual(result.exit_code, 2)
        self.assertIn("UTF-8", result.output)


class TestEvalAndDiagnose(CliTestCase):
    """Test cases for `eval` and `diagnose`."""

    def setUp(self):
        super().setUp()
        self.cohort_path = self.synth()
        self.checkpoint = self.trained_checkpoint(self.cohort_path)

    def test_eval_outputs_are_reproducible(self):
        for name in ("e1", "e2"):
            result = self.invoke("--out", self.out(name), "eval", self.cohort_path, self.checkpoint)
            self.assertEqual(result.exit_code, 0, result.output)
        self.assertEqual(self.read("e1", "metrics.json"), self.read("e2", "metrics.json"))
        metrics = json.loads(self.read("e1", "metrics.json"))
        self.assertEqual(set(metrics["per_class"]), {"0", "1"})
        scores = pd.read_csv(os.path.join(self.out("e1"), "scores.csv"))
        self.assertEqual(len(scores), 16 * 3)

    def test_eval_threshold_is_echoed(self):
        result = self.invoke("--out", self.out("t"), "eval", self.cohort_path, self.checkpoint, "--threshold", "0.25")
        self.assertEqual(result.exit_code, 0, result.output)
        self.assertIn("threshold = 0.25", result.stdout)
        self.assertEqual(json.loads(self.read("t", "metrics.json"))["threshold"], 0.25)

    def test_missing_checkpoint(self):
        missing = os.path.join(self.tmp, "nope.json")
        result = self.invoke("eval", self.cohort_path, missing)
        self.assertEqual(result.exit_code, 2)
        self.assertIn("nope.json", result.output)

    def test_dimension_mismatch(self):
        config = dict(TINY_CONFIG, cohort=dict(TINY_CONFIG["cohort"], embed_dim=6))
        other = self.write_config(config, "narrow.toml")
        result = self.invoke("--out", self.out("narrow"), "synth", config=other)
        self.assertEqual(result.exit_code, 0, result.output)
        narrow_cohort = os.path.join(self.out("narrow"), "cohort.jsonl")
        result = self.invoke("--out", self.out("mismatch"), "eval", narrow_cohort, self.checkpoint)
        self.assertEqual(result.exit_code, 2)
        self.assertIn("D=8", result.output)

    def test_diagnose_outputs(self):
        result = self.invoke("--out", self.out("d"), "diagnose", self.cohort_path, self.checkpoint)
        self.assertEqual(result.exit_code, 0, result.output)
        summary = json.loads(self.read("d", "diagnostics.json"))
        self.assertEqual(set(summary["collapse_index"]), {"image", "text"})
        for name in ("image", "image_inter", "text", "text_inter"):
            histogram = pd.read_csv(os.path.join(self.out("d"), f"histogram_{name}.csv"))
            self.assertEqual(len(histogram), 10)
        projection = pd.read_csv(os.path.join(self.out("d"), "projection.csv"))
        self.assertEqual(list(projection.columns), ["x", "y", "modality", "anatomy"])


class TestGradcheckCommand(CliTestCase):
    """Test cases for `gradcheck`."""

    ARGS = ("gradcheck", "--configs", "1", "--max-batch", "3", "--max-anatomies", "2", "--max-dim", "4")

    def test_passes(self):
        result = self.invoke("--out", self.out("g"), *self.ARGS)
        self.assertEqual(result.exit_code, 0, result.output)
        self.assertIn("Gradient check passed", result.output)
        self.assertTrue(json.loads(self.read("g", "gradcheck.json"))["passed"])

    def test_sign_flip_is_caught(self):
        flipped = dataclasses.replace(ad.PRIMITIVES["negate"], backward=lambda g, out, values, attrs: (g,))
        with patch.dict(ad.PRIMITIVES, {"negate": flipped}):
            result = self.invoke("--out", self.out("g"), *self.ARGS)
        self.assertEqual(result.exit_code, 1)
        self.assertIn("Gradient check failed", result.output)
        self.assertFalse(json.loads(self.read("g", "gradcheck.json"))["passed"])

    def test_zero_configs_rejected(self):
        result = self.invoke("gradcheck", "--configs", "0")
        self.assertEqual(result.exit_code, 2)


class TestAblationCommand(CliTestCase):

    def test_table(self):
        cohort_path = self.synth()
        result = self.invoke("--out", self.out("ab"), "ablation", cohort_path, "--epochs", "1")
        self.assertEqual(result.exit_code, 0, result.output)
        table = pd.read_csv(os.path.join(self.out("ab"), "ablation.csv"), comment="#")
        self.assertEqual(list(table["configuration"]), ["LCA", "LCA+GCA", "LCA+CTA", "LCA+CTA+GCA"])


if __name__ == "__main__":
    unittest.main()
