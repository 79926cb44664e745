"""
End-to-end runs of the CLI on a tiny corpus and a tiny model.

The workflow tests chain the individual subcommands the way a user would;
the pipeline test runs the whole experiment in one call.
"""

import json
from pathlib import Path

import pytest

from scrivener.cli.main import run
from scrivener.constants import ExitCodes
from scrivener.seq2seq.checkpoint import load_checkpoint

CORPUS = [
    "The dog runs.",
    "I like my cat.",
    "We play in the park.",
    "My mum is nice.",
    "The sun is hot.",
    "I can see a bird.",
    "We went to the shop.",
    "The fish can swim.",
    "I love my dad.",
    "The tree is big.",
    "We ate some cake.",
    "My bike is red.",
    "The cow says moo.",
    "I read a book.",
    "The bus is late.",
    "We like the snow.",
    "My hat is blue.",
    "The frog can jump.",
    "I have a pen.",
    "The moon is up.",
]

TINY_CONFIG = """
model:
  d_model: 16
  n_heads: 2
  n_encoder_layers: 1
  n_decoder_layers: 1
  d_ffn: 32
  max_seq_len: 48
  dropout_rate: 0.0
train:
  dropout: 0.0
  batch_size: 4
  max_epochs: 1
  learning_rate: 0.003
  max_decode_len: 12
split:
  ratios: [0.6, 0.2, 0.2]
decoding:
  max_len: 12
calibration:
  bins: 5
  search: "grid"
  grid_points: 8
"""


@pytest.fixture
def tiny_setup(workspace):
    """Corpus file plus a config describing a model small enough for a smoke run."""
    (workspace / "corpus.txt").write_text("\n".join(CORPUS) + "\n", encoding="utf-8")
    (workspace / "tiny.yml").write_text(TINY_CONFIG, encoding="utf-8")
    return workspace


class TestCommandWorkflow:
    """augment -> split -> lm-train -> train -> translate -> eval -> calibrate -> reject-curve."""

    def test_full_workflow(self, tiny_setup):
        """Every stage exits 0 and hands its files to the next."""
        cfg = ["--config", "tiny.yml", "--seed", "1"]
        assert run(["augment", "--texts", "corpus.txt", "--out", "pairs.jsonl", *cfg]) == ExitCodes.SUCCESS
        assert run(["split", "--pairs", "pairs.jsonl", "--out", "data/pairs", *cfg]) == ExitCodes.SUCCESS
        assert run(["lm-train", "--pairs", "data/pairs.train", "--out", "teacher.lm", *cfg]) == ExitCodes.SUCCESS

        assert run(["train", "--train", "data/pairs.train", "--val", "data/pairs.val", "--out", "ce.ckpt", *cfg]) == ExitCodes.SUCCESS
        assert Path("ce.ckpt.history.csv").exists()
        _, config, _ = load_checkpoint(Path("ce.ckpt"))
        assert config.d_model == 16

        assert run(["translate", "--ckpt", "ce.ckpt", "--input", "data/pairs.test", "--out", "pred.jsonl", *cfg]) == ExitCodes.SUCCESS
        assert run(["eval", "--pairs", "data/pairs.test", "--pred", "pred.jsonl", "--out", "metrics", *cfg]) == ExitCodes.SUCCESS
        assert json.loads(Path("metrics.json").read_text(encoding="utf-8"))["n"] == 4

        assert run(["calibrate", "--ckpt", "ce.ckpt", "--val", "data/pairs.val", *cfg]) == ExitCodes.SUCCESS
        assert Path("ce.ckpt.temperature.json").exists()
        assert run(["calib-report", "--ckpt", "ce.ckpt", "--pairs", "data/pairs.test", "--out", "calib.csv", *cfg]) == ExitCodes.SUCCESS
        assert run(["reject-curve", "--pairs", "data/pairs.test", "--pred", "pred.jsonl", "--out", "curve.csv", *cfg]) == ExitCodes.SUCCESS

    def test_robust_training_needs_matching_lm(self, tiny_setup):
        """The robust loss trains with an n-gram model fitted on the same vocabulary."""
        cfg = ["--config", "tiny.yml", "--seed", "2"]
        run(["augment", "--texts", "corpus.txt", "--out", "pairs.jsonl", *cfg])
        run(["lm-train", "--pairs", "pairs.jsonl", "--out", "teacher.lm", *cfg])
        assert run(["train", "--train", "pairs.jsonl", "--val", "pairs.jsonl", "--out", "robust.ckpt", "--loss", "robust", "--lm", "teacher.lm", "--alpha", "0.25", *cfg]) == ExitCodes.SUCCESS

    def test_robust_training_without_lm(self, tiny_setup):
        """Asking for the robust loss without --lm fails validation."""
        cfg = ["--config", "tiny.yml", "--seed", "2"]
        run(["augment", "--texts", "corpus.txt", "--out", "pairs.jsonl", *cfg])
        assert run(["train", "--train", "pairs.jsonl", "--val", "pairs.jsonl", "--out", "r.ckpt", "--loss", "robust", *cfg]) == ExitCodes.DATA_ERROR


class TestExperimentPipeline:
    """The single-call experiment."""

    def test_pipeline_summary(self, tiny_setup):
        """The summary has the Identity row, every trained variant, per-seed noisy rows with their medians and the ensemble."""
        argv = ["pipeline", "--config", "tiny.yml", "--seed", "3", "--corpus", "corpus.txt", "--out", "run", "--ensemble-size", "2", "--noise-rate", "0.25", "--noise-seeds", "2"]
        assert run(argv) == ExitCodes.SUCCESS

        summary = json.loads(Path("run/summary.json").read_text(encoding="utf-8"))
        names = [row["name"] for row in summary["rows"]]
        assert names == [
            "Identity",
            "smoothed_ce",
            "robust",
            "smoothed_ce_noisy_seed3",
            "smoothed_ce_noisy_seed4",
            "smoothed_ce_noisy",
            "robust_noisy_seed3",
            "robust_noisy_seed4",
            "robust_noisy",
            "smoothed_ce_temperature",
            "ensemble_2",
        ]
        assert summary["sizes"] == {"train": 12, "validation": 4, "test": 4}
        assert summary["noise_seeds"] == [3, 4]
        assert summary["temperature"] > 0

        rows = {row["name"]: row for row in summary["rows"]}
        assert rows["Identity"]["ece"] is None
        assert rows["Identity"]["mean_ned"] > 0
        for row in summary["rows"][1:]:
            assert row["ece"] is not None
            assert row["ned_at_rejection"] is not None

        robust_seeds = [rows["robust_noisy_seed3"]["mean_ed"], rows["robust_noisy_seed4"]["mean_ed"]]
        assert rows["robust_noisy"]["seeds"] == [3, 4]
        assert min(robust_seeds) <= rows["robust_noisy"]["mean_ed"] <= max(robust_seeds)

        temperature_row = rows["smoothed_ce_temperature"]
        assert temperature_row["val_ece_before"] == summary["val_ece_before"]
        assert temperature_row["val_ece_after"] == summary["val_ece_after"]
        assert 0.0 <= summary["val_ece_after"] <= 1.0

        markdown = Path("run/summary.md").read_text(encoding="utf-8")
        assert "| Identity |" in markdown
        assert "Validation ECE:" in markdown
        assert Path("run/run.jsonl").exists()
        assert Path("run/checkpoints/smoothed_ce.ckpt").exists()
        assert Path("run/checkpoints/robust_noisy_seed4.ckpt").exists()

    def test_pipeline_needs_corpus(self, tiny_setup):
        """Without a corpus the pipeline refuses to start."""
        assert run(["pipeline", "--config", "tiny.yml", "--seed", "3"]) == ExitCodes.DATA_ERROR


@pytest.mark.slow
class TestReproducibility:
    """Training is a pure function of data, config and seed."""

    def test_same_seed_same_checkpoint(self, tiny_setup):
        """Two runs with one seed produce byte-identical checkpoints."""
        cfg = ["--config", "tiny.yml", "--seed", "5"]
        run(["augment", "--texts", "corpus.txt", "--out", "pairs.jsonl", *cfg])
        for name in ("a.ckpt", "b.ckpt"):
            assert run(["train", "--train", "pairs.jsonl", "--val", "pairs.jsonl", "--out", name, "--epochs", "3", *cfg]) == ExitCodes.SUCCESS
        assert Path("a.ckpt").read_bytes() == Path("b.ckpt").read_bytes()

    def test_pipeline_rerun_is_identical(self, tiny_setup):
        """Re-running the experiment with one seed reproduces checkpoints and reports byte for byte."""
        for out in ("run_a", "run_b"):
            argv = ["pipeline", "--config", "tiny.yml", "--seed", "8", "--corpus", "corpus.txt", "--out", out, "--ensemble-size", "2"]
            assert run(argv) == ExitCodes.SUCCESS

        for relative in ("summary.json", "summary.md", "checkpoints/smoothed_ce.ckpt", "checkpoints/robust_noisy_seed8.ckpt", "translations/ensemble.jsonl"):
            assert (Path("run_a") / relative).read_bytes() == (Path("run_b") / relative).read_bytes()

    def test_training_loss_falls(self, tiny_setup):
        """Several epochs on a small corpus lower the training loss."""
        cfg = ["--config", "tiny.yml", "--seed", "6"]
        run(["augment", "--texts", "corpus.txt", "--out", "pairs.jsonl", *cfg])
        assert run(["train", "--train", "pairs.jsonl", "--val", "pairs.jsonl", "--out", "m.ckpt", "--epochs", "15", "--patience", "15", *cfg]) == ExitCodes.SUCCESS

        lines = Path("m.ckpt.history.csv").read_text(encoding="utf-8").splitlines()
        header = lines[0].split(",")
        losses = [float(line.split(",")[header.index("train_loss")]) for line in lines[1:]]
        assert losses[-1] < losses[0]
