"""
Unit tests for the training loop.

Most models here are tiny and train for a handful of epochs to check the loop's
contract. The copy-task convergence run is marked slow.
"""

import csv
from pathlib import Path

import numpy as np
import pytest
import torch

from scrivener.errors import ConfigMismatchError, ConfigValidationError
from scrivener.lm.ngram import fit
from scrivener.models.schemas import TextPair
from scrivener.models.scrivener_config import LossKind, ModelConfig, TrainConfig
from scrivener.text.vocab import encode_target, pair_vocab
from scrivener.training.trainer import HISTORY_COLUMNS, responsibilities, train


def quick_config(**overrides) -> TrainConfig:
    settings = dict(max_epochs=2, batch_size=2, learning_rate=1e-3, dropout=0.0, patience=5, seed=0, max_decode_len=24)
    settings.update(overrides)
    return TrainConfig(**settings)


@pytest.fixture
def vocab(sample_pairs):
    return pair_vocab(sample_pairs)


@pytest.fixture
def lm(sample_pairs, vocab):
    return fit([encode_target(p.teacher, vocab) for p in sample_pairs], order=2, vocab_size=vocab.size)


class TestTrain:
    """Test training runs and model selection."""

    def test_one_epoch_on_two_pairs(self, sample_pairs, vocab, micro_config):
        """Test a minimal run completes with a finite history."""
        model, history = train(sample_pairs[:2], sample_pairs[2:3], vocab, micro_config, quick_config(max_epochs=1))

        assert len(history.rows) == 1
        assert history.best_epoch == 1
        assert torch.isfinite(torch.tensor(history.rows[0].train_loss))
        assert model.config.vocab_size == vocab.size
        assert not model.training

    def test_best_epoch_has_minimum_median(self, sample_pairs, vocab, micro_config):
        """Test the selected epoch is the earliest with the lowest validation median NED."""
        _, history = train(sample_pairs[:4], sample_pairs[4:], vocab, micro_config, quick_config(max_epochs=3))

        medians = [row.val_median_ned for row in history.rows]
        assert history.best_val_median_ned == min(medians)
        assert history.best_epoch == medians.index(min(medians)) + 1

    def test_patience_stops_training(self, sample_pairs, vocab, micro_config):
        """Test a stopped run ends exactly `patience` epochs after its best epoch."""
        _, history = train(sample_pairs[:4], sample_pairs[4:], vocab, micro_config, quick_config(max_epochs=8, patience=1, learning_rate=1e-6))

        if history.stopped_early:
            assert len(history.rows) == history.best_epoch + 1
        else:
            assert len(history.rows) == 8

    def test_reproducible_under_seed(self, sample_pairs, vocab, micro_config):
        """Test two runs with the same seed give identical weights and history."""
        config = quick_config(max_epochs=1, dropout=0.1)

        first, first_history = train(sample_pairs[:4], sample_pairs[4:], vocab, micro_config, config)
        second, second_history = train(sample_pairs[:4], sample_pairs[4:], vocab, micro_config, config)

        assert first_history == second_history
        first_state, second_state = first.state_dict(), second.state_dict()
        assert all(torch.equal(first_state[name], second_state[name]) for name in first_state)

    def test_history_csv(self, sample_pairs, vocab, micro_config, workspace):
        """Test the history file has one row per epoch."""
        path = workspace / "history.csv"

        _, history = train(sample_pairs[:4], sample_pairs[4:], vocab, micro_config, quick_config(), history_path=path)

        with path.open(encoding="utf-8") as f:
            rows = list(csv.DictReader(f))
        assert list(rows[0]) == HISTORY_COLUMNS
        assert len(rows) == len(history.rows)
        assert rows[0]["mean_responsibility_clean"] == ""

    def test_robust_records_responsibilities(self, sample_pairs, vocab, lm, micro_config):
        """Test robust training reports mean responsibilities split by the noisy flag."""
        pairs = [TextPair(student=p.student, teacher=p.teacher, noisy=(i == 0)) for i, p in enumerate(sample_pairs[:4])]
        config = quick_config(max_epochs=1, loss=LossKind.ROBUST, lm_path=Path("unused.lm"))

        _, history = train(pairs, sample_pairs[4:], vocab, micro_config, config, lm=lm)

        row = history.rows[0]
        assert 0.0 <= row.mean_responsibility_clean <= 1.0
        assert 0.0 <= row.mean_responsibility_noisy <= 1.0

    def test_robust_without_lm(self, sample_pairs, vocab, micro_config):
        """Test the robust loss needs a fitted language model."""
        config = quick_config(loss=LossKind.ROBUST, lm_path=Path("missing.lm"))

        with pytest.raises(ConfigValidationError):
            train(sample_pairs[:4], sample_pairs[4:], vocab, micro_config, config)

    def test_robust_config_needs_lm_path(self):
        """Test TrainConfig rejects the robust loss without lm_path."""
        with pytest.raises(ValueError):
            TrainConfig(loss=LossKind.ROBUST)

    def test_lm_vocab_mismatch(self, sample_pairs, vocab, micro_config):
        """Test a language model over another vocabulary is rejected."""
        other = fit([[4, 2]], order=2, vocab_size=vocab.size + 1)
        config = quick_config(loss=LossKind.ROBUST, lm_path=Path("other.lm"))

        with pytest.raises(ConfigMismatchError):
            train(sample_pairs[:4], sample_pairs[4:], vocab, micro_config, config, lm=other)

    def test_init_model_vocab_mismatch(self, sample_pairs, vocab, micro_config):
        """Test fine-tuning requires the same vocabulary size."""
        from scrivener.seq2seq.model import init_params

        init_model = init_params(micro_config.with_vocab_size(vocab.size + 2), seed=0)

        with pytest.raises(ConfigMismatchError):
            train(sample_pairs[:4], sample_pairs[4:], vocab, micro_config, quick_config(), init_model=init_model)

    def test_empty_pairs(self, vocab, micro_config):
        """Test training needs data."""
        with pytest.raises(ValueError):
            train([], [], vocab, micro_config, quick_config())


class TestResponsibilities:
    """Test posterior clean-pair probabilities."""

    def test_values_in_unit_interval(self, sample_pairs, vocab, lm, micro_config):
        """Test one responsibility per pair, each in [0, 1]."""
        from scrivener.seq2seq.model import init_params

        model = init_params(micro_config.with_vocab_size(vocab.size), seed=0)

        values = responsibilities(model, sample_pairs, vocab, lm, alpha=0.25)

        assert len(values) == len(sample_pairs)
        assert all(0.0 <= w <= 1.0 for w in values)

    def test_alpha_zero_all_clean(self, sample_pairs, vocab, lm, micro_config):
        """Test alpha=0 makes every pair clean."""
        from scrivener.seq2seq.model import init_params

        model = init_params(micro_config.with_vocab_size(vocab.size), seed=0)

        assert responsibilities(model, sample_pairs, vocab, lm, alpha=0.0) == pytest.approx([1.0] * len(sample_pairs))

    def test_trained_model_doubts_mismatched_pairs(self, micro_config):
        """Test a robust model trained on a copy task gives a mismatched source a lower clean-responsibility than the matching one."""
        rng = np.random.default_rng(11)
        words = ["".join(rng.choice(list("abcd"), size=int(rng.integers(3, 7)))) for _ in range(40)]
        train_pairs = [TextPair(student=w, teacher=w) for w in words[:28]]
        held_out = words[28:]
        vocab = pair_vocab(train_pairs + [TextPair(student=w, teacher=w) for w in held_out])
        lm = fit([encode_target(w, vocab) for w in words[:28]], order=2, vocab_size=vocab.size)
        config = quick_config(max_epochs=20, patience=20, batch_size=4, learning_rate=3e-3, loss=LossKind.ROBUST, alpha=0.25, lm_path=Path("copy.lm"))

        model, _ = train(train_pairs, train_pairs[:4], vocab, micro_config, config, lm=lm)

        matching = [TextPair(student=w, teacher=w) for w in held_out]
        mismatched = [TextPair(student=held_out[(i + 1) % len(held_out)], teacher=w) for i, w in enumerate(held_out)]
        clean_w = responsibilities(model, matching, vocab, lm, alpha=0.25)
        noisy_w = responsibilities(model, mismatched, vocab, lm, alpha=0.25)
        assert np.mean(noisy_w) < np.mean(clean_w)


@pytest.mark.slow
class TestCopyTask:
    """Test the model can learn to copy its input."""

    def test_converges_within_thirty_epochs(self):
        """Test validation median NED reaches 0.05 on a character copy task."""
        rng = np.random.default_rng(5)
        words = ["".join(rng.choice(list("abcdef"), size=int(rng.integers(3, 9)))) for _ in range(420)]
        pairs = [TextPair(student=w, teacher=w) for w in words]
        vocab = pair_vocab(pairs)
        model_config = ModelConfig(d_model=64, n_heads=4, n_encoder_layers=2, n_decoder_layers=2, d_ffn=128, max_seq_len=16, dropout_rate=0.0)
        config = quick_config(max_epochs=30, patience=30, batch_size=8, learning_rate=1e-3, max_decode_len=12)

        _, history = train(pairs[:400], pairs[400:], vocab, model_config, config)

        assert history.best_val_median_ned <= 0.05
