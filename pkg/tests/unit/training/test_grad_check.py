"""
Unit tests for finite-difference gradient checking.
"""

import pytest
import torch

from scrivener.models.scrivener_config import LossKind, ModelConfig
from scrivener.seq2seq.model import init_params
from scrivener.training.grad_check import micro_config, relative_error, grad_check
from scrivener.training.losses import backward, robust_nll, smoothed_ce_loss


class TestGradCheck:
    """Test analytic gradients against central differences."""

    def test_micro_config(self):
        """Test the micro model is d_model 8 with one layer each and no dropout."""
        config = micro_config(ModelConfig())

        assert (config.d_model, config.n_encoder_layers, config.n_decoder_layers, config.dropout_rate) == (8, 1, 1, 0.0)

    def test_smoothed_ce_passes(self):
        """Test the smoothed loss gradients agree within 1e-4."""
        report = grad_check(ModelConfig(), LossKind.SMOOTHED_CE)

        assert report.passed, report.failures
        assert report.checked >= 200
        assert report.max_relative_error < 1e-4

    def test_robust_passes(self):
        """Test the robust loss gradients (alpha 0.25) agree within 1e-4."""
        report = grad_check(ModelConfig(), LossKind.ROBUST, alpha=0.25)

        assert report.passed, report.failures
        assert report.max_relative_error < 1e-4

    def test_impossible_tolerance_lists_failures(self):
        """Test a zero tolerance reports failing tensors by name."""
        report = grad_check(ModelConfig(), LossKind.SMOOTHED_CE, tolerance=0.0, n_samples=20)

        assert not report.passed
        assert all(entry.tensor_name for entry in report.failures)

    def test_relative_error_floor(self):
        """Test tiny gradients are compared on an absolute scale."""
        assert relative_error(0.0, 0.0) == 0.0
        assert relative_error(1e-9, 2e-9) == pytest.approx(1e-9 / 1e-5)
        assert relative_error(2.0, 1.0) == pytest.approx(0.5)

    def test_robust_alpha_zero_matches_plain_ce(self):
        """Test robust gradients at alpha=0 equal eps=0 cross-entropy gradients."""
        config = micro_config(ModelConfig())
        generator = torch.Generator().manual_seed(0)
        src = torch.randint(4, config.vocab_size, (2, 5), generator=generator)
        tgt_in = torch.randint(4, config.vocab_size, (2, 4), generator=generator)
        tgt_out = torch.randint(4, config.vocab_size, (2, 4), generator=generator)

        model = init_params(config, seed=1, dtype=torch.float64)
        robust = {k: v.clone() for k, v in backward(robust_nll(model(src, tgt_in), tgt_out, -3.0, 0.0).loss, model).items()}
        plain = backward(smoothed_ce_loss(model(src, tgt_in), tgt_out, 0.0).loss, model)

        for name in plain:
            assert torch.allclose(robust[name], plain[name], atol=1e-8), name
