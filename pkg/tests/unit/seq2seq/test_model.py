"""
Unit tests for the encoder-decoder Transformer.
"""

import math

import pytest
import torch

from scrivener.errors import SequenceTooLongError
from scrivener.models.scrivener_config import ModelConfig
from scrivener.seq2seq.model import Seq2SeqTransformer, forward, init_params

K = 12
SOURCE = [4, 5, 6, 7, 8, 2]
PREFIX = [1, 9, 10, 11, 4]


@pytest.fixture
def config(micro_config) -> ModelConfig:
    return micro_config.with_vocab_size(K)


@pytest.fixture
def model(config) -> Seq2SeqTransformer:
    return init_params(config, seed=0)


class TestModelConfig:
    """Test architecture validation."""

    def test_heads_must_divide_width(self):
        """Test d_model must be a multiple of n_heads."""
        with pytest.raises(ValueError):
            ModelConfig(d_model=10, n_heads=3)

    def test_dropout_below_one(self):
        """Test dropout_rate must be < 1."""
        with pytest.raises(ValueError):
            ModelConfig(dropout_rate=1.0)

    def test_counts_positive(self):
        """Test layer counts must be at least one."""
        with pytest.raises(ValueError):
            ModelConfig(n_encoder_layers=0)


class TestInitParams:
    """Test deterministic initialisation."""

    def test_same_seed_identical(self, config):
        """Test the same seed gives bitwise-identical tensors."""
        first = init_params(config, seed=7).state_dict()
        second = init_params(config, seed=7).state_dict()

        assert all(torch.equal(first[name], second[name]) for name in first)

    def test_different_seeds_differ(self, config):
        """Test a different seed changes at least one tensor."""
        first = init_params(config, seed=1).state_dict()
        second = init_params(config, seed=2).state_dict()

        assert any(not torch.equal(first[name], second[name]) for name in first)

    def test_biases_zero_and_norm_scales_one(self, model):
        """Test vectors start at 0, except layer-norm scales at 1."""
        for name, param in model.named_parameters():
            if param.dim() >= 2:
                continue
            if "norm" in name and name.endswith("weight"):
                assert torch.all(param == 1.0), name
            else:
                assert torch.all(param == 0.0), name

    def test_matrices_within_bound(self, model):
        """Test matrix entries lie within sqrt(6 / (fan_in + fan_out))."""
        for name, param in model.named_parameters():
            if param.dim() < 2:
                continue
            bound = math.sqrt(6.0 / (param.shape[0] + param.shape[1]))
            assert param.abs().max().item() <= bound + 1e-6, name

    def test_embedding_tied_to_output(self, model):
        """Test no separate output projection matrix exists."""
        names = [name for name, _ in model.named_parameters()]

        assert "output_bias" in names
        assert not any("output_proj" in name or "lm_head" in name for name in names)

    def test_float64_mode(self, config):
        """Test the model can be built in 64-bit."""
        model = init_params(config, seed=0, dtype=torch.float64)

        assert all(p.dtype == torch.float64 for p in model.parameters())


class TestForward:
    """Test single-sequence forward passes."""

    def test_output_shape(self, model):
        """Test logits have shape (|y_prefix|, K)."""
        assert forward(model, SOURCE, PREFIX).shape == (len(PREFIX), K)

    def test_eval_is_deterministic(self, model):
        """Test two eval calls return identical logits."""
        assert torch.equal(forward(model, SOURCE, PREFIX), forward(model, SOURCE, PREFIX))

    def test_rows_are_distributions(self, model):
        """Test every softmax row sums to one."""
        probs = torch.softmax(forward(model, SOURCE, PREFIX).double(), dim=-1)

        assert torch.allclose(probs.sum(dim=-1), torch.ones(len(PREFIX), dtype=torch.float64), atol=1e-9)

    def test_zero_params_emit_output_bias(self, model):
        """Test with every weight zero the logits equal the output bias."""
        with torch.no_grad():
            for param in model.parameters():
                param.zero_()
            model.output_bias.copy_(torch.arange(K, dtype=torch.float32))

        logits = forward(model, SOURCE, PREFIX)

        assert torch.equal(logits, torch.arange(K, dtype=torch.float32).expand(len(PREFIX), K))

    def test_zero_params_uniform(self, model):
        """Test all-zero parameters give a uniform distribution."""
        with torch.no_grad():
            for param in model.parameters():
                param.zero_()

        probs = torch.softmax(forward(model, SOURCE, PREFIX), dim=-1)

        assert torch.allclose(probs, torch.full_like(probs, 1.0 / K))

    def test_causal(self, model):
        """Test row i ignores prefix tokens after position i."""
        base = forward(model, SOURCE, PREFIX)
        perturbed = forward(model, SOURCE, PREFIX[:2] + [5, 6, 7])

        assert torch.allclose(base[:2], perturbed[:2], atol=1e-6)
        assert not torch.allclose(base[2:], perturbed[2:])

    def test_encoder_sees_every_source_position(self, model):
        """Test changing the last source token changes the first output row."""
        base = forward(model, SOURCE, PREFIX)
        perturbed = forward(model, SOURCE[:-2] + [11, 2], PREFIX)

        assert not torch.allclose(base[0], perturbed[0])

    def test_finite_at_max_length(self, model, config):
        """Test logits are finite for sequences of max_seq_len tokens."""
        long = [4 + i % (K - 4) for i in range(config.max_seq_len)]

        assert torch.isfinite(forward(model, long, long)).all()

    def test_too_long_source(self, model, config):
        """Test sources over max_seq_len raise SequenceTooLongError."""
        with pytest.raises(SequenceTooLongError):
            forward(model, [4] * (config.max_seq_len + 1), PREFIX)

    def test_too_long_prefix(self, model, config):
        """Test prefixes over max_seq_len raise SequenceTooLongError."""
        with pytest.raises(SequenceTooLongError):
            forward(model, SOURCE, [1] * (config.max_seq_len + 1))

    def test_train_mode_seeded_dropout(self, config):
        """Test a seeded train-mode call is reproducible and differs from eval."""
        model = init_params(config.with_dropout(0.5), seed=0)

        first = forward(model, SOURCE, PREFIX, mode="train", seed=3)
        second = forward(model, SOURCE, PREFIX, mode="train", seed=3)
        evaluated = forward(model, SOURCE, PREFIX, mode="eval")

        assert torch.equal(first, second)
        assert not torch.allclose(first, evaluated)
        assert not model.training

    def test_padding_does_not_change_logits(self, model):
        """Test a PAD-extended source in a batch gives the same logits."""
        src = torch.tensor([SOURCE, SOURCE[:3] + [2, 0, 0]])
        tgt = torch.tensor([PREFIX, PREFIX])
        model.eval()

        with torch.no_grad():
            batched = model(src, tgt)

        single = forward(model, SOURCE[:3] + [2], PREFIX)
        assert torch.allclose(batched[1], single, atol=1e-5)
