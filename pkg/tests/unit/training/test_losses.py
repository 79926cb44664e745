"""
Unit tests for the training objectives and reverse-mode gradients.
"""

import math

import pytest
import torch
from torch import nn
import torch.nn.functional as F

from scrivener.errors import DegenerateLikelihoodError, NonFiniteGradientError
from scrivener.training.losses import backward, robust_nll, smoothed_ce_loss


def logits_of(*rows):
    """(1, T, K) float64 logits from T rows."""
    return torch.tensor([rows], dtype=torch.float64)


def uniform_quarter():
    """One position over K=4 with uniform logits: log-likelihood ln 0.25."""
    return logits_of([0.0, 0.0, 0.0, 0.0]), torch.tensor([[1]])


class TestSmoothedCrossEntropy:
    """Test label-smoothed cross-entropy."""

    def test_uniform_logits_give_ln_k(self):
        """Test K=2, logits (0, 0), eps 0.1 gives ln 2."""
        output = smoothed_ce_loss(logits_of([0.0, 0.0]), torch.tensor([[0]]), 0.1)

        assert output.loss.item() == pytest.approx(0.693147, abs=1e-6)

    def test_hand_computed_value(self):
        """Test logits (ln 3, 0), target 0, eps 0.1 gives 0.342606."""
        output = smoothed_ce_loss(logits_of([math.log(3.0), 0.0]), torch.tensor([[0]]), 0.1)

        assert output.loss.item() == pytest.approx(0.342606, abs=1e-6)

    def test_zero_smoothing_is_cross_entropy(self):
        """Test eps=0 matches the summed plain cross-entropy averaged over the batch."""
        generator = torch.Generator().manual_seed(0)
        logits = torch.randn(3, 5, 7, generator=generator, dtype=torch.float64)
        targets = torch.randint(0, 7, (3, 5), generator=generator)

        output = smoothed_ce_loss(logits, targets, 0.0)

        expected = F.cross_entropy(logits.reshape(-1, 7), targets.reshape(-1), reduction="sum") / 3
        assert output.loss.item() == pytest.approx(expected.item())

    def test_per_token_log_probs(self):
        """Test token log-probabilities are log softmax at the targets."""
        output = smoothed_ce_loss(logits_of([math.log(3.0), 0.0], [0.0, 0.0]), torch.tensor([[0, 1]]), 0.1)

        assert output.token_log_probs.tolist() == pytest.approx([[math.log(0.75), math.log(0.5)]])
        assert output.sequence_log_probs.item() == pytest.approx(math.log(0.375))
        assert output.responsibilities is None

    def test_mask_excludes_padding(self):
        """Test masked positions contribute nothing."""
        logits = logits_of([math.log(3.0), 0.0], [5.0, -5.0])
        targets = torch.tensor([[0, 1]])

        masked = smoothed_ce_loss(logits, targets, 0.1, mask=torch.tensor([[True, False]]))
        single = smoothed_ce_loss(logits_of([math.log(3.0), 0.0]), torch.tensor([[0]]), 0.1)

        assert masked.loss.item() == pytest.approx(single.loss.item())

    def test_gibbs_lower_bound(self):
        """Test the loss is at least the entropy of the smoothed target, with equality at q'."""
        eps, k = 0.2, 5
        q = torch.full((k,), eps / k, dtype=torch.float64)
        q[2] += 1 - eps
        entropy = -(q * q.log()).sum().item()

        at_target = smoothed_ce_loss(q.log().view(1, 1, k), torch.tensor([[2]]), eps)
        elsewhere = smoothed_ce_loss(torch.randn(1, 1, k, dtype=torch.float64), torch.tensor([[2]]), eps)

        assert at_target.loss.item() == pytest.approx(entropy)
        assert elsewhere.loss.item() >= entropy - 1e-12

    def test_invalid_epsilon(self):
        """Test eps outside [0, 1] is rejected."""
        with pytest.raises(ValueError):
            smoothed_ce_loss(logits_of([0.0, 0.0]), torch.tensor([[0]]), 1.5)

    def test_misaligned_targets(self):
        """Test logits and targets must align."""
        with pytest.raises(ValueError):
            smoothed_ce_loss(logits_of([0.0, 0.0]), torch.tensor([[0, 1]]), 0.1)


class TestRobustLikelihood:
    """Test the mixture of the translation model and the language model."""

    def test_hand_computed_value(self):
        """Test l_model = ln .25, lm = ln .1, alpha .25 gives loss 1.548810 and w 0.882353."""
        logits, targets = uniform_quarter()

        output = robust_nll(logits, targets, math.log(0.1), 0.25)

        assert output.loss.item() == pytest.approx(1.548810, abs=1e-6)
        assert output.responsibilities.item() == pytest.approx(0.882353, abs=1e-6)

    def test_alpha_zero_is_plain_likelihood(self):
        """Test alpha=0 recovers -l_model with w=1."""
        logits, targets = uniform_quarter()

        output = robust_nll(logits, targets, math.log(0.1), 0.0)

        assert output.loss.item() == pytest.approx(-math.log(0.25))
        assert output.responsibilities.item() == pytest.approx(1.0)

    def test_alpha_one_is_language_model(self):
        """Test alpha=1 gives -lm_log_prob with w=0."""
        logits, targets = uniform_quarter()

        output = robust_nll(logits, targets, math.log(0.1), 1.0)

        assert output.loss.item() == pytest.approx(-math.log(0.1))
        assert output.responsibilities.item() == pytest.approx(0.0)

    def test_degenerate_likelihood(self):
        """Test alpha=1 with an impossible target under the LM raises."""
        logits, targets = uniform_quarter()

        with pytest.raises(DegenerateLikelihoodError):
            robust_nll(logits, targets, -math.inf, 1.0)

    def test_impossible_lm_target_with_mixing(self):
        """Test lm_log_prob=-inf with alpha < 1 reduces to the model term."""
        logits, targets = uniform_quarter()

        output = robust_nll(logits, targets, -math.inf, 0.5)

        assert output.loss.item() == pytest.approx(-math.log(0.5 * 0.25))
        assert output.responsibilities.item() == pytest.approx(1.0)

    def test_mixture_bounds(self):
        """Test the loss is bounded by each weighted component."""
        generator = torch.Generator().manual_seed(2)
        logits = torch.randn(4, 6, 9, generator=generator, dtype=torch.float64)
        targets = torch.randint(0, 9, (4, 6), generator=generator)
        lm = torch.tensor([-8.0, -20.0, -12.5, -30.0], dtype=torch.float64)
        alpha = 0.3

        output = robust_nll(logits, targets, lm, alpha)

        per_sequence = -torch.logsumexp(torch.stack([math.log(1 - alpha) + output.sequence_log_probs, math.log(alpha) + lm]), dim=0)
        assert output.loss.item() == pytest.approx(per_sequence.mean().item())
        assert torch.all(per_sequence <= -output.sequence_log_probs - math.log(1 - alpha) + 1e-12)
        assert torch.all(per_sequence <= -lm - math.log(alpha) + 1e-12)

    def test_gradient_is_responsibility_weighted(self):
        """Test d loss / d logits equals w times the plain cross-entropy gradient."""
        generator = torch.Generator().manual_seed(5)
        base = torch.randn(1, 3, 6, generator=generator, dtype=torch.float64)
        targets = torch.tensor([[1, 4, 2]])

        robust_logits = base.clone().requires_grad_(True)
        output = robust_nll(robust_logits, targets, -4.0, 0.25)
        output.loss.backward()

        plain_logits = base.clone().requires_grad_(True)
        smoothed_ce_loss(plain_logits, targets, 0.0).loss.backward()

        w = output.responsibilities.item()
        assert torch.allclose(robust_logits.grad, w * plain_logits.grad, atol=1e-12)

    def test_invalid_alpha(self):
        """Test alpha outside [0, 1] is rejected."""
        logits, targets = uniform_quarter()

        with pytest.raises(ValueError):
            robust_nll(logits, targets, 0.0, -0.1)


class _TwoParameters(nn.Module):
    def __init__(self):
        super().__init__()
        self.used = nn.Parameter(torch.tensor([1.0, 2.0], dtype=torch.float64))
        self.unused = nn.Parameter(torch.tensor([3.0], dtype=torch.float64))


class TestBackward:
    """Test gradient extraction."""

    def test_unused_tensor_gets_zero(self):
        """Test a parameter outside the graph gets a zero gradient."""
        module = _TwoParameters()

        grads = backward((module.used**2).sum(), module)

        assert grads["used"].tolist() == [2.0, 4.0]
        assert grads["unused"].tolist() == [0.0]

    def test_doubling_loss_doubles_gradients(self):
        """Test gradients are linear in the loss."""
        module = _TwoParameters()

        single = {k: v.clone() for k, v in backward((module.used**3).sum(), module).items()}
        double = backward(2 * (module.used**3).sum(), module)

        assert torch.equal(double["used"], 2 * single["used"])

    def test_non_finite_gradient_names_tensor(self):
        """Test an infinite gradient raises NonFiniteGradientError with the tensor name."""
        module = _TwoParameters()
        with torch.no_grad():
            module.used.zero_()

        with pytest.raises(NonFiniteGradientError) as exc_info:
            backward(module.used.sqrt().sum(), module)

        assert exc_info.value.tensor_name == "used"
