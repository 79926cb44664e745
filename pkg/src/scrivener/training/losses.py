"""
Training objectives.

Both losses take logits of shape (B, T, K), integer targets of shape (B, T) and
an optional boolean mask of shape (B, T) marking real (non-PAD) positions. The
reported loss is the mean over the batch of per-sequence sums.
"""

from dataclasses import dataclass
import math
from typing import Dict, Optional, Union

import torch
from torch import nn
import torch.nn.functional as F

from scrivener.constants import ErrorMessages
from scrivener.errors import DegenerateLikelihoodError, NonFiniteGradientError


@dataclass
class LossOutput:
    """Scalar loss plus the per-token and per-sequence log-likelihoods behind it.

    ``responsibilities`` is the posterior probability that each pair is clean;
    it is only set by the robust loss.
    """

    loss: torch.Tensor
    token_log_probs: torch.Tensor
    sequence_log_probs: torch.Tensor
    responsibilities: Optional[torch.Tensor] = None


def _prepare(logits: torch.Tensor, targets: torch.Tensor, mask: Optional[torch.Tensor]):
    if logits.shape[:-1] != targets.shape:
        raise ValueError(f"logits {tuple(logits.shape)} do not align with targets {tuple(targets.shape)}")
    if mask is None:
        mask = torch.ones_like(targets, dtype=torch.bool)
    log_probs = F.log_softmax(logits, dim=-1)
    token_log_probs = log_probs.gather(-1, targets.unsqueeze(-1)).squeeze(-1)
    token_log_probs = token_log_probs.masked_fill(~mask, 0.0)
    return log_probs, token_log_probs, mask


def smoothed_ce_loss(logits: torch.Tensor, targets: torch.Tensor, epsilon: float, mask: Optional[torch.Tensor] = None) -> LossOutput:
    """Cross-entropy against ``(1 - eps) * onehot(y) + eps / K``."""
    if not 0.0 <= epsilon <= 1.0:
        raise ValueError(f"label smoothing must lie in [0, 1], got {epsilon}")
    log_probs, token_log_probs, mask = _prepare(logits, targets, mask)
    vocab_size = logits.size(-1)

    uniform_term = log_probs.sum(dim=-1).masked_fill(~mask, 0.0) / vocab_size
    per_token = -(1.0 - epsilon) * token_log_probs - epsilon * uniform_term
    sequence_loss = per_token.sum(dim=-1)

    return LossOutput(
        loss=sequence_loss.mean(),
        token_log_probs=token_log_probs,
        sequence_log_probs=token_log_probs.sum(dim=-1),
    )


def robust_nll(
    logits: torch.Tensor,
    targets: torch.Tensor,
    lm_log_prob: Union[float, torch.Tensor],
    alpha: float,
    mask: Optional[torch.Tensor] = None,
) -> LossOutput:
    """Negative log of the per-sequence mixture ``(1 - a) p_model(y|x) + a p_LM(y)``.

    ``lm_log_prob`` is the language-model log-probability of each full target
    sequence, EOS included: a float or a tensor of shape (B,).

    Raises:
        DegenerateLikelihoodError: If a sequence has zero likelihood under both components
    """
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha must lie in [0, 1], got {alpha}")
    _, token_log_probs, mask = _prepare(logits, targets, mask)
    model_log_prob = token_log_probs.sum(dim=-1)

    lm = torch.as_tensor(lm_log_prob, dtype=model_log_prob.dtype, device=model_log_prob.device).expand_as(model_log_prob)
    log_clean = (math.log1p(-alpha) if alpha < 1.0 else -math.inf) + model_log_prob
    log_noisy = (math.log(alpha) if alpha > 0.0 else -math.inf) + lm

    mixture = torch.logsumexp(torch.stack([log_clean, log_noisy], dim=-1), dim=-1)
    if torch.isneginf(mixture).any():
        raise DegenerateLikelihoodError(f"mixture likelihood is zero for alpha={alpha}; the language model assigns the target probability 0")

    responsibilities = torch.exp(log_clean - mixture).detach()
    return LossOutput(
        loss=-mixture.mean(),
        token_log_probs=token_log_probs,
        sequence_log_probs=model_log_prob,
        responsibilities=responsibilities,
    )


def backward(loss: torch.Tensor, model: nn.Module) -> Dict[str, torch.Tensor]:
    """Reverse-mode gradients of ``loss`` for every named parameter of ``model``.

    Gradients are left on ``param.grad`` for the optimizer and also returned by
    name; parameters the loss does not reach get zeros.

    Raises:
        NonFiniteGradientError: Naming the first tensor whose gradient is NaN or infinite
    """
    model.zero_grad(set_to_none=True)
    loss.backward()

    grads: Dict[str, torch.Tensor] = {}
    for name, param in model.named_parameters():
        if param.grad is None:
            param.grad = torch.zeros_like(param)
        if not torch.isfinite(param.grad).all():
            raise NonFiniteGradientError(ErrorMessages.NON_FINITE_GRADIENT.format(name=name), tensor_name=name)
        grads[name] = param.grad
    return grads
