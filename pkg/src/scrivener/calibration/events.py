"""Teacher-forced token predictions used by the calibration diagnostics."""

from typing import List, Sequence, Tuple, Union

import torch
from torch import nn

from scrivener.models.schemas import TextPair, TokenEvent
from scrivener.text.vocab import Vocab
from scrivener.training.data import collate, encode_pair

Models = Union[nn.Module, Sequence[nn.Module]]


def _as_list(models: Models) -> List[nn.Module]:
    return [models] if isinstance(models, nn.Module) else list(models)


@torch.no_grad()
def collect_logits(model: nn.Module, pairs: Sequence[TextPair], vocab: Vocab) -> Tuple[torch.Tensor, torch.Tensor]:
    """Stacked teacher-forced logits (N, K) in float64 and the N true target tokens, EOS included."""
    model.eval()
    all_logits, all_targets = [], []
    for pair in pairs:
        batch = collate([encode_pair(pair, vocab, model.config.max_seq_len)])
        all_logits.append(model(batch.source, batch.decoder_input)[0].to(torch.float64))
        all_targets.append(batch.target[0])
    return torch.cat(all_logits), torch.cat(all_targets)


@torch.no_grad()
def predictive_probs(models: Models, pairs: Sequence[TextPair], vocab: Vocab, temperature: float = 1.0) -> Tuple[torch.Tensor, torch.Tensor]:
    """Teacher-forced probabilities averaged over ``models``, with the true targets."""
    members = _as_list(models)
    probs, targets = None, None
    for model in members:
        logits, targets = collect_logits(model, pairs, vocab)
        member_probs = torch.softmax(logits / temperature, dim=-1)
        probs = member_probs if probs is None else probs + member_probs
    return probs / len(members), targets


def collect_token_events(models: Models, pairs: Sequence[TextPair], vocab: Vocab, temperature: float = 1.0) -> List[TokenEvent]:
    """One event per target position: the argmax probability and whether the argmax is the true token."""
    if temperature <= 0:
        raise ValueError(f"temperature must be positive, got {temperature}")
    probs, targets = predictive_probs(models, pairs, vocab, temperature)
    confidences, predictions = probs.max(dim=-1)
    return [TokenEvent(confidence=min(1.0, float(c)), correct=bool(p == t)) for c, p, t in zip(confidences.tolist(), predictions.tolist(), targets.tolist())]
