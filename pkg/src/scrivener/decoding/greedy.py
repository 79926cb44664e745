"""
Greedy decoding, deep-ensemble decoding and sequence confidence.

Decoders accept any module with a ``config`` (:class:`ModelConfig`) that maps
``(src, tgt)`` id batches of shape (1, S) and (1, T) to logits of shape
(1, T, K). Argmax ties go to the smallest token id.
"""

from typing import List, Optional, Sequence

import torch
from torch import nn

from scrivener.errors import ConfigMismatchError
from scrivener.lib.structured_logger import get_logger
from scrivener.models.schemas import IdentityTranslation, TranslationResult
from scrivener.text.vocab import TokenSeq, Vocab, decode, encode_source

logger = get_logger(__name__)


def confidence(token_log_probs: Sequence[float]) -> float:
    """Average token log-likelihood C of a decoded sequence.

    Raises:
        ValueError: If the list is empty
    """
    if len(token_log_probs) == 0:
        raise ValueError("confidence of an empty token sequence is undefined")
    return float(sum(token_log_probs) / len(token_log_probs))


def _resolve_max_len(model: nn.Module, max_len: Optional[int]) -> int:
    limit = model.config.max_seq_len
    if max_len is None:
        return limit
    if not 1 <= max_len <= limit:
        raise ValueError(f"max_len={max_len} must lie in [1, {limit}]")
    return max_len


def _step_logits(model: nn.Module, src: torch.Tensor, prefix: List[int]) -> torch.Tensor:
    tgt = torch.tensor([prefix], dtype=torch.long)
    return model(src, tgt)[0, -1].to(torch.float64)


def _result(tokens: TokenSeq, log_probs: List[float], vocab: Optional[Vocab]) -> TranslationResult:
    text = decode(tokens, vocab) if vocab is not None else ""
    return TranslationResult(tokens=tokens, text=text, token_log_probs=log_probs, confidence=confidence(log_probs))


@torch.no_grad()
def greedy_decode(model: nn.Module, x: TokenSeq, vocab: Optional[Vocab] = None, temperature: float = 1.0, max_len: Optional[int] = None) -> TranslationResult:
    """Emit the argmax token at every step until EOS or ``max_len`` tokens.

    ``token_log_probs`` are taken from ``log_softmax(z / temperature)``; the
    emitted tokens do not depend on the temperature.
    """
    if temperature <= 0:
        raise ValueError(f"temperature must be positive, got {temperature}")
    limit = _resolve_max_len(model, max_len)
    bos_id, eos_id = _special_ids(vocab)
    model.eval()

    src = torch.tensor([list(x)], dtype=torch.long)
    prefix = [bos_id]
    tokens: TokenSeq = []
    log_probs: List[float] = []
    for _ in range(limit):
        logits = _step_logits(model, src, prefix)
        step_log_probs = torch.log_softmax(logits / temperature, dim=-1)
        token = int(torch.argmax(logits))
        tokens.append(token)
        log_probs.append(float(step_log_probs[token]))
        if token == eos_id:
            break
        prefix.append(token)

    return _result(tokens, log_probs, vocab)


@torch.no_grad()
def ensemble_decode(models: Sequence[nn.Module], x: TokenSeq, vocab: Optional[Vocab] = None, temperature: float = 1.0, max_len: Optional[int] = None) -> TranslationResult:
    """Greedy decoding over ``mean_s softmax(z_s / temperature)``.

    Raises:
        ValueError: If ``models`` is empty
        ConfigMismatchError: If the models do not share one config
    """
    if not models:
        raise ValueError("ensemble needs at least one model")
    first = models[0].config
    for index, model in enumerate(models[1:], start=1):
        if model.config != first:
            raise ConfigMismatchError(f"ensemble member {index} has a different model config than member 0")
    if len(models) == 1:
        return greedy_decode(models[0], x, vocab=vocab, temperature=temperature, max_len=max_len)
    if temperature <= 0:
        raise ValueError(f"temperature must be positive, got {temperature}")

    limit = _resolve_max_len(models[0], max_len)
    bos_id, eos_id = _special_ids(vocab)
    for model in models:
        model.eval()

    src = torch.tensor([list(x)], dtype=torch.long)
    prefix = [bos_id]
    tokens: TokenSeq = []
    log_probs: List[float] = []
    for _ in range(limit):
        probs = ensemble_step_probs(models, src, prefix, temperature)
        token = int(torch.argmax(probs))
        tokens.append(token)
        log_probs.append(float(torch.log(probs[token])))
        if token == eos_id:
            break
        prefix.append(token)

    return _result(tokens, log_probs, vocab)


def ensemble_step_probs(models: Sequence[nn.Module], src: torch.Tensor, prefix: List[int], temperature: float) -> torch.Tensor:
    """Averaged next-token distribution of the ensemble members, in float64."""
    stacked = torch.stack([torch.softmax(_step_logits(model, src, prefix) / temperature, dim=-1) for model in models])
    return stacked.mean(dim=0)


def identity_translate(text: str) -> IdentityTranslation:
    """Baseline that returns the student text unchanged; it has no confidence."""
    return IdentityTranslation(text=text)


def translate_texts(models: Sequence[nn.Module], texts: Sequence[str], vocab: Vocab, temperature: float = 1.0, max_len: Optional[int] = None) -> List[TranslationResult]:
    """Translate each text with one model or an ensemble."""
    results = []
    for text in texts:
        source = encode_source(text, vocab)
        if len(models) == 1:
            results.append(greedy_decode(models[0], source, vocab=vocab, temperature=temperature, max_len=max_len))
        else:
            results.append(ensemble_decode(models, source, vocab=vocab, temperature=temperature, max_len=max_len))
    logger.debug("Translated texts", count=len(results), ensemble_size=len(models), temperature=temperature)
    return results


def _special_ids(vocab: Optional[Vocab]) -> tuple[int, int]:
    if vocab is None:
        return Vocab.bos_id, Vocab.eos_id
    return vocab.bos_id, vocab.eos_id
