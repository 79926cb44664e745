"""
Smoothed n-gram language model over token ids.

Probabilities follow a recursive interpolation::

    p_m(w | h) = (c(h, w) + k * p_{m-1}(w | h without its oldest token)) / (c(h) + k)
    p_0(w)     = 1 / K

which is exactly normalised at every order. Histories are BOS-padded so every
position has a full history, and EOS is modelled so the model is a
distribution over variable-length sequences.
"""

from collections import Counter
import math
from typing import Dict, Iterable, List, Sequence, Tuple

from scrivener.constants import SpecialTokens
from scrivener.lib.structured_logger import get_logger

logger = get_logger(__name__)

History = Tuple[int, ...]


class NGramModel:
    """Count tables for orders 1..n plus the smoothing constant.

    ``ngram_counts[m - 1]`` maps ``(history, token)`` with ``len(history) == m - 1``
    to its count; ``history_counts[m - 1]`` holds ``c(h) = sum_w c(h, w)``.
    A fitted model is treated as immutable.
    """

    def __init__(self, order: int, k: float, vocab_size: int, bos_id: int = SpecialTokens.BOS_ID):
        if order < 1:
            raise ValueError(f"n-gram order must be >= 1, got {order}")
        if k <= 0:
            raise ValueError(f"smoothing constant must be positive, got {k}")
        if vocab_size < 1:
            raise ValueError(f"vocab_size must be >= 1, got {vocab_size}")
        self.order = order
        self.k = float(k)
        self.vocab_size = vocab_size
        self.bos_id = bos_id
        self.ngram_counts: List[Counter] = [Counter() for _ in range(order)]
        self.history_counts: List[Counter] = [Counter() for _ in range(order)]

    def __repr__(self) -> str:
        return f"NGramModel(order={self.order}, k={self.k}, vocab_size={self.vocab_size})"

    def pad(self, seq: Sequence[int]) -> List[int]:
        """Prefix ``order - 1`` BOS tokens."""
        return [self.bos_id] * (self.order - 1) + list(seq)

    def add_count(self, history: History, token: int, count: int = 1) -> None:
        """Increment ``c(history, token)`` and ``c(history)`` at order ``len(history) + 1``."""
        level = len(history)
        self.ngram_counts[level][(history, token)] += count
        self.history_counts[level][history] += count

    def _prob(self, token: int, history: History) -> float:
        p = 1.0 / self.vocab_size
        for level in range(self.order):
            h = history[len(history) - level :] if level else ()
            c_h = self.history_counts[level].get(h, 0)
            c_hw = self.ngram_counts[level].get((h, token), 0)
            p = (c_hw + self.k * p) / (c_h + self.k)
        return p

    def counts_table(self) -> Dict[int, Dict[Tuple[History, int], int]]:
        """Plain-dict view of the n-gram counts, keyed by order."""
        return {level + 1: dict(table) for level, table in enumerate(self.ngram_counts)}


def fit(sequences: Iterable[Sequence[int]], order: int, k: float = 1.0, vocab_size: int | None = None, bos_id: int = SpecialTokens.BOS_ID) -> NGramModel:
    """Accumulate n-gram counts of every order over every in-sequence position.

    Sequences are token ids ending with EOS; BOS padding of length ``order - 1``
    is added here, and padded positions are never counted as events.

    Raises:
        ValueError: If order < 1 or vocab_size is missing
    """
    if order < 1:
        raise ValueError(f"n-gram order must be >= 1, got {order}")
    if vocab_size is None:
        raise ValueError("vocab_size is required")

    model = NGramModel(order=order, k=k, vocab_size=vocab_size, bos_id=bos_id)
    n_sequences = 0
    for seq in sequences:
        n_sequences += 1
        padded = model.pad(seq)
        for position in range(order - 1, len(padded)):
            token = padded[position]
            for level in range(order):
                model.add_count(tuple(padded[position - level : position]), token)

    logger.debug("Fitted n-gram model", order=order, k=k, vocab_size=vocab_size, sequences=n_sequences)
    return model


def log_prob_token(model: NGramModel, token: int, history: Sequence[int]) -> float:
    """Natural log of ``p(token | history)``.

    ``history`` is the preceding tokens; only the last ``order - 1`` are used and
    short histories are BOS-padded.
    """
    if not 0 <= token < model.vocab_size:
        raise ValueError(f"token id {token} outside vocabulary of size {model.vocab_size}")
    need = model.order - 1
    hist = tuple(history[-need:]) if need else ()
    if len(hist) < need:
        hist = (model.bos_id,) * (need - len(hist)) + hist
    return math.log(model._prob(token, hist))


def log_prob_seq(model: NGramModel, seq: Sequence[int]) -> float:
    """Sum of :func:`log_prob_token` over every position of ``seq``, EOS included."""
    padded = model.pad(seq)
    need = model.order - 1
    total = 0.0
    for position in range(need, len(padded)):
        total += log_prob_token(model, padded[position], padded[position - need : position])
    return total
