"""Encoded training examples and padded batches."""

from dataclasses import dataclass
from typing import List, Optional, Sequence

import torch

from scrivener.constants import ErrorMessages, SpecialTokens
from scrivener.errors import SequenceTooLongError
from scrivener.lm.ngram import NGramModel, log_prob_seq
from scrivener.models.schemas import TextPair
from scrivener.text.vocab import TokenSeq, Vocab, encode, encode_source, encode_target


@dataclass(frozen=True)
class EncodedPair:
    """One pair ready for teacher forcing: decoder input is ``[BOS] + y``, target ``y + [EOS]``."""

    source: TokenSeq
    decoder_input: TokenSeq
    target: TokenSeq
    lm_log_prob: Optional[float] = None
    noisy: bool = False


@dataclass
class Batch:
    source: torch.Tensor
    decoder_input: torch.Tensor
    target: torch.Tensor
    mask: torch.Tensor
    lm_log_prob: Optional[torch.Tensor]
    noisy: List[bool]

    @property
    def size(self) -> int:
        return self.source.size(0)


def encode_pair(pair: TextPair, vocab: Vocab, max_seq_len: int, lm: Optional[NGramModel] = None) -> EncodedPair:
    """Encode one pair; the n-gram log-probability of the target is cached when ``lm`` is given.

    Raises:
        SequenceTooLongError: If the source or the decoder input exceeds ``max_seq_len``
    """
    source = encode_source(pair.student, vocab)
    target = encode_target(pair.teacher, vocab)
    decoder_input = [vocab.bos_id] + encode(pair.teacher, vocab)
    for seq in (source, decoder_input):
        if len(seq) > max_seq_len:
            raise SequenceTooLongError(ErrorMessages.SEQUENCE_TOO_LONG.format(length=len(seq), max_len=max_seq_len))
    lm_log_prob = log_prob_seq(lm, target) if lm is not None else None
    return EncodedPair(source=source, decoder_input=decoder_input, target=target, lm_log_prob=lm_log_prob, noisy=bool(pair.noisy))


def encode_pairs(pairs: Sequence[TextPair], vocab: Vocab, max_seq_len: int, lm: Optional[NGramModel] = None) -> List[EncodedPair]:
    return [encode_pair(pair, vocab, max_seq_len, lm) for pair in pairs]


def _pad(seqs: Sequence[TokenSeq]) -> torch.Tensor:
    width = max(len(seq) for seq in seqs)
    return torch.tensor([list(seq) + [SpecialTokens.PAD_ID] * (width - len(seq)) for seq in seqs], dtype=torch.long)


def collate(examples: Sequence[EncodedPair]) -> Batch:
    """Right-pad a list of examples with PAD into one batch."""
    target = _pad([ex.target for ex in examples])
    lm = None
    if all(ex.lm_log_prob is not None for ex in examples):
        lm = torch.tensor([ex.lm_log_prob for ex in examples], dtype=torch.float64)
    return Batch(
        source=_pad([ex.source for ex in examples]),
        decoder_input=_pad([ex.decoder_input for ex in examples]),
        target=target,
        mask=target != SpecialTokens.PAD_ID,
        lm_log_prob=lm,
        noisy=[ex.noisy for ex in examples],
    )
