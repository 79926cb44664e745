"""Character-level vocabulary and token sequences."""

from typing import Iterable, List, Sequence

from scrivener.constants import SpecialTokens

# Ordered list of token ids; decoder targets end with EOS.
TokenSeq = List[int]


class Vocab:
    """Bijection between characters and contiguous integer ids.

    Ids 0..3 are PAD, BOS, EOS and UNK; characters follow in Unicode code point
    order, so the vocabulary does not depend on corpus order.
    """

    def __init__(self, characters: Iterable[str]):
        chars = sorted(set(characters))
        for ch in chars:
            if len(ch) != 1:
                raise ValueError(f"vocabulary entries must be single characters, got {ch!r}")
        self._id_to_token: List[str] = list(SpecialTokens.ALL) + chars
        self._token_to_id = {token: idx for idx, token in enumerate(self._id_to_token)}

    pad_id = SpecialTokens.PAD_ID
    bos_id = SpecialTokens.BOS_ID
    eos_id = SpecialTokens.EOS_ID
    unk_id = SpecialTokens.UNK_ID

    @property
    def size(self) -> int:
        """Vocabulary size K."""
        return len(self._id_to_token)

    def __len__(self) -> int:
        return self.size

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Vocab) and self._id_to_token == other._id_to_token

    def __hash__(self) -> int:
        return hash(tuple(self._id_to_token))

    def __repr__(self) -> str:
        return f"Vocab(size={self.size})"

    @property
    def characters(self) -> List[str]:
        """Non-special entries in id order."""
        return self._id_to_token[len(SpecialTokens.ALL) :]

    def token_to_id(self, token: str) -> int:
        return self._token_to_id.get(token, self.unk_id)

    def id_to_token(self, idx: int) -> str:
        return self._id_to_token[idx]

    def is_special(self, idx: int) -> bool:
        return idx < len(SpecialTokens.ALL)


def build_vocab(corpus: Iterable[str]) -> Vocab:
    """Vocabulary of the four specials plus every distinct character in ``corpus``."""
    chars: set[str] = set()
    for text in corpus:
        chars.update(text)
    return Vocab(chars)


def encode(text: str, vocab: Vocab) -> TokenSeq:
    """Map characters to ids; unknown characters become UNK."""
    return [vocab.token_to_id(ch) for ch in text]


def decode(seq: Sequence[int], vocab: Vocab) -> str:
    """Map ids back to text, dropping special tokens."""
    return "".join(vocab.id_to_token(idx) for idx in seq if not vocab.is_special(idx))


def encode_target(text: str, vocab: Vocab) -> TokenSeq:
    """Decoder target: the encoded text followed by EOS."""
    return encode(text, vocab) + [vocab.eos_id]


def encode_source(text: str, vocab: Vocab) -> TokenSeq:
    """Encoder input: the encoded text followed by EOS, so empty inputs still have one position."""
    return encode(text, vocab) + [vocab.eos_id]


def pair_vocab(pairs: Iterable) -> Vocab:
    """Vocabulary over the student and teacher texts of ``pairs``."""
    return build_vocab(text for pair in pairs for text in (pair.student, pair.teacher))
