"""
Simulated student writing.

Clean conventional text is corrupted with the operations observed in
early-stage writing: dropped words and letters, words shortened to their
initial letter, cut word endings, phonetic misspellings of letters and
bigrams, and missing spaces between words.
"""

import re
from typing import List, Sequence

import numpy as np

from scrivener.lib.structured_logger import get_logger
from scrivener.models.schemas import TextPair
from scrivener.models.scrivener_config import AugmentConfig

logger = get_logger(__name__)

_TOKEN_RE = re.compile(r"\s+|\S+")
MIN_CUT_WORD_LEN = 4


def _match_case(original: str, replacement: str) -> str:
    if original[:1].isupper():
        return replacement[:1].upper() + replacement[1:]
    return replacement


def _misspell(word: str, config: AugmentConfig, rng: np.random.Generator) -> str:
    """Substitute confusion-table units left to right, bigrams before letters, without overlap."""
    table = config.confusion_table
    out: List[str] = []
    i = 0
    while i < len(word):
        bigram = word[i : i + 2]
        if len(bigram) == 2 and bigram.lower() in table:
            unit = bigram
        elif word[i].lower() in table:
            unit = word[i]
        else:
            out.append(word[i])
            i += 1
            continue

        if rng.random() < config.p_misspell:
            candidates = table[unit.lower()]
            out.append(_match_case(unit, candidates[int(rng.integers(len(candidates)))]))
        else:
            out.append(unit)
        i += len(unit)
    return "".join(out)


def corrupt_word(word: str, config: AugmentConfig, rng: np.random.Generator) -> str:
    """Corrupt one whitespace-free word.

    At most one structural operation applies (shorten to the initial letter,
    else cut 1..cut_ending_max_chars trailing characters of words with at least
    four characters), followed by misspellings and letter deletions. The result
    is never empty; it falls back to the word's first letter.
    """
    if not word:
        raise ValueError("corrupt_word needs a nonempty word")

    result = word
    if rng.random() < config.p_shorten_to_initial:
        result = word[0]
    elif len(word) >= MIN_CUT_WORD_LEN and rng.random() < config.p_cut_ending:
        cut = int(rng.integers(1, min(config.cut_ending_max_chars, len(word) - 1) + 1))
        result = word[:-cut]

    if config.confusion_table and config.p_misspell > 0:
        result = _misspell(result, config, rng)

    if config.p_letter_delete > 0:
        keep = rng.random(len(result)) >= config.p_letter_delete
        result = "".join(ch for ch, kept in zip(result, keep) if kept)

    return result or word[0]


def corrupt_text(text: str, config: AugmentConfig, rng: np.random.Generator) -> str:
    """Corrupt a text word by word.

    Words are deleted with ``p_word_delete`` (one word always survives in a
    nonempty text), each survivor goes through :func:`corrupt_word`, and the
    whitespace between surviving words is dropped with ``p_space_delete``.
    Leading and trailing whitespace and untouched separators are kept verbatim.
    """
    tokens = _TOKEN_RE.findall(text)
    if not tokens:
        return text

    leading = tokens[0] if tokens[0].isspace() else ""
    trailing = tokens[-1] if tokens[-1].isspace() and len(tokens) > 1 else ""
    body = tokens[1 if leading else 0 : len(tokens) - 1 if trailing else len(tokens)]
    if not body:
        return text

    # body alternates word, separator, word, ...
    words = body[0::2]
    separators = body[1::2]

    keep = [rng.random() >= config.p_word_delete for _ in words]
    if not any(keep):
        keep[int(rng.integers(len(words)))] = True

    survivors: List[str] = []
    gaps: List[str] = []
    for index, word in enumerate(words):
        if not keep[index]:
            continue
        if survivors:
            # the separator in front of a survivor is the one following the previous kept word's slot
            gaps.append(separators[index - 1])
        survivors.append(corrupt_word(word, config, rng))

    pieces = [survivors[0]]
    for gap, word in zip(gaps, survivors[1:]):
        if rng.random() >= config.p_space_delete:
            pieces.append(gap)
        pieces.append(word)

    return leading + "".join(pieces) + trailing


def generate_pairs(clean_texts: Sequence[str], config: AugmentConfig) -> List[TextPair]:
    """One synthetic pair per clean text: teacher = clean text, student = corrupted text.

    Each text draws from its own generator seeded by ``(config.seed, index)``.
    """
    if not clean_texts:
        raise ValueError("generate_pairs needs at least one text")

    pairs = []
    for index, clean in enumerate(clean_texts):
        rng = np.random.default_rng([config.seed, index])
        pairs.append(TextPair(student=corrupt_text(clean, config, rng), teacher=clean))

    logger.info("Generated synthetic pairs", count=len(pairs), seed=config.seed)
    return pairs
