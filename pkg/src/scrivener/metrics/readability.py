"""
Readability scores from simple text statistics.

Words are whitespace-separated tokens with Unicode punctuation stripped from
both ends. Sentences are maximal runs of ``.``, ``!`` and ``?`` (at least one
for any text with words). Syllables are maximal groups of the vowels
``aeiouy`` per word, at least one. Long words have more than six characters.
"""

import re
import unicodedata

from scrivener.constants import ReadabilityBounds
from scrivener.models.schemas import TextStats

_TERMINATOR_RUN = re.compile(r"[.!?]+")
_VOWEL_GROUP = re.compile(r"[aeiouy]+")


def _strip_punctuation(token: str) -> str:
    start, end = 0, len(token)
    while start < end and unicodedata.category(token[start]).startswith("P"):
        start += 1
    while end > start and unicodedata.category(token[end - 1]).startswith("P"):
        end -= 1
    return token[start:end]


def count_syllables(word: str) -> int:
    return max(1, len(_VOWEL_GROUP.findall(word.lower())))


def text_stats(text: str) -> TextStats:
    words = [w for w in (_strip_punctuation(token) for token in text.split()) if w]
    sentences = len(_TERMINATOR_RUN.findall(text))
    if words:
        sentences = max(sentences, 1)
    else:
        sentences = 0
    return TextStats(
        words=len(words),
        sentences=sentences,
        syllables=sum(count_syllables(w) for w in words),
        long_words=sum(1 for w in words if len(w) >= ReadabilityBounds.LONG_WORD_MIN_CHARS),
    )


def _clip(value: float, lower: float, upper: float) -> float:
    return min(max(value, lower), upper)


def flesch_kincaid_raw(stats: TextStats) -> float:
    return 0.39 * (stats.words / stats.sentences) + 11.8 * (stats.syllables / stats.words) - 15.59


def flesch_kincaid(stats: TextStats) -> float:
    """Flesch-Kincaid grade level clipped to [-3.4, 36]; texts without words score -3.4."""
    if stats.words == 0:
        return ReadabilityBounds.FK_LOWER
    return _clip(flesch_kincaid_raw(stats), ReadabilityBounds.FK_LOWER, ReadabilityBounds.FK_UPPER)


def lix_raw(stats: TextStats) -> float:
    return stats.words / stats.sentences + 100.0 * stats.long_words / stats.words


def lix(stats: TextStats) -> float:
    """LIX clipped to [0, 110]; texts without words score 0."""
    if stats.words == 0:
        return ReadabilityBounds.LIX_LOWER
    return _clip(lix_raw(stats), ReadabilityBounds.LIX_LOWER, ReadabilityBounds.LIX_UPPER)
