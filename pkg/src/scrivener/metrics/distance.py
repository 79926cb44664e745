"""Character-level edit distances."""

from nltk.metrics.distance import edit_distance as _levenshtein


def edit_distance(a: str, b: str) -> int:
    """Levenshtein distance with unit insert, delete and substitute costs."""
    return int(_levenshtein(a, b, substitution_cost=1, transpositions=False))


def normalized_ed(a: str, b: str) -> float:
    """Edit distance divided by the longer length; 0 when both strings are empty."""
    longest = max(len(a), len(b))
    if longest == 0:
        return 0.0
    return edit_distance(a, b) / longest
