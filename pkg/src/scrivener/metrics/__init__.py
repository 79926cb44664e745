"""Translation quality and readability metrics."""

from .distance import edit_distance, normalized_ed
from .evaluation import evaluate, mae, pair_metrics, report_from_rows, summarize
from .readability import count_syllables, flesch_kincaid, lix, text_stats

__all__ = [
    "count_syllables",
    "edit_distance",
    "evaluate",
    "flesch_kincaid",
    "lix",
    "mae",
    "normalized_ed",
    "pair_metrics",
    "report_from_rows",
    "summarize",
    "text_stats",
]
