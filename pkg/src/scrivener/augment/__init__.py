"""Synthetic student-writing augmentation."""

from scrivener.models.scrivener_config import AugmentConfig

from .confusion import load_confusion_table, load_default_confusion_table
from .corruption import corrupt_text, corrupt_word, generate_pairs

__all__ = ["AugmentConfig", "corrupt_text", "corrupt_word", "generate_pairs", "load_confusion_table", "load_default_confusion_table"]
