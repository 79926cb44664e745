"""n-gram language model used by the robust likelihood."""

from .ngram import NGramModel, fit, log_prob_seq, log_prob_token
from .persistence import load_lm, save_lm

__all__ = ["NGramModel", "fit", "load_lm", "log_prob_seq", "log_prob_token", "save_lm"]
