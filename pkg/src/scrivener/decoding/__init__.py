"""Translation with trained models."""

from .greedy import confidence, ensemble_decode, ensemble_step_probs, greedy_decode, identity_translate, translate_texts

__all__ = ["confidence", "ensemble_decode", "ensemble_step_probs", "greedy_decode", "identity_translate", "translate_texts"]
