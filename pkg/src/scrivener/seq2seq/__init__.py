"""Encoder-decoder model and its checkpoints."""

from .checkpoint import load_checkpoint, save_checkpoint
from .model import Seq2SeqTransformer, forward, init_params

__all__ = ["Seq2SeqTransformer", "forward", "init_params", "load_checkpoint", "save_checkpoint"]
