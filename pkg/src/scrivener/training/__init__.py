"""Losses, optimisation, the training loop and gradient checking."""

from .data import Batch, EncodedPair, collate, encode_pair, encode_pairs
from .grad_check import grad_check, micro_config, relative_error
from .losses import LossOutput, backward, robust_nll, smoothed_ce_loss
from .optimizer import AdamW, AdamWState, adamw_step
from .trainer import compute_loss, responsibilities, save_history, train, validation_ned

__all__ = [
    "AdamW",
    "AdamWState",
    "Batch",
    "EncodedPair",
    "LossOutput",
    "adamw_step",
    "backward",
    "collate",
    "compute_loss",
    "encode_pair",
    "encode_pairs",
    "grad_check",
    "micro_config",
    "relative_error",
    "responsibilities",
    "save_history",
    "train",
    "validation_ned",
]
