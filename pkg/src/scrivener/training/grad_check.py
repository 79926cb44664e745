"""Finite-difference check of the analytic gradients of both training losses."""

from typing import Callable, List

import numpy as np
import torch

from scrivener.lib.structured_logger import get_logger
from scrivener.lm.ngram import fit as fit_ngram
from scrivener.lm.ngram import log_prob_seq
from scrivener.models.schemas import GradCheckEntry, GradCheckReport
from scrivener.models.scrivener_config import LossKind, ModelConfig
from scrivener.seq2seq.model import Seq2SeqTransformer, init_params
from scrivener.training.losses import backward, robust_nll, smoothed_ce_loss

logger = get_logger(__name__)

MICRO_VOCAB_SIZE = 10
MICRO_BATCH = 3
STEP = 1e-5
ERROR_FLOOR = 1e-5


def micro_config(model_config: ModelConfig) -> ModelConfig:
    """d_model=8, one encoder and one decoder layer, no dropout."""
    # at least two content tokens beyond the four specials
    vocab_size = MICRO_VOCAB_SIZE if model_config.vocab_size < 6 else min(model_config.vocab_size, MICRO_VOCAB_SIZE)
    return ModelConfig(
        d_model=8,
        n_heads=2,
        n_encoder_layers=1,
        n_decoder_layers=1,
        d_ffn=16,
        max_seq_len=16,
        dropout_rate=0.0,
        vocab_size=vocab_size,
    )


def _micro_batch(config: ModelConfig, rng: np.random.Generator):
    # Content tokens only; every row is full length so no padding is involved
    src = torch.as_tensor(rng.integers(4, config.vocab_size, size=(MICRO_BATCH, 6)), dtype=torch.long)
    body = rng.integers(4, config.vocab_size, size=(MICRO_BATCH, 4))
    tgt_in = torch.as_tensor(np.concatenate([np.ones((MICRO_BATCH, 1), dtype=np.int64), body], axis=1), dtype=torch.long)
    tgt_out = torch.as_tensor(np.concatenate([body, np.full((MICRO_BATCH, 1), 2, dtype=np.int64)], axis=1), dtype=torch.long)
    return src, tgt_in, tgt_out


def relative_error(analytic: float, numeric: float) -> float:
    return abs(analytic - numeric) / max(abs(analytic), abs(numeric), ERROR_FLOOR)


def grad_check(
    model_config: ModelConfig,
    loss_kind: LossKind,
    tolerance: float = 1e-4,
    n_samples: int = 200,
    seed: int = 0,
    alpha: float = 0.25,
    epsilon: float = 0.1,
) -> GradCheckReport:
    """Compare backprop gradients with central differences on a float64 micro model.

    ``n_samples`` parameter entries are drawn uniformly over all parameter
    elements; an entry fails when its relative error reaches ``tolerance``.
    """
    config = micro_config(model_config)
    model: Seq2SeqTransformer = init_params(config, seed=seed, dtype=torch.float64)
    model.eval()
    rng = np.random.default_rng(seed)
    src, tgt_in, tgt_out = _micro_batch(config, rng)

    lm = fit_ngram(tgt_out.tolist(), order=2, vocab_size=config.vocab_size)
    lm_log_prob = torch.tensor([log_prob_seq(lm, row) for row in tgt_out.tolist()], dtype=torch.float64)

    def loss_fn() -> torch.Tensor:
        logits = model(src, tgt_in)
        if loss_kind == LossKind.ROBUST:
            return robust_nll(logits, tgt_out, lm_log_prob, alpha).loss
        return smoothed_ce_loss(logits, tgt_out, epsilon).loss

    grads = {name: grad.detach().clone() for name, grad in backward(loss_fn(), model).items()}
    params = dict(model.named_parameters())
    entries = _sample_entries(params, n_samples, rng)

    failures: List[GradCheckEntry] = []
    max_error = 0.0
    for name, flat_index in entries:
        numeric = _central_difference(loss_fn, params[name], flat_index)
        analytic = float(grads[name].reshape(-1)[flat_index])
        error = relative_error(analytic, numeric)
        max_error = max(max_error, error)
        if error >= tolerance:
            index = list(np.unravel_index(flat_index, tuple(params[name].shape)))
            failures.append(GradCheckEntry(tensor_name=name, index=[int(i) for i in index], analytic=analytic, numeric=numeric, relative_error=error))

    report = GradCheckReport(loss_kind=loss_kind.value, checked=len(entries), max_relative_error=max_error, tolerance=tolerance, failures=failures)
    logger.info("Gradient check finished", loss=loss_kind.value, checked=len(entries), max_relative_error=max_error, failures=len(failures))
    return report


def _sample_entries(params: dict, n_samples: int, rng: np.random.Generator) -> List[tuple]:
    names = list(params)
    sizes = np.array([params[name].numel() for name in names])
    offsets = np.concatenate([[0], np.cumsum(sizes)])
    picks = rng.choice(offsets[-1], size=min(n_samples, int(offsets[-1])), replace=False)
    entries = []
    for pick in np.sort(picks):
        slot = int(np.searchsorted(offsets, pick, side="right") - 1)
        entries.append((names[slot], int(pick - offsets[slot])))
    return entries


@torch.no_grad()
def _central_difference(loss_fn: Callable[[], torch.Tensor], param: torch.Tensor, flat_index: int) -> float:
    flat = param.view(-1)
    original = flat[flat_index].item()
    flat[flat_index] = original + STEP
    upper = loss_fn().item()
    flat[flat_index] = original - STEP
    lower = loss_fn().item()
    flat[flat_index] = original
    return (upper - lower) / (2 * STEP)
