"""
Mini-batch training with validation-based model selection.

After every epoch the validation sources are decoded greedily; the epoch with
the lowest validation median normalised edit distance is kept (earlier epoch on
ties) and training stops after ``patience`` epochs without improvement.
"""

import copy
import csv
import io
import math
from pathlib import Path
from statistics import median
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import torch

from scrivener.constants import LogMessages
from scrivener.decoding.greedy import greedy_decode
from scrivener.errors import ConfigMismatchError, ConfigValidationError, TrainingDivergedError
from scrivener.lib.fs_utils import atomic_write_text
from scrivener.lib.structured_logger import get_logger
from scrivener.lm.ngram import NGramModel
from scrivener.metrics.distance import normalized_ed
from scrivener.models.schemas import HistoryRow, TextPair, TrainingHistory
from scrivener.models.scrivener_config import LossKind, ModelConfig, TrainConfig
from scrivener.seq2seq.model import Seq2SeqTransformer, init_params
from scrivener.text.vocab import Vocab
from scrivener.training.data import Batch, EncodedPair, collate, encode_pairs
from scrivener.training.losses import LossOutput, backward, robust_nll, smoothed_ce_loss
from scrivener.training.optimizer import AdamW

logger = get_logger(__name__)

HISTORY_COLUMNS = ["epoch", "train_loss", "val_median_ned", "val_mean_ned", "mean_responsibility_clean", "mean_responsibility_noisy"]


def compute_loss(model: Seq2SeqTransformer, batch: Batch, train_config: TrainConfig) -> LossOutput:
    """Teacher-forced loss of ``model`` on ``batch`` under the configured objective."""
    logits = model(batch.source, batch.decoder_input)
    if train_config.loss == LossKind.ROBUST:
        if batch.lm_log_prob is None:
            raise ConfigValidationError("the robust loss needs language-model scores for every pair")
        return robust_nll(logits, batch.target, batch.lm_log_prob, train_config.alpha, mask=batch.mask)
    return smoothed_ce_loss(logits, batch.target, train_config.label_smoothing, mask=batch.mask)


def validation_ned(model: Seq2SeqTransformer, examples: Sequence[EncodedPair], pairs: Sequence[TextPair], vocab: Vocab, max_len: Optional[int]) -> List[float]:
    """Normalised edit distance of each greedy translation against its teacher text."""
    scores = []
    for example, pair in zip(examples, pairs):
        prediction = greedy_decode(model, example.source, vocab=vocab, max_len=max_len)
        scores.append(normalized_ed(prediction.text, pair.teacher))
    return scores


def _build_model(model_config: ModelConfig, vocab: Vocab, train_config: TrainConfig, init_model: Optional[Seq2SeqTransformer]) -> Seq2SeqTransformer:
    if init_model is None:
        config = model_config.with_vocab_size(vocab.size).with_dropout(train_config.dropout)
        return init_params(config, seed=train_config.seed)

    if init_model.config.vocab_size != vocab.size:
        raise ConfigMismatchError(f"initial model has vocab size {init_model.config.vocab_size}, data vocab has {vocab.size}")
    model = Seq2SeqTransformer(init_model.config.with_dropout(train_config.dropout))
    model.load_state_dict(init_model.state_dict())
    return model


def train(
    train_pairs: Sequence[TextPair],
    val_pairs: Sequence[TextPair],
    vocab: Vocab,
    model_config: ModelConfig,
    train_config: TrainConfig,
    lm: Optional[NGramModel] = None,
    init_model: Optional[Seq2SeqTransformer] = None,
    history_path: Optional[Path] = None,
) -> Tuple[Seq2SeqTransformer, TrainingHistory]:
    """Train a model and return the best epoch's weights with the per-epoch history.

    Args:
        train_pairs: Training pairs, possibly carrying ``noisy`` flags
        val_pairs: Validation pairs used for model selection
        vocab: Shared vocabulary
        model_config: Architecture; its vocab size is replaced by ``vocab.size``
        train_config: Objective and optimisation settings
        lm: Fitted n-gram model, required for the robust loss
        init_model: Start from these weights instead of a fresh initialisation
        history_path: Optional CSV destination, rewritten after every epoch

    Raises:
        ConfigValidationError: If the robust loss is requested without a language model
        ConfigMismatchError: If the language model or init model disagree with ``vocab``
        TrainingDivergedError: If a batch loss becomes NaN or infinite
    """
    if not train_pairs or not val_pairs:
        raise ValueError("training needs at least one training pair and one validation pair")
    robust = train_config.loss == LossKind.ROBUST
    if robust:
        if lm is None:
            raise ConfigValidationError("the robust loss requires a fitted n-gram language model")
        if lm.vocab_size != vocab.size:
            raise ConfigMismatchError(f"language model vocab size {lm.vocab_size} differs from data vocab size {vocab.size}")

    torch.manual_seed(train_config.seed)
    rng = np.random.default_rng(train_config.seed)

    model = _build_model(model_config, vocab, train_config, init_model)
    max_seq_len = model.config.max_seq_len
    train_examples = encode_pairs(train_pairs, vocab, max_seq_len, lm if robust else None)
    val_examples = encode_pairs(val_pairs, vocab, max_seq_len)
    optimizer = AdamW(model.parameters(), lr=train_config.learning_rate, weight_decay=train_config.weight_decay)

    logger.info(
        "Training started",
        loss=train_config.loss.value,
        train_pairs=len(train_examples),
        val_pairs=len(val_examples),
        parameters=model.parameter_count(),
        seed=train_config.seed,
    )

    history = TrainingHistory()
    best_state: Optional[Dict[str, torch.Tensor]] = None
    best_score = math.inf
    stale_epochs = 0

    for epoch in range(1, train_config.max_epochs + 1):
        model.train()
        order = rng.permutation(len(train_examples))
        loss_sum = 0.0
        responsibility: Dict[bool, List[float]] = {False: [], True: []}

        for batch_index, start in enumerate(range(0, len(order), train_config.batch_size)):
            batch = collate([train_examples[i] for i in order[start : start + train_config.batch_size]])
            output = compute_loss(model, batch, train_config)
            if not torch.isfinite(output.loss):
                raise TrainingDivergedError(
                    f"loss became {output.loss.item()} at epoch {epoch}, batch {batch_index} "
                    f"(min sequence log-prob {output.sequence_log_probs.min().item():.4g})"
                )
            backward(output.loss, model)
            optimizer.step()

            loss_sum += output.loss.item() * batch.size
            if output.responsibilities is not None:
                for flag, w in zip(batch.noisy, output.responsibilities.tolist()):
                    responsibility[flag].append(w)

        model.eval()
        scores = validation_ned(model, val_examples, val_pairs, vocab, train_config.max_decode_len)
        row = HistoryRow(
            epoch=epoch,
            train_loss=loss_sum / len(train_examples),
            val_median_ned=float(median(scores)),
            val_mean_ned=float(np.mean(scores)),
            mean_responsibility_clean=float(np.mean(responsibility[False])) if responsibility[False] else None,
            mean_responsibility_noisy=float(np.mean(responsibility[True])) if responsibility[True] else None,
        )
        history.rows.append(row)
        logger.info(LogMessages.EPOCH_FINISHED.format(epoch=epoch), **row.model_dump(exclude={"epoch"}, exclude_none=True))

        if row.val_median_ned < best_score:
            best_score = row.val_median_ned
            best_state = copy.deepcopy(model.state_dict())
            history.best_epoch = epoch
            stale_epochs = 0
        else:
            stale_epochs += 1

        if history_path is not None:
            save_history(history, history_path)

        if stale_epochs >= train_config.patience:
            history.stopped_early = epoch < train_config.max_epochs
            logger.info("Early stopping", epoch=epoch, best_epoch=history.best_epoch)
            break

    model.load_state_dict(best_state)
    model.eval()
    logger.info("Training finished", best_epoch=history.best_epoch, best_val_median_ned=best_score)
    return model, history


@torch.no_grad()
def responsibilities(model: Seq2SeqTransformer, pairs: Sequence[TextPair], vocab: Vocab, lm: NGramModel, alpha: float) -> List[float]:
    """Posterior probability that each pair is clean under the robust mixture."""
    model.eval()
    examples = encode_pairs(pairs, vocab, model.config.max_seq_len, lm)
    values = []
    for example in examples:
        batch = collate([example])
        logits = model(batch.source, batch.decoder_input)
        output = robust_nll(logits, batch.target, batch.lm_log_prob, alpha, mask=batch.mask)
        values.append(float(output.responsibilities[0]))
    return values


def save_history(history: TrainingHistory, path: Path) -> Path:
    """Write the history as CSV; empty cells for unset responsibilities."""
    buffer = io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=HISTORY_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for row in history.rows:
        writer.writerow({key: ("" if value is None else value) for key, value in row.model_dump().items()})
    atomic_write_text(Path(path), buffer.getvalue())
    return Path(path)
