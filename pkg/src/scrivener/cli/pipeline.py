"""
End-to-end experiment: augment, split, inject noise, fit the n-gram model,
train every variant, translate the test split, then evaluate, calibrate and
compute rejection curves. Produces ``summary.json`` and ``summary.md``.
"""

from contextlib import contextmanager
from pathlib import Path
from typing import Any, Dict, Iterator, List, Optional, Sequence

import numpy as np

from scrivener.augment.corruption import generate_pairs
from scrivener.calibration.events import collect_token_events
from scrivener.calibration.rejection import rejection_curve
from scrivener.calibration.reliability import calibration_report
from scrivener.calibration.temperature import fit_temperature
from scrivener.cli.reports import render_summary, write_json, write_jsonl
from scrivener.constants import ErrorMessages, LogMessages, Paths
from scrivener.decoding.greedy import identity_translate, translate_texts
from scrivener.errors import ConfigValidationError, StageFailedError
from scrivener.lib.fs_utils import atomic_write_text
from scrivener.lib.structured_logger import get_logger, setup_run_logging
from scrivener.lm.ngram import fit as fit_ngram
from scrivener.lm.persistence import save_lm
from scrivener.metrics.evaluation import pair_metrics, report_from_rows
from scrivener.models.schemas import TextPair, TranslationResult
from scrivener.models.scrivener_config import LossKind, ScrivenerConfig
from scrivener.seq2seq.checkpoint import save_checkpoint
from scrivener.seq2seq.model import Seq2SeqTransformer
from scrivener.text.dataset import inject_pair_noise, save_split, split_dataset
from scrivener.text.pairs import load_texts, save_pairs
from scrivener.text.vocab import Vocab, encode_target, pair_vocab
from scrivener.training.trainer import save_history, train

logger = get_logger(__name__)

SUMMARY_JSON = "summary.json"
SUMMARY_MD = "summary.md"
REPORTED_REJECTION = 0.25


@contextmanager
def stage(name: str) -> Iterator[None]:
    """Log a stage and re-raise any failure as :class:`StageFailedError` naming it."""
    logger.info(LogMessages.STAGE_STARTED.format(stage=name))
    try:
        yield
    except StageFailedError:
        raise
    except Exception as e:
        logger.error(ErrorMessages.STAGE_FAILED.format(stage=name, error=e), exc_info=True)
        raise StageFailedError(ErrorMessages.STAGE_FAILED.format(stage=name, error=e), stage=name) from e
    logger.info(LogMessages.STAGE_FINISHED.format(stage=name))


def _row(name: str, test: Sequence[TextPair], predictions: List[str], confidences: Optional[List[float]] = None, calibration=None) -> Dict[str, Any]:
    rows = pair_metrics(test, predictions, confidences)
    summary: Dict[str, Any] = {"name": name, **report_from_rows(rows).model_dump(), "ece": None, "mce": None, "ned_at_rejection": None}
    if calibration is not None:
        summary["ece"], summary["mce"] = calibration.ece, calibration.mce
    if confidences is not None:
        curve = rejection_curve([(r.confidence, r.ned) for r in rows], grid=[0.0, REPORTED_REJECTION], metric="mean_ned")
        summary["ned_at_rejection"] = curve.value_at(REPORTED_REJECTION)
    return summary


def _median_row(name: str, seed_rows: Sequence[Dict[str, Any]]) -> Dict[str, Any]:
    """Per-field median over the rows of one variant trained with several seeds."""
    merged: Dict[str, Any] = {"name": name, "seeds": [row["seed"] for row in seed_rows]}
    for key in seed_rows[0]:
        if key in merged or key == "seed":
            continue
        values = [row[key] for row in seed_rows]
        if any(value is None for value in values):
            merged[key] = None
        elif len(set(values)) == 1:
            merged[key] = values[0]
        else:
            merged[key] = float(np.median(values))
    return merged


class ExperimentPipeline:
    """Holds the shared state of one experiment run rooted at ``output_dir``."""

    def __init__(self, config: ScrivenerConfig, output_dir: Path):
        if config.pipeline.corpus is None:
            raise ConfigValidationError("the pipeline needs pipeline.corpus (or --corpus)")
        if config.seed is None:
            raise ConfigValidationError("the pipeline needs a seed")
        self.config = config
        self.seed = config.seed
        self.output_dir = Path(output_dir)
        self.vocab: Optional[Vocab] = None
        self.lm_path = self.output_dir / config.paths.lm_dir.name / f"order{config.lm.order}.lm"
        self.lm = None

    def _checkpoint(self, name: str) -> Path:
        return self.output_dir / self.config.paths.checkpoint_dir.name / f"{name}.ckpt"

    def train_variant(self, name: str, train_pairs: Sequence[TextPair], val_pairs: Sequence[TextPair], loss: LossKind, seed: int) -> Seq2SeqTransformer:
        update: Dict[str, Any] = {"loss": loss, "seed": seed}
        if loss == LossKind.ROBUST:
            update.update(alpha=self.config.pipeline.robust_alpha, lm_path=self.lm_path)
        train_config = self.config.train.model_copy(update=update)
        model, history = train(train_pairs, val_pairs, self.vocab, self.config.model, train_config, lm=self.lm if loss == LossKind.ROBUST else None)
        save_checkpoint(model, self.vocab, self._checkpoint(name))
        save_history(history, self._checkpoint(name).with_suffix(".history" + Paths.CSV_EXTENSION))
        return model

    def translate(self, name: str, models: List[Seq2SeqTransformer], test: Sequence[TextPair], temperature: float = 1.0) -> List[TranslationResult]:
        results = translate_texts(models, [pair.student for pair in test], self.vocab, temperature=temperature, max_len=self.config.decoding.max_len)
        write_jsonl(
            self.output_dir / "translations" / f"{name}{Paths.JSONL_EXTENSION}",
            ({"student": pair.student, "prediction": r.text, "confidence": r.confidence} for pair, r in zip(test, results)),
        )
        return results

    def train_and_evaluate(
        self, name: str, train_pairs: Sequence[TextPair], val: Sequence[TextPair], test: Sequence[TextPair], loss: LossKind, seed: int, rows: List[Dict[str, Any]]
    ) -> Seq2SeqTransformer:
        """Train one variant, translate the test split and append its summary row."""
        with stage(f"train:{name}"):
            model = self.train_variant(name, train_pairs, val, loss, seed)
        with stage(f"eval:{name}"):
            results = self.translate(name, [model], test)
            calibration = calibration_report(collect_token_events(model, test, self.vocab), bins=self.config.calibration.bins)
            row = _row(name, test, [r.text for r in results], [r.confidence for r in results], calibration)
            row["seed"] = seed
            rows.append(row)
        return model

    def run(self) -> Dict[str, Any]:
        config, seed = self.config, self.seed
        setup_run_logging(self.output_dir)
        rows: List[Dict[str, Any]] = []

        with stage("augment"):
            augment_config = config.augment.model_copy(update={"seed": seed})
            pairs = generate_pairs(load_texts(config.pipeline.corpus), augment_config)
            save_pairs(pairs, self.output_dir / "data" / f"pairs{Paths.JSONL_EXTENSION}")

        with stage("split"):
            split = split_dataset(pairs, ratios=config.split.ratios, seed=seed)
            save_split(split, self.output_dir / "data" / "pairs")
            noisy_train = inject_pair_noise(split.train, config.pipeline.noise_rate, seed=seed)
            save_pairs(noisy_train, self.output_dir / "data" / f"pairs.train.noisy{Paths.JSONL_EXTENSION}")
            self.vocab = pair_vocab(list(split.train) + list(split.validation))

        with stage("lm-train"):
            self.lm = fit_ngram([encode_target(p.teacher, self.vocab) for p in split.train], order=config.lm.order, k=config.lm.k, vocab_size=self.vocab.size)
            save_lm(self.lm, self.lm_path, characters=self.vocab.characters)

        test, val = split.test, split.validation
        with stage("identity"):
            rows.append(_row("Identity", test, [identity_translate(p.student).text for p in test]))

        models: Dict[str, Seq2SeqTransformer] = {}
        for name, loss in (("smoothed_ce", LossKind.SMOOTHED_CE), ("robust", LossKind.ROBUST)):
            models[name] = self.train_and_evaluate(name, split.train, val, test, loss, seed, rows)

        noise_seeds = [seed + offset for offset in range(config.pipeline.noise_seeds)]
        for name, loss in (("smoothed_ce_noisy", LossKind.SMOOTHED_CE), ("robust_noisy", LossKind.ROBUST)):
            seed_rows: List[Dict[str, Any]] = []
            for variant_seed in noise_seeds:
                self.train_and_evaluate(f"{name}_seed{variant_seed}", noisy_train, val, test, loss, variant_seed, seed_rows)
            rows.extend(seed_rows)
            rows.append(_median_row(name, seed_rows))

        with stage("calibrate"):
            model = models["smoothed_ce"]
            scaler = fit_temperature(model, val, self.vocab, search=config.calibration.search, grid_points=config.calibration.grid_points)
            val_before = calibration_report(collect_token_events(model, val, self.vocab), bins=config.calibration.bins)
            val_after = calibration_report(collect_token_events(model, val, self.vocab, temperature=scaler.T), bins=config.calibration.bins)
            logger.info("Fitted temperature", temperature=scaler.T, val_ece_before=val_before.ece, val_ece_after=val_after.ece)

            results = self.translate("smoothed_ce_temperature", [model], test, temperature=scaler.T)
            calibration = calibration_report(collect_token_events(model, test, self.vocab, temperature=scaler.T), bins=config.calibration.bins)
            row = _row("smoothed_ce_temperature", test, [r.text for r in results], [r.confidence for r in results], calibration)
            row.update(temperature=scaler.T, val_ece_before=val_before.ece, val_ece_after=val_after.ece)
            rows.append(row)

        size = config.pipeline.ensemble_size
        if size > 0:
            with stage("ensemble"):
                members = [models["smoothed_ce"]]
                for offset in range(1, size):
                    members.append(self.train_variant(f"smoothed_ce_seed{seed + offset}", split.train, val, LossKind.SMOOTHED_CE, seed + offset))
                results = self.translate("ensemble", members, test)
                calibration = calibration_report(collect_token_events(members, test, self.vocab), bins=config.calibration.bins)
                rows.append(_row(f"ensemble_{size}", test, [r.text for r in results], [r.confidence for r in results], calibration))

        summary = {
            "corpus": str(config.pipeline.corpus),
            "seed": seed,
            "sizes": dict(zip(("train", "validation", "test"), split.sizes)),
            "noise_rate": config.pipeline.noise_rate,
            "noise_seeds": noise_seeds,
            "temperature": scaler.T,
            "val_ece_before": val_before.ece,
            "val_ece_after": val_after.ece,
            "rows": rows,
        }
        with stage("report"):
            write_json(self.output_dir / SUMMARY_JSON, summary)
            atomic_write_text(self.output_dir / SUMMARY_MD, render_summary(summary))
        return summary


def experiment_pipeline(config: ScrivenerConfig, output_dir: Optional[Path] = None) -> Dict[str, Any]:
    """Run the whole experiment and return the summary written to ``summary.json``.

    Raises:
        ConfigValidationError: If no corpus or seed is configured
        StageFailedError: Naming the first stage that failed
    """
    return ExperimentPipeline(config, output_dir or config.pipeline.output_dir).run()
