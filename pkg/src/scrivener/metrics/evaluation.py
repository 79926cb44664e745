"""Aggregate translation quality against teacher texts."""

from typing import List, Optional, Sequence, Tuple

import numpy as np

from scrivener.errors import DataFormatError
from scrivener.metrics.distance import edit_distance, normalized_ed
from scrivener.metrics.readability import flesch_kincaid, lix, text_stats
from scrivener.models.schemas import MetricsReport, PairMetrics, TextPair


def mae(predictions: Sequence[float], truths: Sequence[float]) -> float:
    """Mean absolute error.

    Raises:
        ValueError: On empty input or a length mismatch
    """
    if len(predictions) != len(truths):
        raise ValueError(f"length mismatch: {len(predictions)} predictions vs {len(truths)} truths")
    if len(predictions) == 0:
        raise ValueError("mae of empty lists is undefined")
    return float(np.mean(np.abs(np.asarray(predictions, dtype=np.float64) - np.asarray(truths, dtype=np.float64))))


def summarize(values: Sequence[float]) -> Tuple[float, float, float]:
    """``(mean, median, sem)`` with the sample standard deviation; sem is 0 for one value.

    Raises:
        ValueError: If ``values`` is empty
    """
    if len(values) == 0:
        raise ValueError("cannot summarize an empty list")
    array = np.asarray(values, dtype=np.float64)
    sem = float(array.std(ddof=1) / np.sqrt(array.size)) if array.size > 1 else 0.0
    return float(array.mean()), float(np.median(array)), sem


def pair_metrics(pairs: Sequence[TextPair], predictions: Sequence[str], confidences: Optional[Sequence[Optional[float]]] = None) -> List[PairMetrics]:
    """Per-pair distances and readability scores of ``predictions`` against the teacher texts.

    Raises:
        DataFormatError: If the lists are not aligned
    """
    if len(pairs) != len(predictions):
        raise DataFormatError(f"{len(pairs)} pairs but {len(predictions)} predictions")
    if confidences is not None and len(confidences) != len(pairs):
        raise DataFormatError(f"{len(pairs)} pairs but {len(confidences)} confidences")

    rows = []
    for index, (pair, prediction) in enumerate(zip(pairs, predictions)):
        pred_stats, true_stats = text_stats(prediction), text_stats(pair.teacher)
        rows.append(
            PairMetrics(
                ed=edit_distance(prediction, pair.teacher),
                ned=normalized_ed(prediction, pair.teacher),
                fk_pred=flesch_kincaid(pred_stats),
                fk_true=flesch_kincaid(true_stats),
                lix_pred=lix(pred_stats),
                lix_true=lix(true_stats),
                confidence=confidences[index] if confidences is not None else None,
            )
        )
    return rows


def report_from_rows(rows: Sequence[PairMetrics]) -> MetricsReport:
    """Summaries of per-pair values; FK and LIX errors are absolute differences."""
    if not rows:
        raise ValueError("cannot build a report from zero pairs")
    ed_mean, ed_median, ed_sem = summarize([r.ed for r in rows])
    ned_mean, ned_median, ned_sem = summarize([r.ned for r in rows])
    fk_mae, _, fk_sem = summarize([abs(r.fk_pred - r.fk_true) for r in rows])
    lix_mae, _, lix_sem = summarize([abs(r.lix_pred - r.lix_true) for r in rows])
    return MetricsReport(
        n=len(rows),
        mean_ed=ed_mean,
        mean_ed_sem=ed_sem,
        median_ed=ed_median,
        mean_ned=ned_mean,
        mean_ned_sem=ned_sem,
        median_ned=ned_median,
        fk_mae=fk_mae,
        fk_mae_sem=fk_sem,
        lix_mae=lix_mae,
        lix_mae_sem=lix_sem,
    )


def evaluate(pairs: Sequence[TextPair], predictions: Sequence[str]) -> MetricsReport:
    """Distances and readability errors of ``predictions`` against the teacher texts."""
    return report_from_rows(pair_metrics(pairs, predictions))
