"""Expected and maximum calibration error over equal-width confidence bins."""

import math
from typing import Sequence

import numpy as np

from scrivener.models.schemas import CalibrationBin, CalibrationReport, TokenEvent


def bin_index(confidence: float, bins: int) -> int:
    """1-based bin m with ``(m - 1) / M < confidence <= m / M``; zero falls into bin 1."""
    m = math.ceil(round(confidence * bins, 9))
    return min(max(m, 1), bins)


def calibration_report(events: Sequence[TokenEvent], bins: int = 10) -> CalibrationReport:
    """ECE is the count-weighted mean gap between accuracy and confidence, MCE the largest gap.

    Raises:
        ValueError: If there are no events or ``bins < 1``
    """
    if not events:
        raise ValueError("calibration report needs at least one event")
    if bins < 1:
        raise ValueError(f"bins must be >= 1, got {bins}")

    index = np.array([bin_index(e.confidence, bins) for e in events])
    confidence = np.array([e.confidence for e in events], dtype=np.float64)
    correct = np.array([e.correct for e in events], dtype=np.float64)
    total = len(events)

    ece, mce = 0.0, 0.0
    rows = []
    for m in range(1, bins + 1):
        members = index == m
        count = int(members.sum())
        row = CalibrationBin(lower=(m - 1) / bins, upper=m / bins, count=count)
        if count:
            row.mean_confidence = float(confidence[members].mean())
            row.accuracy = float(correct[members].mean())
            gap = abs(row.accuracy - row.mean_confidence)
            ece += count / total * gap
            mce = max(mce, gap)
        rows.append(row)

    return CalibrationReport(ece=ece, mce=mce, bins=rows)
