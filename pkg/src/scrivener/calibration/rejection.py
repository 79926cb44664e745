"""Accuracy-rejection curves driven by sequence confidence."""

import math
from typing import Literal, Optional, Sequence, Tuple

import numpy as np

from scrivener.models.schemas import RejectionCurve, RejectionPoint

Aggregate = Literal["mean", "mae"]
DEFAULT_GRID = tuple(round(0.05 * i, 2) for i in range(20))


def retained_count(rejection: float, total: int) -> int:
    """Items kept when the fraction ``rejection`` of least confident items is dropped."""
    return math.ceil(round((1.0 - rejection) * total, 9))


def rejection_curve(
    samples: Sequence[Tuple[float, float]],
    aggregate: Aggregate = "mean",
    grid: Optional[Sequence[float]] = None,
    metric: str = "ned",
) -> RejectionCurve:
    """Metric on the most confident items as the rejected fraction grows.

    ``samples`` are ``(confidence, value)`` pairs. With ``aggregate="mae"`` the
    values are signed errors and the retained set reports their mean absolute
    value. Equal confidences keep their input order.

    Raises:
        ValueError: If ``samples`` is empty or a grid value lies outside [0, 1)
    """
    if not samples:
        raise ValueError("rejection curve needs at least one sample")
    grid = list(DEFAULT_GRID if grid is None else grid)
    if any(not 0.0 <= r < 1.0 for r in grid):
        raise ValueError("rejection grid values must lie in [0, 1)")
    if aggregate not in ("mean", "mae"):
        raise ValueError(f"unknown aggregate {aggregate!r}")

    confidence = np.array([c for c, _ in samples], dtype=np.float64)
    values = np.array([v for _, v in samples], dtype=np.float64)
    if aggregate == "mae":
        values = np.abs(values)
    ranked = values[np.argsort(-confidence, kind="stable")]

    points = []
    for r in grid:
        kept = retained_count(r, len(ranked))
        points.append(RejectionPoint(rejection=r, retained=kept, value=float(ranked[:kept].mean())))
    return RejectionCurve(metric=metric, points=points)
