"""
Temperature scaling fitted on validation likelihood.

The teacher-forced negative log-likelihood is minimised over u = log T on
[log 0.05, log 10], by golden-section search (default) or a log-spaced grid.
The result is never worse than T = 1.
"""

import math
from typing import Callable, Sequence

import numpy as np
import torch
from torch import nn

from scrivener.calibration.events import collect_logits
from scrivener.lib.structured_logger import get_logger
from scrivener.models.schemas import TemperatureScaler, TextPair
from scrivener.models.scrivener_config import TemperatureSearch
from scrivener.text.vocab import Vocab

logger = get_logger(__name__)

T_MIN = 0.05
T_MAX = 10.0
TOLERANCE = 1e-3
_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


def temperature_nll(logits: torch.Tensor, targets: torch.Tensor, temperature: float) -> float:
    """Summed negative log-likelihood of ``targets`` under ``softmax(logits / T)``."""
    log_probs = torch.log_softmax(logits.to(torch.float64) / temperature, dim=-1)
    return float(-log_probs.gather(-1, targets.unsqueeze(-1)).sum())


def golden_section_minimize(fn: Callable[[float], float], lower: float, upper: float, tolerance: float = TOLERANCE) -> float:
    """Minimiser of a unimodal ``fn`` on ``[lower, upper]`` to within ``tolerance``."""
    a, b = lower, upper
    c = b - _INV_PHI * (b - a)
    d = a + _INV_PHI * (b - a)
    fc, fd = fn(c), fn(d)
    while b - a > tolerance:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - _INV_PHI * (b - a)
            fc = fn(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INV_PHI * (b - a)
            fd = fn(d)
        logger.debug("Golden-section step", lower=a, upper=b)
    return (a + b) / 2.0


def fit_temperature_from_logits(
    logits: torch.Tensor,
    targets: torch.Tensor,
    search: TemperatureSearch = TemperatureSearch.GOLDEN,
    grid_points: int = 50,
) -> TemperatureScaler:
    """Fit T on precomputed logits (N, K) and true targets (N,)."""
    if targets.numel() == 0:
        raise ValueError("temperature fitting needs at least one target token")

    def objective(log_t: float) -> float:
        return temperature_nll(logits, targets, math.exp(log_t))

    if search == TemperatureSearch.GRID:
        candidates = np.geomspace(T_MIN, T_MAX, grid_points)
        best = float(min(candidates, key=lambda t: temperature_nll(logits, targets, float(t))))
    else:
        best = math.exp(golden_section_minimize(objective, math.log(T_MIN), math.log(T_MAX)))

    nll_best, nll_unit = temperature_nll(logits, targets, best), temperature_nll(logits, targets, 1.0)
    if nll_unit <= nll_best:
        best, nll_best = 1.0, nll_unit

    logger.info("Fitted temperature", temperature=best, nll=nll_best, nll_at_1=nll_unit, search=search.value)
    return TemperatureScaler(temperature=best)


def fit_temperature(
    model: nn.Module,
    val_pairs: Sequence[TextPair],
    vocab: Vocab,
    search: TemperatureSearch = TemperatureSearch.GOLDEN,
    grid_points: int = 50,
) -> TemperatureScaler:
    """Temperature maximising the teacher-forced likelihood of ``val_pairs``; weights are untouched."""
    if not val_pairs:
        raise ValueError("temperature fitting needs at least one validation pair")
    logits, targets = collect_logits(model, val_pairs, vocab)
    return fit_temperature_from_logits(logits, targets, search=search, grid_points=grid_points)
