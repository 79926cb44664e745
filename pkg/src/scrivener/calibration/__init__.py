"""Calibration diagnostics, temperature scaling and rejection curves."""

from .events import collect_logits, collect_token_events, predictive_probs
from .rejection import DEFAULT_GRID, rejection_curve, retained_count
from .reliability import bin_index, calibration_report
from .temperature import fit_temperature, fit_temperature_from_logits, golden_section_minimize, temperature_nll

__all__ = [
    "DEFAULT_GRID",
    "bin_index",
    "calibration_report",
    "collect_logits",
    "collect_token_events",
    "fit_temperature",
    "fit_temperature_from_logits",
    "golden_section_minimize",
    "predictive_probs",
    "rejection_curve",
    "retained_count",
    "temperature_nll",
]
