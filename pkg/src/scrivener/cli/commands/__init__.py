"""Subcommand implementations; importing this package registers them."""

from . import data, evaluation, model, pipeline

__all__ = ["data", "evaluation", "model", "pipeline"]
