"""Scrivener: translate early-stage writing into conventional writing."""

__version__ = "1.0.0"
