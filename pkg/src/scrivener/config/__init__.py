"""Scrivener configuration module."""

from scrivener.models.scrivener_config import ScrivenerConfig

from .manager import ConfigManager

__all__ = ["ConfigManager", "ScrivenerConfig"]
