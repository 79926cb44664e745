"""Configuration manager for Scrivener."""

from pathlib import Path
from typing import Any

from pydantic import ValidationError
import yaml

from scrivener.config.settings import settings
from scrivener.errors import ConfigValidationError
from scrivener.lib.fs_utils import atomic_write_text
from scrivener.lib.structured_logger import get_logger
from scrivener.models.scrivener_config import ScrivenerConfig

logger = get_logger(__name__)


class ConfigManager:
    """Loads, overrides and saves the YAML configuration."""

    def __init__(self, config_path: Path | None = None):
        """Initialize the config manager.

        Args:
            config_path: YAML file to read; the packaged default is used when omitted
        """
        self.config_path = Path(config_path) if config_path is not None else settings.packaged_config_file
        self._explicit = config_path is not None
        self._config: ScrivenerConfig | None = None

    def load(self) -> ScrivenerConfig:
        """Load configuration from disk.

        Returns:
            Loaded configuration

        Raises:
            FileNotFoundError: If an explicitly named config file doesn't exist
            ConfigValidationError: If the file content fails validation
        """
        if not self.config_path.exists():
            if self._explicit:
                raise FileNotFoundError(f"Configuration file not found: {self.config_path}")
            self._config = ScrivenerConfig()
            return self._config

        try:
            with self.config_path.open(encoding="utf-8") as f:
                data = yaml.safe_load(f) or {}
            self._config = ScrivenerConfig(**data)
        except (ValidationError, yaml.YAMLError) as e:
            logger.error("Failed to load configuration", config_path=str(self.config_path), error=str(e))
            raise ConfigValidationError(f"Invalid configuration in {self.config_path}: {e}") from e

        logger.debug("Configuration loaded", config_path=str(self.config_path))
        return self._config

    def save(self, config: ScrivenerConfig, path: Path | None = None) -> Path:
        """Save configuration to disk.

        Args:
            config: Configuration to save
            path: Destination, defaults to the manager's config path
        """
        target = Path(path) if path is not None else self.config_path
        data = config.model_dump(mode="json", exclude={"augment": {"confusion_table"}})
        atomic_write_text(target, yaml.safe_dump(data, default_flow_style=False, sort_keys=False))
        self._config = config
        logger.info("Configuration saved", config_path=str(target))
        return target

    def get(self) -> ScrivenerConfig:
        """Get the current configuration.

        Raises:
            RuntimeError: If configuration not loaded
        """
        if self._config is None:
            raise RuntimeError("Configuration not loaded")
        return self._config

    def apply_overrides(self, **overrides: Any) -> ScrivenerConfig:
        """Apply flag overrides given as ``section__field=value`` keyword arguments.

        ``None`` values are skipped so that unset flags keep the file value.

        Raises:
            RuntimeError: If configuration not loaded
            ConfigValidationError: If an override names an unknown field or fails validation
        """
        config = self.get()
        data = config.model_dump()

        for dotted, value in overrides.items():
            if value is None:
                continue
            *sections, field = dotted.split("__")
            node = data
            for section in sections:
                if section not in node or not isinstance(node[section], dict):
                    raise ConfigValidationError(f"Unknown config section: {'.'.join(sections)}")
                node = node[section]
            if field not in node:
                raise ConfigValidationError(f"Unknown config field: {dotted.replace('__', '.')}")
            node[field] = value
            if dotted == "augment__confusion_table_path":
                node.pop("confusion_table", None)

        try:
            self._config = ScrivenerConfig(**data)
        except ValidationError as e:
            raise ConfigValidationError(f"Invalid override: {e}") from e
        return self._config
