"""
Environment settings for Scrivener using pydantic_settings
"""

from pathlib import Path
from typing import Optional

from pydantic_settings import BaseSettings, SettingsConfigDict

from scrivener import __version__
from scrivener.constants import Paths


class Settings(BaseSettings):
    """Application settings"""

    model_config = SettingsConfigDict(env_prefix="SCRIVENER_", case_sensitive=False, env_file=".env", env_file_encoding="utf-8", extra="ignore")

    # Logging
    log_level: str = "INFO"
    log_dir: Optional[Path] = None

    # Reproducibility
    num_threads: int = 1
    deterministic: bool = True

    version: str = __version__

    @property
    def packaged_config_file(self) -> Path:
        """Get the path to the default config file inside the package."""
        return Path(__file__).parent.parent / Paths.CONFIG_FILE

    @property
    def default_log_file(self) -> Optional[Path]:
        """JSON-lines log inside ``log_dir`` when one is configured."""
        return self.log_dir / Paths.LOG_FILE if self.log_dir is not None else None

    @property
    def packaged_templates_dir(self) -> Path:
        """Get the path to the report templates directory inside the package."""
        return Path(__file__).parent.parent / Paths.TEMPLATES_DIR

    @property
    def packaged_confusion_table(self) -> Path:
        """Get the path to the default letter/bigram confusion table."""
        return Path(__file__).parent.parent / "augment" / Paths.AUGMENT_DATA_DIR / Paths.CONFUSION_TABLE_FILE


# Global settings instance
settings = Settings()
