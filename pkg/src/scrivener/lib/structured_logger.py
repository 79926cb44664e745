"""
Structured logging for Scrivener.

Loggers accept keyword fields next to the message::

    logger.info("Epoch finished", epoch=3, val_median_ned=0.12)

Fields travel on the log record and are rendered inline on the console and as
JSON objects by the optional JSON-lines file handler.
"""

import json
import logging
import sys
from datetime import datetime, timezone
from pathlib import Path
from typing import Any

from scrivener.constants import Paths

_RESERVED = {"exc_info", "stack_info", "stacklevel", "extra"}
_FILE_HANDLER_NAME = "scrivener-jsonl"


class StructuredLogger(logging.LoggerAdapter):
    """Logger adapter that moves keyword arguments into a ``fields`` record attribute."""

    def process(self, msg: Any, kwargs: dict[str, Any]) -> tuple[Any, dict[str, Any]]:
        fields = {key: kwargs.pop(key) for key in list(kwargs) if key not in _RESERVED}
        extra = dict(kwargs.pop("extra", None) or {})
        extra["fields"] = {**extra.get("fields", {}), **fields}
        kwargs["extra"] = extra
        return msg, kwargs


class ConsoleFormatter(logging.Formatter):
    """Human-readable single-line format with trailing key=value fields."""

    def format(self, record: logging.LogRecord) -> str:
        base = f"{record.levelname:<7} {record.name}: {record.getMessage()}"
        fields = getattr(record, "fields", None)
        if fields:
            base += " " + " ".join(f"{key}={value}" for key, value in fields.items())
        if record.exc_info:
            base += "\n" + self.formatException(record.exc_info)
        return base


class JsonLinesFormatter(logging.Formatter):
    """One JSON object per record."""

    def format(self, record: logging.LogRecord) -> str:
        payload = {
            "timestamp": datetime.fromtimestamp(record.created, tz=timezone.utc).isoformat(),
            "level": record.levelname,
            "logger": record.name,
            "message": record.getMessage(),
        }
        payload.update(getattr(record, "fields", {}) or {})
        if record.exc_info:
            payload["exception"] = self.formatException(record.exc_info)
        return json.dumps(payload, default=str, ensure_ascii=False)


def get_logger(name: str) -> StructuredLogger:
    """Return a structured logger for ``name``."""
    return StructuredLogger(logging.getLogger(name), {})


def setup_logging(level: str = "INFO", log_file: Path | None = None) -> None:
    """Configure the ``scrivener`` logger hierarchy.

    Args:
        level: Log level name (DEBUG, INFO, WARNING, ERROR)
        log_file: Optional JSON-lines file receiving every record
    """
    root = logging.getLogger("scrivener")
    root.setLevel(level.upper())
    root.propagate = False

    if not any(isinstance(h, logging.StreamHandler) and not isinstance(h, logging.FileHandler) for h in root.handlers):
        console = logging.StreamHandler(sys.stderr)
        console.setFormatter(ConsoleFormatter())
        root.addHandler(console)

    if log_file is not None:
        _attach_jsonl_handler(root, Path(log_file))


def setup_run_logging(run_dir: Path) -> Path:
    """Send all records of a pipeline run to ``run_dir/run.jsonl``."""
    log_file = Path(run_dir) / Paths.RUN_LOG_FILE
    _attach_jsonl_handler(logging.getLogger("scrivener"), log_file)
    return log_file


def _attach_jsonl_handler(root: logging.Logger, log_file: Path) -> None:
    for handler in list(root.handlers):
        if handler.get_name() == _FILE_HANDLER_NAME:
            root.removeHandler(handler)
            handler.close()

    log_file.parent.mkdir(parents=True, exist_ok=True)
    handler = logging.FileHandler(log_file, encoding="utf-8")
    handler.set_name(_FILE_HANDLER_NAME)
    handler.setFormatter(JsonLinesFormatter())
    root.addHandler(handler)
