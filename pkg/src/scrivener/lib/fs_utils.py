"""File helpers shared by every artifact writer."""

import os
import tempfile
from pathlib import Path

from scrivener.constants import Paths
from scrivener.lib.structured_logger import get_logger

logger = get_logger(__name__)


def atomic_write_bytes(path: Path, data: bytes) -> None:
    """Write ``data`` to ``path`` through a temp file in the same directory and ``os.replace``."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)

    fd, temp_path_str = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=Paths.TMP_EXTENSION)
    temp_path = Path(temp_path_str)

    try:
        with os.fdopen(fd, "wb") as f:
            f.write(data)
        os.replace(temp_path, path)
        logger.debug("Atomically wrote file", path=str(path), size=len(data))
    except Exception:
        if temp_path.exists():
            temp_path.unlink()
        raise


def atomic_write_text(path: Path, text: str) -> None:
    """UTF-8 variant of :func:`atomic_write_bytes`."""
    atomic_write_bytes(path, text.encode("utf-8"))
