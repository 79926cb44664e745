"""JSON-lines pair files."""

import json
from pathlib import Path
from typing import List

from pydantic import ValidationError

from scrivener.constants import ErrorMessages, LogMessages
from scrivener.errors import DataFormatError, MissingFieldError
from scrivener.lib.fs_utils import atomic_write_text
from scrivener.lib.structured_logger import get_logger
from scrivener.models.schemas import TextPair

logger = get_logger(__name__)

REQUIRED_FIELDS = ("student", "teacher")


def load_pairs(path: Path) -> List[TextPair]:
    """Read a UTF-8 JSON-lines pair file, preserving order.

    Blank lines are skipped.

    Raises:
        FileNotFoundError: If the file does not exist
        DataFormatError: If a line is not a JSON object of strings
        MissingFieldError: If a line lacks ``student`` or ``teacher``
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(ErrorMessages.FILE_NOT_FOUND.format(path=path))

    pairs: List[TextPair] = []
    with path.open(encoding="utf-8") as f:
        for line_number, line in enumerate(f, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as e:
                raise DataFormatError(ErrorMessages.MALFORMED_LINE.format(line_number=line_number, path=path, reason=e.msg), line_number=line_number) from e
            if not isinstance(record, dict):
                raise DataFormatError(ErrorMessages.MALFORMED_LINE.format(line_number=line_number, path=path, reason="expected a JSON object"), line_number=line_number)

            for field in REQUIRED_FIELDS:
                if field not in record:
                    raise MissingFieldError(ErrorMessages.MISSING_FIELD.format(line_number=line_number, path=path, field=field), field=field, line_number=line_number)

            try:
                pairs.append(TextPair(student=record["student"], teacher=record["teacher"], noisy=record.get("noisy")))
            except ValidationError as e:
                raise DataFormatError(ErrorMessages.MALFORMED_LINE.format(line_number=line_number, path=path, reason=str(e)), line_number=line_number) from e

    logger.debug(LogMessages.PAIRS_LOADED.format(count=len(pairs), path=path))
    return pairs


def save_pairs(pairs: List[TextPair], path: Path) -> Path:
    """Write pairs as JSON lines; ``noisy`` is written only when set."""
    lines = [json.dumps(pair.model_dump(exclude_none=True), ensure_ascii=False) for pair in pairs]
    text = "\n".join(lines) + ("\n" if lines else "")
    atomic_write_text(Path(path), text)
    logger.debug(LogMessages.PAIRS_SAVED.format(count=len(pairs), path=path))
    return Path(path)


def load_texts(path: Path) -> List[str]:
    """Read a plain text file, one text per non-blank line."""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(ErrorMessages.FILE_NOT_FOUND.format(path=path))
    return [line.rstrip("\n") for line in path.read_text(encoding="utf-8").splitlines() if line.strip()]


def is_pair_file(path: Path) -> bool:
    """True when the first non-blank line of ``path`` is a JSON object with a ``student`` field."""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(ErrorMessages.FILE_NOT_FOUND.format(path=path))
    with path.open(encoding="utf-8") as f:
        for line in f:
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError:
                return False
            return isinstance(record, dict) and "student" in record
    return False
