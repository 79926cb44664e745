"""Letter/bigram confusion tables for simulated misspellings."""

from pathlib import Path
from typing import Dict, List

from scrivener.constants import ErrorMessages
from scrivener.errors import DataFormatError


def load_confusion_table(path: Path) -> Dict[str, List[str]]:
    """Read a two-column ``key<TAB>replacement`` file.

    Lines starting with ``#`` and blank lines are ignored. Repeated keys
    accumulate candidates in file order.

    Raises:
        FileNotFoundError: If the file does not exist
        DataFormatError: If a line does not have exactly two tab-separated columns
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(ErrorMessages.FILE_NOT_FOUND.format(path=path))

    table: Dict[str, List[str]] = {}
    for line_number, line in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        if not line.strip() or line.startswith("#"):
            continue
        columns = line.split("\t")
        if len(columns) != 2 or not columns[0] or not columns[1]:
            raise DataFormatError(f"Line {line_number} of {path} must be 'key<TAB>replacement'", line_number=line_number)
        key, replacement = columns
        table.setdefault(key, []).append(replacement)
    return table


def load_default_confusion_table() -> Dict[str, List[str]]:
    """The confusion table packaged with Scrivener."""
    from scrivener.config.settings import settings

    return load_confusion_table(settings.packaged_confusion_table)
