"""Versioned binary file format for n-gram models.

Layout (little-endian)::

    magic "NGLM" | u32 version | u32 order | f64 k | u32 K | u32 bos_id
    u32 n_chars | UTF-8 JSON list of vocabulary characters (n_chars bytes)
    per order m = 1..n: u32 entries | u32[entries, m] (history..., token) | u64[entries] counts

History counts are not stored; they are recomputed from the n-gram counts.
"""

import io
import json
import struct
from pathlib import Path
from typing import List, Optional, Tuple

import numpy as np

from scrivener.constants import FileFormats
from scrivener.errors import LanguageModelFormatError
from scrivener.lib.fs_utils import atomic_write_bytes
from scrivener.lib.structured_logger import get_logger
from scrivener.lm.ngram import NGramModel

logger = get_logger(__name__)

_HEADER = struct.Struct("<4sIIdII")
_U32 = struct.Struct("<I")


def save_lm(model: NGramModel, path: Path, characters: Optional[List[str]] = None) -> Path:
    """Write ``model`` (and optionally the vocabulary it was fitted on) to ``path``."""
    buffer = io.BytesIO()
    buffer.write(_HEADER.pack(FileFormats.LM_MAGIC, FileFormats.LM_VERSION, model.order, model.k, model.vocab_size, model.bos_id))

    chars_blob = json.dumps(characters, ensure_ascii=False).encode("utf-8") if characters is not None else b""
    buffer.write(_U32.pack(len(chars_blob)))
    buffer.write(chars_blob)

    for level, table in enumerate(model.ngram_counts):
        entries = sorted(table.items())
        buffer.write(_U32.pack(len(entries)))
        keys = np.array([list(history) + [token] for (history, token), _ in entries], dtype="<u4").reshape(len(entries), level + 1)
        counts = np.array([count for _, count in entries], dtype="<u8")
        buffer.write(keys.tobytes())
        buffer.write(counts.tobytes())

    atomic_write_bytes(Path(path), buffer.getvalue())
    logger.info("Saved n-gram model", path=str(path), order=model.order, vocab_size=model.vocab_size)
    return Path(path)


def load_lm(path: Path) -> Tuple[NGramModel, Optional[List[str]]]:
    """Read a model written by :func:`save_lm`.

    Returns:
        The model and the stored vocabulary characters (``None`` if absent)

    Raises:
        FileNotFoundError: If the file does not exist
        LanguageModelFormatError: On bad magic, unsupported version, truncation or a malformed header
    """
    path = Path(path)
    data = path.read_bytes()
    reader = _Reader(data, path)

    magic, version, order, k, vocab_size, bos_id = reader.unpack(_HEADER)
    if magic != FileFormats.LM_MAGIC:
        raise LanguageModelFormatError(f"{path} is not an n-gram model file (magic {magic!r})")
    if version != FileFormats.LM_VERSION:
        raise LanguageModelFormatError(f"{path} has format version {version}, expected {FileFormats.LM_VERSION}")

    (n_chars,) = reader.unpack(_U32)
    characters = _read_characters(reader.take(n_chars), path) if n_chars else None

    try:
        model = NGramModel(order=order, k=k, vocab_size=vocab_size, bos_id=bos_id)
    except ValueError as e:
        raise LanguageModelFormatError(f"{path} has an invalid header: {e}") from e
    for level in range(order):
        (entries,) = reader.unpack(_U32)
        keys = np.frombuffer(reader.take(entries * (level + 1) * 4), dtype="<u4").reshape(entries, level + 1)
        counts = np.frombuffer(reader.take(entries * 8), dtype="<u8")
        for key, count in zip(keys.tolist(), counts.tolist()):
            model.add_count(tuple(key[:-1]), key[-1], count)

    if not reader.exhausted:
        raise LanguageModelFormatError(f"{path} has trailing bytes after the count tables")
    return model, characters


def _read_characters(blob: bytes, path: Path) -> List[str]:
    try:
        characters = json.loads(blob.decode("utf-8"))
    except ValueError as e:
        raise LanguageModelFormatError(f"{path} has a malformed vocabulary block: {e}") from e
    if not isinstance(characters, list) or not all(isinstance(ch, str) for ch in characters):
        raise LanguageModelFormatError(f"{path} vocabulary block is not a list of characters")
    return characters


class _Reader:
    def __init__(self, data: bytes, path: Path):
        self.data = data
        self.path = path
        self.offset = 0

    def take(self, size: int) -> bytes:
        if self.offset + size > len(self.data):
            raise LanguageModelFormatError(f"{self.path} is truncated at byte {len(self.data)}")
        chunk = self.data[self.offset : self.offset + size]
        self.offset += size
        return chunk

    def unpack(self, fmt: struct.Struct) -> tuple:
        return fmt.unpack(self.take(fmt.size))

    @property
    def exhausted(self) -> bool:
        return self.offset == len(self.data)
