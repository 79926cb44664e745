"""
Versioned binary checkpoints.

Layout (little-endian)::

    magic "SQ2Q" | u32 version | u32 header length | header JSON (UTF-8)
    per tensor, in header order: f32 data (row-major, shape from the header)

The header carries the model config, the vocabulary characters and the name
and shape of every tensor.
"""

import io
import json
import struct
from pathlib import Path
from typing import List, Tuple

import numpy as np
import torch

from scrivener.constants import ErrorMessages, FileFormats, LogMessages
from scrivener.errors import CheckpointHeaderError, CheckpointShapeError, CheckpointTruncatedError, CheckpointVersionError
from scrivener.lib.fs_utils import atomic_write_bytes
from scrivener.lib.structured_logger import get_logger
from scrivener.models.scrivener_config import ModelConfig
from scrivener.seq2seq.model import Seq2SeqTransformer
from scrivener.text.vocab import Vocab

logger = get_logger(__name__)

_PREAMBLE = struct.Struct("<4sII")


def save_checkpoint(model: Seq2SeqTransformer, vocab: Vocab, path: Path) -> Path:
    """Write ``model`` with its config and vocabulary to ``path``."""
    path = Path(path)
    state = model.state_dict()
    header = {
        "model_config": model.config.model_dump(),
        "vocab": vocab.characters,
        "tensors": [{"name": name, "shape": list(tensor.shape)} for name, tensor in state.items()],
    }
    header_bytes = json.dumps(header, sort_keys=True, ensure_ascii=False).encode("utf-8")

    buffer = io.BytesIO()
    buffer.write(_PREAMBLE.pack(FileFormats.CHECKPOINT_MAGIC, FileFormats.CHECKPOINT_VERSION, len(header_bytes)))
    buffer.write(header_bytes)
    for tensor in state.values():
        buffer.write(tensor.detach().cpu().to(torch.float32).numpy().astype("<f4").tobytes())

    atomic_write_bytes(path, buffer.getvalue())
    logger.info(LogMessages.CHECKPOINT_SAVED.format(path=path), parameters=model.parameter_count())
    return path


def load_checkpoint(path: Path) -> Tuple[Seq2SeqTransformer, ModelConfig, Vocab]:
    """Read a checkpoint written by :func:`save_checkpoint`.

    The returned model is in eval mode.

    Raises:
        FileNotFoundError: If ``path`` does not exist
        CheckpointVersionError: Wrong magic bytes or format version
        CheckpointShapeError: Stored tensors disagree with the stored config
        CheckpointTruncatedError: The file ends early or has trailing bytes
        CheckpointHeaderError: The header is not JSON or lacks config, vocabulary or tensor entries
    """
    path = Path(path)
    data = path.read_bytes()

    if len(data) < _PREAMBLE.size:
        raise CheckpointTruncatedError(ErrorMessages.CHECKPOINT_TRUNCATED.format(path=path, reason="missing preamble"))
    magic, version, header_len = _PREAMBLE.unpack_from(data, 0)
    if magic != FileFormats.CHECKPOINT_MAGIC:
        raise CheckpointVersionError(ErrorMessages.CHECKPOINT_VERSION.format(path=path, reason=f"bad magic {magic!r}"))
    if version != FileFormats.CHECKPOINT_VERSION:
        raise CheckpointVersionError(ErrorMessages.CHECKPOINT_VERSION.format(path=path, reason=f"format version {version}"))

    offset = _PREAMBLE.size
    if offset + header_len > len(data):
        raise CheckpointTruncatedError(ErrorMessages.CHECKPOINT_TRUNCATED.format(path=path, reason="header cut short"))
    config, vocab, tensors = _read_header(data[offset : offset + header_len], path)
    offset += header_len

    model = Seq2SeqTransformer(config)
    expected = model.state_dict()

    if sorted(name for name, _ in tensors) != sorted(expected):
        raise CheckpointShapeError(f"Checkpoint {path} tensor names do not match the model built from its config")

    state = {}
    for name, shape in tensors:
        if shape != tuple(expected[name].shape):
            raise CheckpointShapeError(ErrorMessages.CHECKPOINT_SHAPE.format(name=name, actual=shape, expected=tuple(expected[name].shape)))
        n_bytes = 4 * int(np.prod(shape, dtype=np.int64))
        if offset + n_bytes > len(data):
            raise CheckpointTruncatedError(ErrorMessages.CHECKPOINT_TRUNCATED.format(path=path, reason=f"tensor '{name}' cut short"))
        array = np.frombuffer(data, dtype="<f4", count=n_bytes // 4, offset=offset).reshape(shape)
        state[name] = torch.from_numpy(array.astype(np.float32))
        offset += n_bytes

    if offset != len(data):
        raise CheckpointTruncatedError(ErrorMessages.CHECKPOINT_TRUNCATED.format(path=path, reason=f"{len(data) - offset} trailing bytes"))

    model.load_state_dict(state)
    model.eval()
    logger.debug("Loaded checkpoint", path=str(path), vocab_size=config.vocab_size)
    return model, config, vocab


def _read_header(raw: bytes, path: Path) -> Tuple[ModelConfig, Vocab, List[Tuple[str, Tuple[int, ...]]]]:
    try:
        header = json.loads(raw.decode("utf-8"))
        config = ModelConfig(**header["model_config"])
        vocab = Vocab(header["vocab"])
        tensors = [(str(entry["name"]), tuple(int(d) for d in entry["shape"])) for entry in header["tensors"]]
    except KeyError as e:
        raise CheckpointHeaderError(ErrorMessages.CHECKPOINT_HEADER.format(path=path, reason=f"missing entry {e}")) from e
    # JSON, UTF-8 and pydantic validation errors are all ValueErrors
    except (TypeError, ValueError) as e:
        raise CheckpointHeaderError(ErrorMessages.CHECKPOINT_HEADER.format(path=path, reason=str(e))) from e
    return config, vocab, tensors
