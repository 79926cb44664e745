"""Helpers shared by the model-facing commands."""

import json
from pathlib import Path
from typing import List, Optional, Tuple

from scrivener.constants import Paths
from scrivener.errors import ConfigMismatchError, UsageError
from scrivener.lib.fs_utils import atomic_write_text
from scrivener.models.schemas import TemperatureScaler, TextPair
from scrivener.seq2seq.checkpoint import load_checkpoint
from scrivener.seq2seq.model import Seq2SeqTransformer
from scrivener.text.pairs import is_pair_file, load_pairs, load_texts
from scrivener.text.vocab import Vocab

PAIR_SUFFIXES = (Paths.JSONL_EXTENSION, Paths.TRAIN_SUFFIX, Paths.VAL_SUFFIX, Paths.TEST_SUFFIX)


def checkpoint_paths(ckpt: Optional[str], ensemble: Optional[str]) -> List[Path]:
    """``--ckpt`` alone or the comma-separated ``--ensemble`` list."""
    if ckpt and ensemble:
        raise UsageError("use either --ckpt or --ensemble, not both")
    if ensemble:
        paths = [Path(p.strip()) for p in ensemble.split(",") if p.strip()]
        if not paths:
            raise UsageError("--ensemble needs at least one checkpoint path")
        return paths
    if ckpt:
        return [Path(ckpt)]
    raise UsageError("one of --ckpt or --ensemble is required")


def load_models(paths: List[Path]) -> Tuple[List[Seq2SeqTransformer], Vocab]:
    """Load checkpoints that must share one vocabulary."""
    models, vocab = [], None
    for path in paths:
        model, _, ckpt_vocab = load_checkpoint(path)
        if vocab is not None and ckpt_vocab != vocab:
            raise ConfigMismatchError(f"{path} was trained on a different vocabulary than {paths[0]}")
        models.append(model)
        vocab = ckpt_vocab
    return models, vocab


def sidecar_path(checkpoint: Path) -> Path:
    checkpoint = Path(checkpoint)
    return checkpoint.with_name(checkpoint.name + Paths.TEMPERATURE_SIDECAR_SUFFIX)


def save_temperature(checkpoint: Path, scaler: TemperatureScaler) -> Path:
    path = sidecar_path(checkpoint)
    atomic_write_text(path, scaler.model_dump_json(indent=2) + "\n")
    return path


def resolve_temperature(flag: Optional[float], checkpoint: Path) -> float:
    """``--temperature`` if given, else the calibration sidecar, else 1."""
    if flag is not None:
        return flag
    path = sidecar_path(checkpoint)
    if path.exists():
        return TemperatureScaler(**json.loads(path.read_text(encoding="utf-8"))).temperature
    return 1.0


def read_inputs(path: Path) -> Tuple[List[str], Optional[List[TextPair]]]:
    """Student texts from a pair file or a plain text file; pairs are returned when available.

    Pair files are recognised by the suffixes ``split`` and ``augment`` write, or by content.
    """
    path = Path(path)
    if path.suffix in PAIR_SUFFIXES or is_pair_file(path):
        pairs = load_pairs(path)
        return [pair.student for pair in pairs], pairs
    return load_texts(path), None
