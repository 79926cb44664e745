"""Vocabulary, tokenization, pair files, splitting and pair-noise injection."""

from .dataset import inject_pair_noise, save_split, split_dataset
from .pairs import is_pair_file, load_pairs, load_texts, save_pairs
from .vocab import TokenSeq, Vocab, build_vocab, decode, encode, encode_source, encode_target, pair_vocab

__all__ = [
    "TokenSeq",
    "Vocab",
    "build_vocab",
    "decode",
    "encode",
    "encode_source",
    "encode_target",
    "inject_pair_noise",
    "is_pair_file",
    "load_pairs",
    "load_texts",
    "pair_vocab",
    "save_pairs",
    "save_split",
    "split_dataset",
]
