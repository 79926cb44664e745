"""Data preparation commands: split, augment and lm-train."""

import argparse
from pathlib import Path

from scrivener.augment.corruption import generate_pairs
from scrivener.cli.base_command import BaseCommand
from scrivener.cli.registry import command_registry
from scrivener.constants import Subcommands
from scrivener.lm.ngram import fit as fit_ngram
from scrivener.lm.persistence import save_lm
from scrivener.models.schemas import CommandResult
from scrivener.models.scrivener_config import ScrivenerConfig
from scrivener.text.dataset import save_split, split_dataset
from scrivener.text.pairs import load_pairs, load_texts, save_pairs
from scrivener.text.vocab import encode_target, pair_vocab


@command_registry.register(Subcommands.SPLIT)
class SplitCommand(BaseCommand):
    help = "Shuffle a pair file and write train/val/test splits"
    requires_seed = True
    required_flags = (("pairs", "--pairs"), ("out", "--out"))

    @classmethod
    def add_arguments(cls, parser: argparse.ArgumentParser) -> None:
        parser.add_argument("--pairs", help="Input JSON-lines pair file")
        parser.add_argument("--out", help="Output prefix; writes <out>.train/.val/.test")
        parser.add_argument("--ratios", type=float, nargs=3, metavar=("TRAIN", "VAL", "TEST"))

    def config_overrides(self, args):
        return {"split__ratios": tuple(args.ratios) if args.ratios else None}

    def run(self, args: argparse.Namespace, config: ScrivenerConfig) -> CommandResult:
        split = split_dataset(load_pairs(Path(args.pairs)), ratios=config.split.ratios, seed=config.seed)
        outputs = save_split(split, Path(args.out))
        train, val, test = split.sizes
        return CommandResult.success(
            f"Split {train + val + test} pairs into {train}/{val}/{test}",
            data={"train": train, "validation": val, "test": test},
            artifacts=[str(p) for p in outputs.values()],
        )


@command_registry.register(Subcommands.AUGMENT)
class AugmentCommand(BaseCommand):
    help = "Create synthetic student/teacher pairs from clean text"
    requires_seed = True
    required_flags = (("texts", "--texts"), ("out", "--out"))

    @classmethod
    def add_arguments(cls, parser: argparse.ArgumentParser) -> None:
        parser.add_argument("--texts", help="Clean text file, one sentence per line")
        parser.add_argument("--out", help="Output JSON-lines pair file")
        parser.add_argument("--confusion-table", dest="confusion_table", help="TSV letter/bigram confusion table")

    def config_overrides(self, args):
        return {"augment__confusion_table_path": args.confusion_table}

    def run(self, args: argparse.Namespace, config: ScrivenerConfig) -> CommandResult:
        augment_config = config.augment.model_copy(update={"seed": config.seed})
        pairs = generate_pairs(load_texts(Path(args.texts)), augment_config)
        path = save_pairs(pairs, Path(args.out))
        return CommandResult.success(f"Generated {len(pairs)} synthetic pairs", data={"count": len(pairs)}, artifacts=[str(path)])


@command_registry.register(Subcommands.LM_TRAIN)
class LanguageModelTrainCommand(BaseCommand):
    help = "Fit a character n-gram model on the teacher side of a pair file"
    required_flags = (("pairs", "--pairs"), ("out", "--out"))

    @classmethod
    def add_arguments(cls, parser: argparse.ArgumentParser) -> None:
        parser.add_argument("--pairs", help="Training pair file; its characters define the vocabulary")
        parser.add_argument("--order", type=int, help="n-gram order")
        parser.add_argument("--k", type=float, help="Smoothing constant")
        parser.add_argument("--out", help="Output model file")

    def config_overrides(self, args):
        return {"lm__order": args.order, "lm__k": args.k}

    def run(self, args: argparse.Namespace, config: ScrivenerConfig) -> CommandResult:
        pairs = load_pairs(Path(args.pairs))
        vocab = pair_vocab(pairs)
        model = fit_ngram([encode_target(pair.teacher, vocab) for pair in pairs], order=config.lm.order, k=config.lm.k, vocab_size=vocab.size)
        path = save_lm(model, Path(args.out), characters=vocab.characters)
        return CommandResult.success(
            f"Fitted {config.lm.order}-gram model over {vocab.size} tokens",
            data={"order": config.lm.order, "k": config.lm.k, "vocab_size": vocab.size},
            artifacts=[str(path)],
        )
