"""Model commands: train, translate and grad-check."""

import argparse
from pathlib import Path

from scrivener.cli.base_command import BaseCommand
from scrivener.cli.commands.common import checkpoint_paths, load_models, read_inputs, resolve_temperature
from scrivener.cli.registry import command_registry
from scrivener.cli.reports import write_jsonl
from scrivener.constants import Paths, Subcommands
from scrivener.decoding.greedy import translate_texts
from scrivener.errors import ConfigMismatchError
from scrivener.lm.persistence import load_lm
from scrivener.models.schemas import CommandResult
from scrivener.models.scrivener_config import LossKind, ScrivenerConfig
from scrivener.seq2seq.checkpoint import load_checkpoint, save_checkpoint
from scrivener.text.pairs import load_pairs
from scrivener.text.vocab import Vocab, pair_vocab
from scrivener.training.grad_check import grad_check
from scrivener.training.trainer import train


@command_registry.register(Subcommands.TRAIN)
class TrainCommand(BaseCommand):
    help = "Train a translation model with smoothed cross-entropy or the robust loss"
    requires_seed = True
    required_flags = (("train", "--train"), ("val", "--val"), ("out", "--out"))

    @classmethod
    def add_arguments(cls, parser: argparse.ArgumentParser) -> None:
        parser.add_argument("--train", help="Training pair file")
        parser.add_argument("--val", help="Validation pair file used for model selection")
        parser.add_argument("--out", help="Output checkpoint path")
        parser.add_argument("--loss", choices=[kind.value for kind in LossKind])
        parser.add_argument("--alpha", type=float, help="Noise rate of the robust likelihood")
        parser.add_argument("--lm", help="n-gram model file for the robust loss")
        parser.add_argument("--label-smoothing", dest="label_smoothing", type=float)
        parser.add_argument("--lr", type=float, help="Learning rate")
        parser.add_argument("--weight-decay", dest="weight_decay", type=float)
        parser.add_argument("--dropout", type=float)
        parser.add_argument("--batch-size", dest="batch_size", type=int)
        parser.add_argument("--epochs", type=int, help="Maximum number of epochs")
        parser.add_argument("--patience", type=int)
        parser.add_argument("--init-from", dest="init_from", help="Continue from this checkpoint; its vocabulary is reused")
        parser.add_argument("--history", help="Training history CSV, defaults to <out>.history.csv")

    def config_overrides(self, args):
        return {
            "train__loss": args.loss,
            "train__alpha": args.alpha,
            "train__lm_path": args.lm,
            "train__label_smoothing": args.label_smoothing,
            "train__learning_rate": args.lr,
            "train__weight_decay": args.weight_decay,
            "train__dropout": args.dropout,
            "train__batch_size": args.batch_size,
            "train__max_epochs": args.epochs,
            "train__patience": args.patience,
        }

    def run(self, args: argparse.Namespace, config: ScrivenerConfig) -> CommandResult:
        train_pairs = load_pairs(Path(args.train))
        val_pairs = load_pairs(Path(args.val))
        train_config = config.train.model_copy(update={"seed": config.seed})

        init_model = None
        if args.init_from:
            init_model, _, vocab = load_checkpoint(Path(args.init_from))
        else:
            vocab = pair_vocab(train_pairs)

        lm = None
        if train_config.loss == LossKind.ROBUST:
            lm, characters = load_lm(train_config.lm_path)
            if characters is not None and Vocab(characters) != vocab:
                raise ConfigMismatchError(f"language model {train_config.lm_path} was fitted on a different vocabulary")

        out = Path(args.out)
        history_path = Path(args.history) if args.history else out.with_name(out.name + ".history" + Paths.CSV_EXTENSION)
        model, history = train(train_pairs, val_pairs, vocab, config.model, train_config, lm=lm, init_model=init_model, history_path=history_path)
        save_checkpoint(model, vocab, out)

        return CommandResult.success(
            f"Trained {train_config.loss.value} model; best epoch {history.best_epoch} with val median NED {history.best_val_median_ned:.4f}",
            data={"best_epoch": history.best_epoch, "best_val_median_ned": history.best_val_median_ned, "epochs": len(history.rows)},
            artifacts=[str(out), str(history_path)],
        )


@command_registry.register(Subcommands.TRANSLATE)
class TranslateCommand(BaseCommand):
    help = "Translate student texts with one checkpoint or an ensemble"
    required_flags = (("input", "--input"), ("out", "--out"))

    @classmethod
    def add_arguments(cls, parser: argparse.ArgumentParser) -> None:
        parser.add_argument("--ckpt", help="Checkpoint path")
        parser.add_argument("--ensemble", help="Comma-separated checkpoint paths")
        parser.add_argument("--input", help="Pair file (.jsonl) or plain text file, one text per line")
        parser.add_argument("--out", help="Output JSON-lines predictions")
        parser.add_argument("--temperature", type=float, help="Logit temperature; defaults to the calibration sidecar")
        parser.add_argument("--max-len", dest="max_len", type=int, help="Decoding length cap")

    def config_overrides(self, args):
        return {"decoding__max_len": args.max_len}

    def run(self, args: argparse.Namespace, config: ScrivenerConfig) -> CommandResult:
        paths = checkpoint_paths(args.ckpt, args.ensemble)
        models, vocab = load_models(paths)
        temperature = resolve_temperature(args.temperature, paths[0])
        texts, _ = read_inputs(Path(args.input))

        results = translate_texts(models, texts, vocab, temperature=temperature, max_len=config.decoding.max_len)
        records = [{"student": text, "prediction": r.text, "confidence": r.confidence} for text, r in zip(texts, results)]
        path = write_jsonl(Path(args.out), records)
        return CommandResult.success(
            f"Translated {len(records)} texts with {len(models)} model(s) at T={temperature:.3f}",
            data={"count": len(records), "temperature": temperature, "ensemble_size": len(models)},
            artifacts=[str(path)],
        )


@command_registry.register(Subcommands.GRAD_CHECK)
class GradCheckCommand(BaseCommand):
    help = "Compare analytic and finite-difference gradients of both losses on a micro model"

    @classmethod
    def add_arguments(cls, parser: argparse.ArgumentParser) -> None:
        parser.add_argument("--tolerance", type=float, default=1e-4)
        parser.add_argument("--samples", type=int, default=200, help="Parameter entries checked per loss")

    def run(self, args: argparse.Namespace, config: ScrivenerConfig) -> CommandResult:
        seed = config.seed if config.seed is not None else 0
        reports = [
            grad_check(config.model, kind, tolerance=args.tolerance, n_samples=args.samples, seed=seed, alpha=config.train.alpha, epsilon=config.train.label_smoothing)
            for kind in LossKind
        ]
        data = {report.loss_kind: report.model_dump() for report in reports}
        summary = ", ".join(f"{r.loss_kind}: max rel err {r.max_relative_error:.2e} over {r.checked}" for r in reports)
        if all(report.passed for report in reports):
            return CommandResult.success(f"Gradient check passed ({summary})", data=data)
        failed = [f"{r.loss_kind}:{f.tensor_name}{f.index}" for r in reports for f in r.failures]
        return CommandResult.error(f"Gradient check failed at {', '.join(failed)} ({summary})", data=data)
