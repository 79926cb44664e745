"""Evaluation commands: eval, calibrate, calib-report and reject-curve."""

import argparse
from pathlib import Path
from typing import List, Optional, Tuple

from scrivener.calibration.events import collect_token_events
from scrivener.calibration.rejection import rejection_curve
from scrivener.calibration.reliability import calibration_report
from scrivener.calibration.temperature import fit_temperature
from scrivener.cli.base_command import BaseCommand
from scrivener.cli.commands.common import checkpoint_paths, load_models, resolve_temperature, save_temperature
from scrivener.cli.registry import command_registry
from scrivener.cli.reports import calibration_rows, calibration_table, metrics_table, read_jsonl, rejection_rows, write_csv, write_json
from scrivener.constants import Paths, Subcommands
from scrivener.decoding.greedy import identity_translate
from scrivener.errors import DataFormatError, MissingFieldError, UsageError
from scrivener.lib.fs_utils import atomic_write_text
from scrivener.metrics.evaluation import pair_metrics, report_from_rows
from scrivener.models.schemas import CommandResult, PairMetrics, TextPair
from scrivener.models.scrivener_config import ScrivenerConfig, TemperatureSearch
from scrivener.seq2seq.checkpoint import load_checkpoint
from scrivener.text.pairs import load_pairs

PAIR_METRIC_COLUMNS = ["ed", "ned", "fk_pred", "fk_true", "lix_pred", "lix_true", "confidence"]
REJECTION_COLUMNS = ["rejection", "retained", "mean_ned", "fk_mae", "lix_mae"]


def load_predictions(path: Path, expected: int) -> Tuple[List[str], List[Optional[float]]]:
    """Predictions and confidences from a ``translate`` output file, checked against the pair count."""
    records = read_jsonl(Path(path))
    if len(records) != expected:
        raise DataFormatError(f"{path} has {len(records)} predictions for {expected} pairs")
    predictions, confidences = [], []
    for line_number, record in enumerate(records, start=1):
        if not isinstance(record, dict):
            raise DataFormatError(f"Line {line_number} of {path} is not a JSON object", line_number=line_number)
        if "prediction" not in record:
            raise MissingFieldError(f"Line {line_number} of {path} is missing required field 'prediction'", field="prediction", line_number=line_number)
        prediction, confidence = record["prediction"], record.get("confidence")
        if not isinstance(prediction, str):
            raise DataFormatError(f"Line {line_number} of {path}: 'prediction' must be a string", line_number=line_number)
        # bool is an int subclass
        if confidence is not None and (isinstance(confidence, bool) or not isinstance(confidence, (int, float))):
            raise DataFormatError(f"Line {line_number} of {path}: 'confidence' must be a number", line_number=line_number)
        predictions.append(prediction)
        confidences.append(confidence)
    return predictions, confidences


def _with_suffix(prefix: Path, suffix: str) -> Path:
    return prefix.with_name(prefix.name + suffix)


@command_registry.register(Subcommands.EVAL)
class EvalCommand(BaseCommand):
    help = "Score predictions (or the Identity baseline) against teacher texts"
    required_flags = (("pairs", "--pairs"),)

    @classmethod
    def add_arguments(cls, parser: argparse.ArgumentParser) -> None:
        parser.add_argument("--pairs", help="Reference pair file")
        parser.add_argument("--pred", help="Predictions written by translate")
        parser.add_argument("--identity", action="store_true", help="Evaluate the Identity baseline instead of --pred")
        parser.add_argument("--out", help="Output prefix; writes <out>.json and <out>.txt")
        parser.add_argument("--per-pair", dest="per_pair", help="Optional per-pair CSV")

    def run(self, args: argparse.Namespace, config: ScrivenerConfig) -> CommandResult:
        if bool(args.pred) == bool(args.identity):
            raise UsageError("'eval' requires exactly one of --pred or --identity")

        pairs = load_pairs(Path(args.pairs))
        if args.identity:
            predictions = [identity_translate(pair.student).text for pair in pairs]
            confidences = None
        else:
            predictions, confidences = load_predictions(Path(args.pred), len(pairs))

        rows = pair_metrics(pairs, predictions, confidences)
        report = report_from_rows(rows)
        prefix = Path(args.out) if args.out else config.paths.output_dir / "metrics"
        table = metrics_table(report)

        artifacts = [
            write_json(_with_suffix(prefix, Paths.JSON_EXTENSION), report.model_dump()),
            _with_suffix(prefix, Paths.TXT_EXTENSION),
        ]
        atomic_write_text(artifacts[1], table)
        if args.per_pair:
            artifacts.append(write_csv(Path(args.per_pair), PAIR_METRIC_COLUMNS, [row.model_dump() for row in rows]))

        return CommandResult.success(f"Evaluated {report.n} pairs\n{table}", data=report.model_dump(), artifacts=[str(p) for p in artifacts])


@command_registry.register(Subcommands.CALIBRATE)
class CalibrateCommand(BaseCommand):
    help = "Fit a logit temperature on validation pairs and store it next to the checkpoint"
    required_flags = (("ckpt", "--ckpt"), ("val", "--val"))

    @classmethod
    def add_arguments(cls, parser: argparse.ArgumentParser) -> None:
        parser.add_argument("--ckpt", help="Checkpoint to calibrate")
        parser.add_argument("--val", help="Validation pair file")
        parser.add_argument("--search", choices=[s.value for s in TemperatureSearch])
        parser.add_argument("--grid-points", dest="grid_points", type=int)
        parser.add_argument("--bins", type=int, help="Bins of the before/after ECE")

    def config_overrides(self, args):
        return {"calibration__search": args.search, "calibration__grid_points": args.grid_points, "calibration__bins": args.bins}

    def run(self, args: argparse.Namespace, config: ScrivenerConfig) -> CommandResult:
        model, _, vocab = load_checkpoint(Path(args.ckpt))
        val_pairs = load_pairs(Path(args.val))
        scaler = fit_temperature(model, val_pairs, vocab, search=config.calibration.search, grid_points=config.calibration.grid_points)

        before = calibration_report(collect_token_events(model, val_pairs, vocab), bins=config.calibration.bins)
        after = calibration_report(collect_token_events(model, val_pairs, vocab, temperature=scaler.T), bins=config.calibration.bins)
        path = save_temperature(Path(args.ckpt), scaler)
        return CommandResult.success(
            f"Fitted T={scaler.T:.4f}; validation ECE {before.ece:.4f} -> {after.ece:.4f}",
            data={"temperature": scaler.T, "ece_before": before.ece, "ece_after": after.ece, "mce_before": before.mce, "mce_after": after.mce},
            artifacts=[str(path)],
        )


@command_registry.register(Subcommands.CALIB_REPORT)
class CalibrationReportCommand(BaseCommand):
    help = "Token-level ECE/MCE with per-bin statistics"
    required_flags = (("pairs", "--pairs"), ("out", "--out"))

    @classmethod
    def add_arguments(cls, parser: argparse.ArgumentParser) -> None:
        parser.add_argument("--ckpt", help="Checkpoint path")
        parser.add_argument("--ensemble", help="Comma-separated checkpoint paths")
        parser.add_argument("--pairs", help="Pair file scored with teacher forcing")
        parser.add_argument("--temperature", type=float, help="Logit temperature; defaults to the calibration sidecar")
        parser.add_argument("--bins", type=int)
        parser.add_argument("--out", help="Bin statistics CSV; a JSON twin is written next to it")

    def config_overrides(self, args):
        return {"calibration__bins": args.bins}

    def run(self, args: argparse.Namespace, config: ScrivenerConfig) -> CommandResult:
        paths = checkpoint_paths(args.ckpt, args.ensemble)
        models, vocab = load_models(paths)
        temperature = resolve_temperature(args.temperature, paths[0])
        pairs = load_pairs(Path(args.pairs))

        report = calibration_report(collect_token_events(models, pairs, vocab, temperature=temperature), bins=config.calibration.bins)
        out = Path(args.out)
        csv_path = write_csv(out, ["lower", "upper", "count", "mean_confidence", "accuracy"], calibration_rows(report))
        json_path = write_json(out.with_suffix(Paths.JSON_EXTENSION), {"temperature": temperature, **report.model_dump()})
        return CommandResult.success(f"Calibration at T={temperature:.4f}\n{calibration_table(report)}", data=report.model_dump(), artifacts=[str(csv_path), str(json_path)])


def rejection_curves(rows: List[PairMetrics], grid: List[float]):
    """NED, FK and LIX accuracy-rejection curves ranked by sequence confidence."""
    if any(row.confidence is None for row in rows):
        raise DataFormatError("every prediction needs a confidence for a rejection curve")
    return [
        rejection_curve([(r.confidence, r.ned) for r in rows], aggregate="mean", grid=grid, metric="mean_ned"),
        rejection_curve([(r.confidence, r.fk_pred - r.fk_true) for r in rows], aggregate="mae", grid=grid, metric="fk_mae"),
        rejection_curve([(r.confidence, r.lix_pred - r.lix_true) for r in rows], aggregate="mae", grid=grid, metric="lix_mae"),
    ]


@command_registry.register(Subcommands.REJECT_CURVE)
class RejectCurveCommand(BaseCommand):
    help = "Metrics on the retained set as low-confidence predictions are rejected"
    required_flags = (("pairs", "--pairs"), ("pred", "--pred"), ("out", "--out"))

    @classmethod
    def add_arguments(cls, parser: argparse.ArgumentParser) -> None:
        parser.add_argument("--pairs", help="Reference pair file")
        parser.add_argument("--pred", help="Predictions with confidences written by translate")
        parser.add_argument("--out", help="Curve CSV; a JSON twin is written next to it")

    def run(self, args: argparse.Namespace, config: ScrivenerConfig) -> CommandResult:
        pairs: List[TextPair] = load_pairs(Path(args.pairs))
        predictions, confidences = load_predictions(Path(args.pred), len(pairs))
        curves = rejection_curves(pair_metrics(pairs, predictions, confidences), config.calibration.rejection_grid)

        rows = rejection_rows(curves)
        out = Path(args.out)
        csv_path = write_csv(out, REJECTION_COLUMNS, rows)
        json_path = write_json(out.with_suffix(Paths.JSON_EXTENSION), [curve.model_dump() for curve in curves])
        first, last = rows[0], rows[-1]
        return CommandResult.success(
            f"Mean NED {first['mean_ned']:.4f} at r={first['rejection']} -> {last['mean_ned']:.4f} at r={last['rejection']}",
            data={"points": rows},
            artifacts=[str(csv_path), str(json_path)],
        )
