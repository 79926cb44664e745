"""The pipeline command."""

import argparse
from pathlib import Path

from scrivener.cli.base_command import BaseCommand
from scrivener.cli.pipeline import SUMMARY_JSON, SUMMARY_MD, experiment_pipeline
from scrivener.cli.registry import command_registry
from scrivener.constants import Subcommands
from scrivener.models.schemas import CommandResult
from scrivener.models.scrivener_config import ScrivenerConfig


@command_registry.register(Subcommands.PIPELINE)
class PipelineCommand(BaseCommand):
    help = "Run the full experiment from a clean-text corpus and write a summary"
    requires_seed = True

    @classmethod
    def add_arguments(cls, parser: argparse.ArgumentParser) -> None:
        parser.add_argument("--corpus", help="Clean text file, one sentence per line")
        parser.add_argument("--out", help="Run directory")
        parser.add_argument("--noise-rate", dest="noise_rate", type=float, help="Fraction of training pairs given a wrong teacher")
        parser.add_argument("--ensemble-size", dest="ensemble_size", type=int, help="Ensemble members; 0 disables the ensemble row")
        parser.add_argument("--noise-seeds", dest="noise_seeds", type=int, help="Training seeds per noisy variant")
        parser.add_argument("--epochs", type=int, help="Maximum epochs per trained model")

    def config_overrides(self, args):
        return {
            "pipeline__corpus": args.corpus,
            "pipeline__output_dir": args.out,
            "pipeline__noise_rate": args.noise_rate,
            "pipeline__ensemble_size": args.ensemble_size,
            "pipeline__noise_seeds": args.noise_seeds,
            "train__max_epochs": args.epochs,
        }

    def run(self, args: argparse.Namespace, config: ScrivenerConfig) -> CommandResult:
        summary = experiment_pipeline(config)
        out = Path(config.pipeline.output_dir)
        lines = [f"{row['name']}: mean NED {row['mean_ned']:.4f}, mean ED {row['mean_ed']:.3f}" for row in summary["rows"]]
        return CommandResult.success(
            "Pipeline finished\n" + "\n".join(lines),
            data=summary,
            artifacts=[str(out / SUMMARY_JSON), str(out / SUMMARY_MD)],
        )
