"""
Command-line entry point.

``run(argv)`` never raises: it returns 0 on success, 1 on usage errors and 2
on data or validation errors.
"""

import argparse
import sys
from typing import List, NoReturn, Optional

import torch

from scrivener import __version__
from scrivener.cli import commands  # noqa: F401
from scrivener.cli.registry import command_registry
from scrivener.config.settings import settings
from scrivener.constants import ExitCodes, FileFormats, ResponseStatus
from scrivener.errors import ScrivenerError, UsageError
from scrivener.lib.structured_logger import get_logger, setup_logging

logger = get_logger(__name__)


class _ArgumentParser(argparse.ArgumentParser):
    """Raises :class:`UsageError` carrying the help text instead of exiting."""

    def error(self, message: str) -> NoReturn:
        raise UsageError(f"{message}\n\n{self.format_help()}")


def version_string() -> str:
    return f"scrivener {__version__} (checkpoint format {FileFormats.CHECKPOINT_VERSION}, n-gram format {FileFormats.LM_VERSION})"


def build_parser() -> argparse.ArgumentParser:
    parser = _ArgumentParser(prog="scrivener", description="Translate early-stage student writing into conventional writing.")
    parser.add_argument("--version", action="version", version=version_string())

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="YAML config file; the packaged defaults are used when omitted")
    common.add_argument("--seed", type=int, help="Root seed for every random choice")
    common.add_argument("--log-level", dest="log_level", help="DEBUG, INFO, WARNING or ERROR")
    common.add_argument("--log-file", dest="log_file", help="JSON-lines log file")

    subparsers = parser.add_subparsers(dest="command", metavar="{" + ",".join(command_registry.names()) + "}")
    for name in command_registry.names():
        command_cls = command_registry.get(name)
        sub = subparsers.add_parser(name, help=command_cls.help, description=command_cls.help, parents=[common])
        command_cls.add_arguments(sub)
    return parser


def _configure_runtime(args: argparse.Namespace) -> None:
    setup_logging(args.log_level or settings.log_level, args.log_file or settings.default_log_file)
    torch.set_num_threads(settings.num_threads)
    torch.use_deterministic_algorithms(settings.deterministic)


def run(argv: Optional[List[str]] = None) -> int:
    """Parse ``argv``, dispatch to the subcommand and map the outcome to an exit code."""
    parser = build_parser()
    try:
        try:
            args = parser.parse_args(argv)
        except SystemExit as e:
            # --help and --version
            return int(e.code or 0)
        if args.command is None:
            raise UsageError(f"a subcommand is required\n\n{parser.format_help()}")
        _configure_runtime(args)
        result = command_registry.get(args.command)().execute(args)
    except UsageError as e:
        print(f"error: {e}", file=sys.stderr)
        return ExitCodes.USAGE_ERROR
    except (ScrivenerError, ValueError, OSError) as e:
        logger.error("Command failed", error=str(e), error_type=type(e).__name__)
        print(f"error: {e}", file=sys.stderr)
        return ExitCodes.DATA_ERROR

    if result.status == ResponseStatus.SUCCESS:
        print(result.message)
        for artifact in result.artifacts:
            print(f"  wrote {artifact}")
        return ExitCodes.SUCCESS
    print(f"error: {result.message}", file=sys.stderr)
    return ExitCodes.USAGE_ERROR if result.status == ResponseStatus.USAGE else ExitCodes.DATA_ERROR


def main() -> NoReturn:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
