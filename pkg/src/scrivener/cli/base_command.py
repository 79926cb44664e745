"""Base class for every subcommand, using the Template Method pattern."""

from abc import ABC, abstractmethod
import argparse
from typing import Any, ClassVar, Dict, Sequence, Tuple

from scrivener.config.manager import ConfigManager
from scrivener.errors import UsageError
from scrivener.lib.structured_logger import get_logger, setup_logging
from scrivener.models.schemas import CommandResult
from scrivener.models.scrivener_config import ScrivenerConfig

logger = get_logger(__name__)


class BaseCommand(ABC):
    """Loads the config, applies flag overrides, checks required flags, then runs.

    Subclasses declare ``help``, the flags they need (``required_flags`` as
    ``(dest, "--flag")`` tuples) and whether a seed is mandatory.
    """

    name: ClassVar[str] = ""
    help: ClassVar[str] = ""
    requires_seed: ClassVar[bool] = False
    required_flags: ClassVar[Sequence[Tuple[str, str]]] = ()

    def execute(self, args: argparse.Namespace) -> CommandResult:
        """Template method shared by all subcommands."""
        manager = ConfigManager(args.config)
        manager.load()
        config = manager.apply_overrides(seed=args.seed, **self.config_overrides(args))
        setup_logging(getattr(args, "log_level", None) or config.logging.level, getattr(args, "log_file", None) or config.logging.log_file)

        if self.requires_seed and config.seed is None:
            raise UsageError(f"'{self.name}' requires --seed (or a seed in the config file)")
        missing = [flag for dest, flag in self.required_flags if getattr(args, dest, None) in (None, "")]
        if missing:
            raise UsageError(f"'{self.name}' requires {', '.join(missing)}")

        logger.debug("Executing command", command=self.name, seed=config.seed)
        return self.run(args, config)

    @classmethod
    @abstractmethod
    def add_arguments(cls, parser: argparse.ArgumentParser) -> None:
        """Declare subcommand flags."""
        pass

    def config_overrides(self, args: argparse.Namespace) -> Dict[str, Any]:
        """Flag values to apply over the config file, as ``section__field`` keys."""
        return {}

    @abstractmethod
    def run(self, args: argparse.Namespace, config: ScrivenerConfig) -> CommandResult:
        """Do the work and report artifacts."""
        pass
