"""Self-registering subcommands."""

from typing import Dict, List, Type, TYPE_CHECKING

from scrivener.lib.structured_logger import get_logger

if TYPE_CHECKING:
    from scrivener.cli.base_command import BaseCommand

logger = get_logger(__name__)


class DuplicateCommandError(Exception):
    """Raised when a subcommand name is registered more than once."""

    pass


class CommandRegistry:
    """Maps subcommand names to command classes, filled by the ``register`` decorator."""

    def __init__(self):
        self._commands: Dict[str, Type["BaseCommand"]] = {}

    def register(self, name: str):
        """Class decorator registering a command under ``name``."""
        if name in self._commands:
            raise DuplicateCommandError(f"Command '{name}' is already registered.")

        def decorator(cls: Type["BaseCommand"]) -> Type["BaseCommand"]:
            cls.name = name
            self._commands[name] = cls
            logger.debug("Registered command", command=name)
            return cls

        return decorator

    def get(self, name: str) -> Type["BaseCommand"]:
        return self._commands[name]

    def names(self) -> List[str]:
        return list(self._commands)

    def __contains__(self, name: str) -> bool:
        return name in self._commands


command_registry = CommandRegistry()
