"""
Exception hierarchy for Scrivener.

Every failure that the CLI maps to the data/validation exit code derives from
``ScrivenerError``. ``UsageError`` is the one exception mapped to the usage
exit code instead.
"""


class ScrivenerError(Exception):
    """Standard error for all Scrivener operations."""

    pass


class UsageError(ScrivenerError):
    """Unknown subcommand or missing/invalid command-line flag."""

    pass


class DataFormatError(ScrivenerError):
    """A data file could not be parsed."""

    def __init__(self, message: str, line_number: int | None = None):
        super().__init__(message)
        self.line_number = line_number


class MissingFieldError(DataFormatError):
    """A record in a data file lacks a required field."""

    def __init__(self, message: str, field: str, line_number: int | None = None):
        super().__init__(message, line_number=line_number)
        self.field = field


class ConfigValidationError(ScrivenerError):
    """Configuration file or override failed validation."""

    pass


class ConfigMismatchError(ScrivenerError):
    """Two artifacts that must agree (vocab, model config) do not."""

    pass


class SequenceTooLongError(ScrivenerError):
    """Input or target exceeds the model's max_seq_len."""

    pass


class CheckpointError(ScrivenerError):
    """Base class for checkpoint file problems."""

    pass


class CheckpointVersionError(CheckpointError):
    """Wrong magic bytes or unsupported format version."""

    pass


class CheckpointShapeError(CheckpointError):
    """Stored tensor shapes disagree with the stored config."""

    pass


class CheckpointTruncatedError(CheckpointError):
    """File ended before all declared content was read."""

    pass


class CheckpointHeaderError(CheckpointError):
    """The header is not valid JSON or lacks a required entry."""

    pass


class LanguageModelFormatError(ScrivenerError):
    """An n-gram model file is malformed."""

    pass


class DegenerateLikelihoodError(ScrivenerError):
    """The robust mixture likelihood has no support (alpha=1 with an impossible target)."""

    pass


class NonFiniteGradientError(ScrivenerError):
    """Backward pass produced NaN or infinity."""

    def __init__(self, message: str, tensor_name: str):
        super().__init__(message)
        self.tensor_name = tensor_name


class TrainingDivergedError(ScrivenerError):
    """Training loss became NaN."""

    pass


class StageFailedError(ScrivenerError):
    """A pipeline stage failed; wraps the underlying error."""

    def __init__(self, message: str, stage: str):
        super().__init__(message)
        self.stage = stage
