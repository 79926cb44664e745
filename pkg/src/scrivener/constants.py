"""
Central constants and configuration values for Scrivener.

This module contains all magic strings and hardcoded values used throughout
the codebase, organized by category for easy maintenance and consistency.
"""

from typing import Final


# Special tokens
class SpecialTokens:
    """Reserved vocabulary entries, always assigned ids 0..3 in this order."""

    PAD: Final[str] = "<pad>"
    BOS: Final[str] = "<bos>"
    EOS: Final[str] = "<eos>"
    UNK: Final[str] = "<unk>"

    ALL: Final[tuple] = (PAD, BOS, EOS, UNK)

    PAD_ID: Final[int] = 0
    BOS_ID: Final[int] = 1
    EOS_ID: Final[int] = 2
    UNK_ID: Final[int] = 3


# Directory and File Names
class Paths:
    """File system path constants."""

    # Files
    CONFIG_FILE: Final[str] = "config.yml"
    CONFUSION_TABLE_FILE: Final[str] = "confusion_table.tsv"
    SUMMARY_TEMPLATE_FILE: Final[str] = "experiment_summary.md.j2"
    RUN_LOG_FILE: Final[str] = "run.jsonl"
    LOG_FILE: Final[str] = "scrivener.jsonl"

    # Directories
    TEMPLATES_DIR: Final[str] = "templates"
    AUGMENT_DATA_DIR: Final[str] = "data"

    # Split suffixes
    TRAIN_SUFFIX: Final[str] = ".train"
    VAL_SUFFIX: Final[str] = ".val"
    TEST_SUFFIX: Final[str] = ".test"

    # Extensions
    TMP_EXTENSION: Final[str] = ".tmp"
    JSONL_EXTENSION: Final[str] = ".jsonl"
    JSON_EXTENSION: Final[str] = ".json"
    CSV_EXTENSION: Final[str] = ".csv"
    TXT_EXTENSION: Final[str] = ".txt"
    TEMPERATURE_SIDECAR_SUFFIX: Final[str] = ".temperature.json"


# Binary formats
class FileFormats:
    """Magic bytes and versions of the binary artifacts."""

    CHECKPOINT_MAGIC: Final[bytes] = b"SQ2Q"
    CHECKPOINT_VERSION: Final[int] = 1

    LM_MAGIC: Final[bytes] = b"NGLM"
    LM_VERSION: Final[int] = 1


# Subcommand names
class Subcommands:
    """CLI subcommand name constants."""

    SPLIT: Final[str] = "split"
    AUGMENT: Final[str] = "augment"
    LM_TRAIN: Final[str] = "lm-train"
    TRAIN: Final[str] = "train"
    TRANSLATE: Final[str] = "translate"
    EVAL: Final[str] = "eval"
    CALIBRATE: Final[str] = "calibrate"
    CALIB_REPORT: Final[str] = "calib-report"
    REJECT_CURVE: Final[str] = "reject-curve"
    PIPELINE: Final[str] = "pipeline"
    GRAD_CHECK: Final[str] = "grad-check"


# Exit codes
class ExitCodes:
    """Process exit codes returned by the CLI."""

    SUCCESS: Final[int] = 0
    USAGE_ERROR: Final[int] = 1
    DATA_ERROR: Final[int] = 2


# Response Status Values
class ResponseStatus:
    """Command result status constants."""

    SUCCESS: Final[str] = "success"
    ERROR: Final[str] = "error"
    USAGE: Final[str] = "usage"


# Readability clip intervals [a, 2b]
class ReadabilityBounds:
    """Clip intervals for readability scores."""

    FK_LOWER: Final[float] = -3.4
    FK_UPPER: Final[float] = 36.0
    LIX_LOWER: Final[float] = 0.0
    LIX_UPPER: Final[float] = 110.0
    LONG_WORD_MIN_CHARS: Final[int] = 7


# Log Messages
class LogMessages:
    """Standardized log message templates."""

    PAIRS_LOADED: Final[str] = "Loaded {count} pairs from {path}"
    PAIRS_SAVED: Final[str] = "Saved {count} pairs to {path}"
    CHECKPOINT_SAVED: Final[str] = "Saved checkpoint to {path}"
    EPOCH_FINISHED: Final[str] = "Epoch {epoch} finished"
    STAGE_STARTED: Final[str] = "Pipeline stage '{stage}' started"
    STAGE_FINISHED: Final[str] = "Pipeline stage '{stage}' finished"


# Error Messages
class ErrorMessages:
    """Standardized error message templates."""

    MALFORMED_LINE: Final[str] = "Malformed JSON on line {line_number} of {path}: {reason}"
    MISSING_FIELD: Final[str] = "Line {line_number} of {path} is missing required field '{field}'"
    FILE_NOT_FOUND: Final[str] = "File not found: {path}"
    SEQUENCE_TOO_LONG: Final[str] = "Sequence of length {length} exceeds max_seq_len={max_len}"
    CHECKPOINT_VERSION: Final[str] = "Unsupported checkpoint in {path}: {reason}"
    CHECKPOINT_SHAPE: Final[str] = "Tensor '{name}' has shape {actual}, config expects {expected}"
    CHECKPOINT_TRUNCATED: Final[str] = "Checkpoint {path} is truncated: {reason}"
    CHECKPOINT_HEADER: Final[str] = "Checkpoint {path} has a malformed header: {reason}"
    NON_FINITE_GRADIENT: Final[str] = "Non-finite gradient in tensor '{name}'"
    STAGE_FAILED: Final[str] = "Pipeline stage '{stage}' failed: {error}"
