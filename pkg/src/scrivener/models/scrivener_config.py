"""Configuration models for Scrivener."""

from enum import Enum
from pathlib import Path
from typing import Dict, List, Optional, Tuple

from pydantic import BaseModel, Field, field_validator, model_validator


class LossKind(str, Enum):
    """Supported training objectives."""

    SMOOTHED_CE = "smoothed_ce"
    ROBUST = "robust"


class TemperatureSearch(str, Enum):
    """Temperature fitting strategies."""

    GOLDEN = "golden"
    GRID = "grid"


def _packaged_confusion_table() -> Dict[str, List[str]]:
    # Import here to avoid circular dependency
    from scrivener.augment.confusion import load_default_confusion_table

    return load_default_confusion_table()


class ModelConfig(BaseModel):
    """Architecture hyperparameters of the encoder-decoder model."""

    d_model: int = Field(default=128, ge=1, description="Embedding width")
    n_heads: int = Field(default=4, ge=1, description="Attention heads per layer")
    n_encoder_layers: int = Field(default=2, ge=1, description="Encoder blocks")
    n_decoder_layers: int = Field(default=2, ge=1, description="Decoder blocks")
    d_ffn: int = Field(default=512, ge=1, description="Feed-forward hidden width")
    max_seq_len: int = Field(default=256, ge=1, description="Longest source or decoder input, in tokens")
    dropout_rate: float = Field(default=0.1, ge=0.0, lt=1.0, description="Dropout probability in train mode")
    vocab_size: int = Field(default=4, ge=1, description="Vocabulary size K")

    model_config = {"frozen": True, "extra": "forbid"}

    @model_validator(mode="after")
    def _heads_divide_width(self) -> "ModelConfig":
        if self.d_model % self.n_heads != 0:
            raise ValueError(f"d_model={self.d_model} is not divisible by n_heads={self.n_heads}")
        return self

    def with_vocab_size(self, vocab_size: int) -> "ModelConfig":
        """Copy of this config for a vocabulary of ``vocab_size`` tokens."""
        return ModelConfig(**{**self.model_dump(), "vocab_size": vocab_size})

    def with_dropout(self, dropout_rate: float) -> "ModelConfig":
        return ModelConfig(**{**self.model_dump(), "dropout_rate": dropout_rate})


class TrainConfig(BaseModel):
    """Optimisation and model-selection settings."""

    loss: LossKind = Field(default=LossKind.SMOOTHED_CE, description="smoothed_ce or robust")
    label_smoothing: float = Field(default=0.1, ge=0.0, le=1.0, description="Label smoothing epsilon")
    alpha: float = Field(default=0.25, ge=0.0, le=1.0, description="Prior rate of noisy pairs in the robust likelihood")
    lm_path: Optional[Path] = Field(default=None, description="n-gram model file, required for the robust loss")
    learning_rate: float = Field(default=3e-4, gt=0.0)
    weight_decay: float = Field(default=0.01, ge=0.0)
    dropout: float = Field(default=0.1, ge=0.0, lt=1.0)
    batch_size: int = Field(default=16, ge=1)
    max_epochs: int = Field(default=30, ge=1)
    patience: int = Field(default=5, ge=1, description="Non-improving epochs tolerated before stopping")
    max_decode_len: Optional[int] = Field(default=None, ge=1, description="Validation decode cap, defaults to max_seq_len")
    seed: int = Field(default=0)

    model_config = {"validate_assignment": True, "extra": "forbid"}

    @model_validator(mode="after")
    def _robust_needs_lm(self) -> "TrainConfig":
        if self.loss == LossKind.ROBUST and self.lm_path is None:
            raise ValueError("the robust loss requires lm_path")
        return self


class AugmentConfig(BaseModel):
    """Probabilities of the synthetic student-writing corruptions."""

    p_word_delete: float = Field(default=0.03, ge=0.0, le=1.0)
    p_letter_delete: float = Field(default=0.03, ge=0.0, le=1.0)
    p_shorten_to_initial: float = Field(default=0.03, ge=0.0, le=1.0)
    p_cut_ending: float = Field(default=0.10, ge=0.0, le=1.0)
    cut_ending_max_chars: int = Field(default=3, ge=1)
    p_misspell: float = Field(default=0.10, ge=0.0, le=1.0)
    p_space_delete: float = Field(default=0.05, ge=0.0, le=1.0)
    confusion_table: Dict[str, List[str]] = Field(default_factory=_packaged_confusion_table)
    confusion_table_path: Optional[Path] = Field(default=None, description="Replaces the packaged table when set")
    seed: int = Field(default=0)

    model_config = {"extra": "forbid"}

    @model_validator(mode="before")
    @classmethod
    def _load_table_file(cls, data):
        if isinstance(data, dict) and data.get("confusion_table_path") and not data.get("confusion_table"):
            from scrivener.augment.confusion import load_confusion_table

            data = {**data, "confusion_table": load_confusion_table(Path(data["confusion_table_path"]))}
        return data

    @field_validator("confusion_table")
    @classmethod
    def _check_keys(cls, table: Dict[str, List[str]]) -> Dict[str, List[str]]:
        for key, candidates in table.items():
            if len(key) not in (1, 2) or key != key.lower():
                raise ValueError(f"confusion key {key!r} must be a lowercase letter or bigram")
            if not candidates:
                raise ValueError(f"confusion key {key!r} has no replacement candidates")
        return table

    @classmethod
    def zero(cls, seed: int = 0) -> "AugmentConfig":
        """A config that leaves every text unchanged."""
        return cls(
            p_word_delete=0.0,
            p_letter_delete=0.0,
            p_shorten_to_initial=0.0,
            p_cut_ending=0.0,
            p_misspell=0.0,
            p_space_delete=0.0,
            confusion_table={},
            seed=seed,
        )


class PathsConfig(BaseModel):
    """Default locations for artifacts."""

    data_dir: Path = Field(default=Path("data"))
    checkpoint_dir: Path = Field(default=Path("checkpoints"))
    lm_dir: Path = Field(default=Path("lm"))
    output_dir: Path = Field(default=Path("outputs"))


class SplitConfig(BaseModel):
    """Dataset split ratios."""

    ratios: Tuple[float, float, float] = Field(default=(0.8, 0.1, 0.1))


class LanguageModelConfig(BaseModel):
    """n-gram language model settings."""

    order: int = Field(default=2, ge=1)
    k: float = Field(default=1.0, gt=0.0, description="Interpolation constant of the smoothing recursion")


class DecodingConfig(BaseModel):
    """Greedy decoding settings."""

    max_len: Optional[int] = Field(default=None, ge=1, description="Defaults to the model's max_seq_len")
    temperature: float = Field(default=1.0, gt=0.0)


class CalibrationConfig(BaseModel):
    """Calibration diagnostics settings."""

    bins: int = Field(default=10, ge=1)
    search: TemperatureSearch = Field(default=TemperatureSearch.GOLDEN)
    grid_points: int = Field(default=50, ge=2)
    rejection_grid: List[float] = Field(default_factory=lambda: [round(0.05 * i, 2) for i in range(20)])

    @field_validator("rejection_grid")
    @classmethod
    def _check_grid(cls, grid: List[float]) -> List[float]:
        if any(not 0.0 <= r < 1.0 for r in grid):
            raise ValueError("rejection grid values must lie in [0, 1)")
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise ValueError("rejection grid must be strictly increasing")
        return grid


class PipelineConfig(BaseModel):
    """Settings of the end-to-end experiment."""

    corpus: Optional[Path] = Field(default=None, description="Clean text file, one sentence per line")
    noise_rate: float = Field(default=0.25, ge=0.0, le=1.0)
    robust_alpha: float = Field(default=0.25, ge=0.0, le=1.0)
    ensemble_size: int = Field(default=3, ge=0, description="Seeds in the deep ensemble row; 0 disables it")
    noise_seeds: int = Field(default=3, ge=1, description="Training seeds per noisy variant; the summary adds their median row")
    output_dir: Path = Field(default=Path("outputs/pipeline"))


class LoggingConfig(BaseModel):
    """Logging settings."""

    level: str = Field(default="INFO", description="Log level (DEBUG, INFO, WARNING, ERROR)")
    log_file: Optional[Path] = Field(default=None, description="JSON-lines log destination")


class ScrivenerConfig(BaseModel):
    """Main configuration model for Scrivener."""

    version: str = Field(default="1.0.0", description="Configuration version")
    seed: Optional[int] = Field(default=None, description="Root seed; required by train, augment and split")
    paths: PathsConfig = Field(default_factory=PathsConfig)
    model: ModelConfig = Field(default_factory=ModelConfig)
    train: TrainConfig = Field(default_factory=TrainConfig)
    augment: AugmentConfig = Field(default_factory=AugmentConfig)
    lm: LanguageModelConfig = Field(default_factory=LanguageModelConfig)
    split: SplitConfig = Field(default_factory=SplitConfig)
    decoding: DecodingConfig = Field(default_factory=DecodingConfig)
    calibration: CalibrationConfig = Field(default_factory=CalibrationConfig)
    pipeline: PipelineConfig = Field(default_factory=PipelineConfig)
    logging: LoggingConfig = Field(default_factory=LoggingConfig)

    model_config = {"validate_assignment": True, "extra": "forbid"}


# The command-line layer works on the whole configuration tree.
CliConfig = ScrivenerConfig
