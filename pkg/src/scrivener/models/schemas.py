"""
Pydantic models for Scrivener's data records and command results.
"""

from typing import Any, List, Optional

from pydantic import BaseModel, Field, model_validator

from scrivener.constants import ResponseStatus


class CommandResult(BaseModel):
    """The standardized result object for all CLI commands."""

    status: str = Field(description="The status of the command: 'success', 'error' or 'usage'.")
    message: str = Field(description="A clear, human-readable message describing the result.")
    data: dict[str, Any] | None = Field(default=None)
    artifacts: List[str] = Field(default_factory=list, description="Paths written by the command")

    @classmethod
    def success(cls, message: str, data: dict[str, Any] | None = None, artifacts: List[str] | None = None) -> "CommandResult":
        return cls(status=ResponseStatus.SUCCESS, message=message, data=data, artifacts=artifacts or [])

    @classmethod
    def error(cls, message: str, data: dict[str, Any] | None = None) -> "CommandResult":
        return cls(status=ResponseStatus.ERROR, message=message, data=data)

    @classmethod
    def usage(cls, message: str) -> "CommandResult":
        return cls(status=ResponseStatus.USAGE, message=message)


class TextPair(BaseModel):
    """One student text and its conventional teacher text."""

    student: str = Field(description="Early-stage writing as produced by the student")
    teacher: str = Field(description="The conventional rendering of the student's text")
    noisy: Optional[bool] = Field(default=None, description="Diagnostic flag set by pair-noise injection")

    model_config = {"frozen": True}


class DatasetSplit(BaseModel):
    """Train/validation/test partition of a pair list."""

    train: List[TextPair]
    validation: List[TextPair]
    test: List[TextPair]
    seed: int

    @property
    def sizes(self) -> tuple[int, int, int]:
        return len(self.train), len(self.validation), len(self.test)


class TranslationResult(BaseModel):
    """A decoded translation with its per-token log-probabilities and confidence C."""

    tokens: List[int] = Field(description="Emitted token ids, EOS included when produced")
    text: str
    token_log_probs: List[float]
    confidence: float

    @model_validator(mode="after")
    def _aligned(self) -> "TranslationResult":
        if len(self.tokens) != len(self.token_log_probs):
            raise ValueError("tokens and token_log_probs must have equal length")
        return self


class IdentityTranslation(BaseModel):
    """Output of the Identity baseline; it carries no confidence."""

    text: str
    confidence: Optional[float] = None


class TemperatureScaler(BaseModel):
    """Logit temperature T fitted on validation likelihood."""

    temperature: float = Field(gt=0.0)

    @property
    def T(self) -> float:  # noqa: N802
        return self.temperature


class TextStats(BaseModel):
    """Counts feeding the readability formulas."""

    words: int = Field(ge=0)
    sentences: int = Field(ge=0)
    syllables: int = Field(ge=0)
    long_words: int = Field(ge=0)


class MetricsReport(BaseModel):
    """Aggregate translation quality, one row of the results table."""

    n: int
    mean_ed: float
    mean_ed_sem: float
    median_ed: float
    mean_ned: float
    mean_ned_sem: float
    median_ned: float
    fk_mae: float
    fk_mae_sem: float
    lix_mae: float
    lix_mae_sem: float


class PairMetrics(BaseModel):
    """Per-pair values behind a MetricsReport."""

    ed: int
    ned: float
    fk_pred: float
    fk_true: float
    lix_pred: float
    lix_true: float
    confidence: Optional[float] = None


class TokenEvent(BaseModel):
    """Confidence and correctness of one teacher-forced argmax prediction."""

    confidence: float = Field(ge=0.0, le=1.0)
    correct: bool


class CalibrationBin(BaseModel):
    """Statistics of one equal-width confidence bin."""

    lower: float
    upper: float
    count: int
    mean_confidence: Optional[float] = None
    accuracy: Optional[float] = None


class CalibrationReport(BaseModel):
    """Expected and maximum calibration error with the per-bin breakdown."""

    ece: float
    mce: float
    bins: List[CalibrationBin]


class RejectionPoint(BaseModel):
    rejection: float
    retained: int
    value: float


class RejectionCurve(BaseModel):
    """Metric on the retained subset as a function of the rejected fraction."""

    metric: str
    points: List[RejectionPoint]

    def value_at(self, rejection: float) -> float:
        for point in self.points:
            if abs(point.rejection - rejection) < 1e-12:
                return point.value
        raise KeyError(f"no point at rejection={rejection}")


class HistoryRow(BaseModel):
    """One epoch of training."""

    epoch: int
    train_loss: float
    val_median_ned: float
    val_mean_ned: float
    mean_responsibility_clean: Optional[float] = None
    mean_responsibility_noisy: Optional[float] = None


class TrainingHistory(BaseModel):
    """Per-epoch records plus the selected epoch."""

    rows: List[HistoryRow] = Field(default_factory=list)
    best_epoch: Optional[int] = None
    stopped_early: bool = False

    @property
    def best_val_median_ned(self) -> Optional[float]:
        if not self.rows:
            return None
        return min(row.val_median_ned for row in self.rows)


class GradCheckEntry(BaseModel):
    tensor_name: str
    index: List[int]
    analytic: float
    numeric: float
    relative_error: float


class GradCheckReport(BaseModel):
    """Outcome of comparing analytic and finite-difference gradients."""

    loss_kind: str
    checked: int
    max_relative_error: float
    tolerance: float
    failures: List[GradCheckEntry] = Field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failures
