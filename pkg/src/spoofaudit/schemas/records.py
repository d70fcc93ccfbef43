import math

from pydantic import BaseModel, ConfigDict, Field, field_validator

from spoofaudit.models.demographics import Accent, AgeGroup, Fluency, Gender, Label


class ManifestEntry(BaseModel):
    """One utterance of a manifest with its label and demographic annotations."""

    model_config = ConfigDict(frozen=True)

    utt_id: str = Field(..., min_length=1)
    path: str | None = None
    label: Label
    gender: Gender = Gender.UNKNOWN
    age_group: AgeGroup = AgeGroup.UNKNOWN
    accent: Accent = Accent.UNKNOWN
    fluency: Fluency = Fluency.UNKNOWN
    validated: bool = True

    def attribute(self, name: str) -> str:
        value = getattr(self, name)
        return value.value if hasattr(value, "value") else str(value)


class ScoreRecord(BaseModel):
    """A manifest entry joined with its detector score (higher means more synthetic)."""

    model_config = ConfigDict(frozen=True)

    utt_id: str
    score: float
    label: Label
    gender: Gender = Gender.UNKNOWN
    age_group: AgeGroup = AgeGroup.UNKNOWN
    accent: Accent = Accent.UNKNOWN
    fluency: Fluency = Fluency.UNKNOWN
    validated: bool = True

    @field_validator("score")
    @classmethod
    def _finite(cls, v: float) -> float:
        if not math.isfinite(v):
            raise ValueError(f"score must be finite, got {v}")
        return v

    def attribute(self, name: str) -> str:
        value = getattr(self, name)
        return value.value if hasattr(value, "value") else str(value)


class LoadReport(BaseModel):
    """Counts of demographic fields that degraded to ``unknown`` or ``other`` while loading."""

    source: str
    format: str
    entries: int = 0
    degraded: dict[str, int] = Field(default_factory=dict)

    def note(self, reason: str) -> None:
        self.degraded[reason] = self.degraded.get(reason, 0) + 1

    @property
    def total_degraded(self) -> int:
        return sum(self.degraded.values())
