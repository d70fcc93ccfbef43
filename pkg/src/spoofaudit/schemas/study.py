import tomllib
from pathlib import Path
from typing import Any, Literal, Self

from pydantic import BaseModel, ConfigDict, Field, model_validator

from spoofaudit.models.demographics import (
    DEMOGRAPHIC_ATTRIBUTES,
    Accent,
    AgeGroup,
    Fluency,
    Gender,
)
from spoofaudit.models.metrics import Metric
from spoofaudit.schemas.metrics import ThresholdSet

_ATTRIBUTE_ENUMS = {
    "gender": Gender,
    "age_group": AgeGroup,
    "accent": Accent,
    "fluency": Fluency,
}

# Short forms used in evaluation set names, e.g. D_US-20s-M
_NAME_TOKENS = {
    "gender": {"male": "M", "female": "F", "other": "O"},
    "age_group": {"teens": "ts"},
}
_NAME_ORDER = ("accent", "age_group", "gender", "fluency")

_AGES = ["teens", "20s", "30s", "40s", "50s", "60s"]
_ACCENTS = ["US", "SA", "CA", "UK", "AU"]

STUTTERING_POOL_SIZE = 21855

# Bona fide sample sizes per evaluation set of the 28-set study design.
PRESETS: dict[str, dict[str, Any]] = {
    "gender": {
        "kind": "gender",
        "fixed": {"accent": "US"},
        "group_by": "age_group",
        "groups": [
            {"value": "20s", "samples_per_set": 31000},
            {"value": "30s", "samples_per_set": 15000},
            {"value": "60s", "samples_per_set": 16000},
        ],
        "varied": "gender",
        "values": ["male", "female"],
    },
    "age": {
        "kind": "age",
        "fixed": {"accent": "US"},
        "group_by": "gender",
        "groups": [
            {"value": "male", "samples_per_set": 8900},
            {"value": "female", "samples_per_set": 8900},
        ],
        "varied": "age_group",
        "values": _AGES,
    },
    "age-male": {
        "kind": "age",
        "fixed": {"accent": "US"},
        "group_by": "gender",
        "groups": [{"value": "male", "samples_per_set": 8900}],
        "varied": "age_group",
        "values": _AGES,
    },
    "age-female": {
        "kind": "age",
        "fixed": {"accent": "US"},
        "group_by": "gender",
        "groups": [{"value": "female", "samples_per_set": 8900}],
        "varied": "age_group",
        "values": _AGES,
    },
    "accent": {
        "kind": "accent",
        "fixed": {"age_group": "20s"},
        "group_by": "gender",
        "groups": [
            {"value": "male", "samples_per_set": 8100},
            {"value": "female", "samples_per_set": 4900},
        ],
        "varied": "accent",
        "values": _ACCENTS,
    },
    "accent-male": {
        "kind": "accent",
        "fixed": {"age_group": "20s"},
        "group_by": "gender",
        "groups": [{"value": "male", "samples_per_set": 8100}],
        "varied": "accent",
        "values": _ACCENTS,
    },
    "accent-female": {
        "kind": "accent",
        "fixed": {"age_group": "20s"},
        "group_by": "gender",
        "groups": [{"value": "female", "samples_per_set": 4900}],
        "varied": "accent",
        "values": _ACCENTS,
    },
    "stuttering": {
        "kind": "stuttering",
        "groups": [{"samples_per_set": STUTTERING_POOL_SIZE}],
        "varied": "fluency",
        "values": ["stuttering"],
        "repeats": 1,
    },
}


def _check_attribute(name: str, value: str | None = None) -> None:
    if name not in DEMOGRAPHIC_ATTRIBUTES:
        raise ValueError(f"unknown attribute {name!r}; expected one of {DEMOGRAPHIC_ATTRIBUTES}")
    if value is not None:
        allowed = [e.value for e in _ATTRIBUTE_ENUMS[name]]
        if value not in allowed:
            raise ValueError(f"{name}={value!r} is not one of {allowed}")


def set_name(attributes: dict[str, str]) -> str:
    parts = []
    for attr in _NAME_ORDER:
        if attr in attributes and not (attr == "fluency" and attributes[attr] == "fluent"):
            value = attributes[attr]
            parts.append(_NAME_TOKENS.get(attr, {}).get(value, value))
    return "D_" + "-".join(parts)


class GroupSpec(BaseModel):
    model_config = ConfigDict(frozen=True)

    value: str | None = None
    samples_per_set: int = Field(..., gt=0)


class StudySpec(BaseModel):
    """Declarative description of one bias study.

    Sets are formed for every (group, varied value) cell. The Δ of a metric is taken across
    the sets of one group.
    """

    model_config = ConfigDict(frozen=True)

    name: str
    kind: Literal["gender", "age", "accent", "stuttering"]
    fixed: dict[str, str] = Field(default_factory=dict)
    group_by: str | None = None
    groups: list[GroupSpec] = Field(..., min_length=1)
    varied: str
    values: list[str] = Field(..., min_length=1)
    repeats: int = Field(default=5, gt=0)
    base_seed: int = Field(default=0, ge=0)
    sd_ddof: Literal[0, 1] = Field(default=0, description="0 = population SD over repeats")

    @model_validator(mode="after")
    def _check_cells(self) -> Self:
        for attr, value in self.fixed.items():
            _check_attribute(attr, value)
        _check_attribute(self.varied)
        for value in self.values:
            _check_attribute(self.varied, value)
        if len(set(self.values)) != len(self.values):
            raise ValueError(f"varied values must be distinct: {self.values}")
        if self.varied in self.fixed:
            raise ValueError(f"attribute {self.varied!r} is both fixed and varied")
        if self.group_by is None:
            if len(self.groups) != 1 or self.groups[0].value is not None:
                raise ValueError("a study without group_by takes exactly one unnamed group")
        else:
            _check_attribute(self.group_by)
            if self.group_by in (self.varied, *self.fixed):
                raise ValueError(f"group_by {self.group_by!r} overlaps fixed/varied attributes")
            for group in self.groups:
                if group.value is None:
                    raise ValueError("every group needs a value when group_by is set")
                _check_attribute(self.group_by, group.value)
            group_values = [g.value for g in self.groups]
            if len(set(group_values)) != len(group_values):
                raise ValueError(f"group values must be distinct: {group_values}")
        return self

    def cells(self) -> list[tuple[GroupSpec, str, dict[str, str]]]:
        """(group, varied value, full attribute filter) in deterministic study order."""
        out = []
        for group in self.groups:
            for value in self.values:
                attrs = dict(self.fixed)
                if self.group_by is not None and group.value is not None:
                    attrs[self.group_by] = group.value
                attrs[self.varied] = value
                out.append((group, value, attrs))
        return out

    @classmethod
    def preset(cls, name: str, base_seed: int = 0, repeats: int | None = None) -> "StudySpec":
        """Build one of the shipped studies by name (see ``PRESETS``)."""
        if name not in PRESETS:
            raise ValueError(f"unknown study preset {name!r}; expected one of {sorted(PRESETS)}")
        params = dict(PRESETS[name])
        if repeats is not None:
            params["repeats"] = repeats
        return cls(name=name, base_seed=base_seed, **params)

    @classmethod
    def from_toml(cls, path: Path) -> "StudySpec":
        """Load a study file.

        ``preset = "<name>"`` starts from a shipped study; other keys override it.
        """
        with open(path, "rb") as f:
            raw = tomllib.load(f)
        if "preset" in raw:
            preset = raw.pop("preset")
            if preset not in PRESETS:
                raise ValueError(
                    f"unknown study preset {preset!r}; expected one of {sorted(PRESETS)}"
                )
            raw = {**PRESETS[preset], **raw}
        raw.setdefault("name", path.stem)
        return cls.model_validate(raw)


class EvaluationSet(BaseModel):
    """One sampled draw: bona fide ids of one demographic cell plus the shared synthetic class."""

    model_config = ConfigDict(frozen=True)

    name: str
    group: str | None
    value: str
    repeat_index: int
    seed: int
    bona_ids: tuple[str, ...]
    synthetic_ids: tuple[str, ...]


class MetricQuadruple(BaseModel):
    """FPR1, FPR2, FPR3 and EER as fractions."""

    model_config = ConfigDict(frozen=True)

    fpr1: float
    fpr2: float
    fpr3: float
    eer: float

    def as_dict(self) -> dict[Metric, float]:
        return {
            Metric.FPR1: self.fpr1,
            Metric.FPR2: self.fpr2,
            Metric.FPR3: self.fpr3,
            Metric.EER: self.eer,
        }

    @classmethod
    def from_dict(cls, values: dict[Metric, float]) -> "MetricQuadruple":
        return cls(
            fpr1=values[Metric.FPR1],
            fpr2=values[Metric.FPR2],
            fpr3=values[Metric.FPR3],
            eer=values[Metric.EER],
        )


class SetResult(BaseModel):
    name: str
    group: str | None
    value: str
    samples: int
    per_repeat: dict[Metric, list[float]]
    mean: dict[Metric, float]
    sd: dict[Metric, float]
    delta: dict[Metric, float] = Field(default_factory=dict)
    sample_digests: list[str] = Field(default_factory=list)


class StudyResult(BaseModel):
    model_config = ConfigDict(ser_json_inf_nan="constants")

    format: str = "spoofaudit.study/1"
    detector_id: str
    spec: StudySpec
    thresholds: ThresholdSet
    synthetic_count: int
    synthetic_digest: str
    sets: list[SetResult]
    provenance: dict[str, Any] = Field(default_factory=dict)

    @property
    def set_names(self) -> list[str]:
        return [s.name for s in self.sets]

    def groups(self) -> dict[str | None, list[SetResult]]:
        out: dict[str | None, list[SetResult]] = {}
        for s in self.sets:
            out.setdefault(s.group, []).append(s)
        return out


class ConditionResult(BaseModel):
    """Absolute metrics of one detector under one speech condition (fluent or stuttering)."""

    model_config = ConfigDict(ser_json_inf_nan="constants")

    format: str = "spoofaudit.condition/1"
    detector_id: str
    condition: Literal["fluent", "stuttering"]
    n_bona: int
    n_spoof: int
    metrics: MetricQuadruple
    thresholds: ThresholdSet
    provenance: dict[str, Any] = Field(default_factory=dict)


class FluencyRow(BaseModel):
    """One plot-ready point: mean of a metric over detectors under one condition."""

    model_config = ConfigDict(frozen=True)

    condition: Literal["fluent", "stuttering"]
    metric: Metric
    value: float
    n_detectors: int
