from spoofaudit.schemas.features import FeatureConfig
from spoofaudit.schemas.gmm import DetectorFile, GmmConfig, GmmFile
from spoofaudit.schemas.metrics import BiasMeasure, DetectionReport, ThresholdSet
from spoofaudit.schemas.records import LoadReport, ManifestEntry, ScoreRecord
from spoofaudit.schemas.study import (
    PRESETS,
    ConditionResult,
    EvaluationSet,
    FluencyRow,
    GroupSpec,
    MetricQuadruple,
    SetResult,
    StudyResult,
    StudySpec,
)

__all__ = [
    "PRESETS",
    "BiasMeasure",
    "ConditionResult",
    "DetectionReport",
    "DetectorFile",
    "EvaluationSet",
    "FeatureConfig",
    "FluencyRow",
    "GmmConfig",
    "GmmFile",
    "GroupSpec",
    "LoadReport",
    "ManifestEntry",
    "MetricQuadruple",
    "ScoreRecord",
    "SetResult",
    "StudyResult",
    "StudySpec",
    "ThresholdSet",
]
