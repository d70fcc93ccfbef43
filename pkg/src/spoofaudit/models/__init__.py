from spoofaudit.models.audio import AudioBuffer
from spoofaudit.models.demographics import (
    Accent,
    AgeGroup,
    Fluency,
    Gender,
    Label,
    Orientation,
)
from spoofaudit.models.features import FeatureKind, FeatureMatrix, FilterBank
from spoofaudit.models.gmm import DetectorModel, FitTrace, GmmModel
from spoofaudit.models.metrics import METRIC_ORDER, Metric, ScoreSet

__all__ = [
    "METRIC_ORDER",
    "Accent",
    "AgeGroup",
    "AudioBuffer",
    "DetectorModel",
    "FeatureKind",
    "FeatureMatrix",
    "FilterBank",
    "FitTrace",
    "Fluency",
    "Gender",
    "GmmModel",
    "Label",
    "Metric",
    "Orientation",
    "ScoreSet",
]
