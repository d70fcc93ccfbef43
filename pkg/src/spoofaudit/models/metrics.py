import enum
from dataclasses import dataclass

import numpy as np


class Metric(str, enum.Enum):
    FPR1 = "FPR1"
    FPR2 = "FPR2"
    FPR3 = "FPR3"
    EER = "EER"


# Rendering and aggregation order
METRIC_ORDER = (Metric.FPR1, Metric.FPR2, Metric.FPR3, Metric.EER)


@dataclass(frozen=True, eq=False)
class ScoreSet:
    """Detector scores split by class. Higher scores mean more synthetic."""

    bona_scores: np.ndarray
    spoof_scores: np.ndarray

    @classmethod
    def from_lists(cls, bona, spoof) -> "ScoreSet":
        return cls(
            bona_scores=np.asarray(bona, dtype=np.float64),
            spoof_scores=np.asarray(spoof, dtype=np.float64),
        )

    def __post_init__(self) -> None:
        for arr in (self.bona_scores, self.spoof_scores):
            arr.setflags(write=False)

    @property
    def n_bona(self) -> int:
        return int(self.bona_scores.size)

    @property
    def n_spoof(self) -> int:
        return int(self.spoof_scores.size)
