from typing import Any

from pydantic import BaseModel, ConfigDict, Field

from spoofaudit.models.metrics import Metric


class ThresholdSet(BaseModel):
    """Operating points calibrated on a reference score set.

    ``t_eer`` yields FPR1, ``t_fpr`` FPR2 and ``t_fnr`` FPR3.
    """

    model_config = ConfigDict(frozen=True, ser_json_inf_nan="constants")

    t_eer: float
    t_fpr: float
    t_fnr: float
    reference_id: str
    fpr_target: float = Field(default=0.08, ge=0, le=1)
    fnr_target: float = Field(default=0.08, ge=0, le=1)
    reference_eer: float | None = None
    provenance: dict[str, Any] = Field(default_factory=dict)

    def threshold(self, metric: Metric) -> float:
        return {
            Metric.FPR1: self.t_eer,
            Metric.FPR2: self.t_fpr,
            Metric.FPR3: self.t_fnr,
        }[metric]


class BiasMeasure(BaseModel):
    """Values of one metric across the sets of a demographic group, with their deltas."""

    metric: Metric
    values: dict[str, float]
    deltas: dict[str, float]

    @property
    def most_biased(self) -> list[str]:
        top = max(self.deltas.values())
        return [name for name, d in self.deltas.items() if d == top]


class DetectionReport(BaseModel):
    """Pooled detector performance on one partition."""

    partition: str = ""
    n_bona: int
    n_spoof: int
    eer: float
    threshold: float

    model_config = ConfigDict(frozen=True, ser_json_inf_nan="constants")
