import math
from typing import Any, Self

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from spoofaudit.models.gmm import DetectorModel, GmmModel
from spoofaudit.schemas.features import FeatureConfig


class GmmConfig(BaseModel):
    """EM training parameters."""

    model_config = ConfigDict(frozen=True)

    n_components: int = Field(default=512, gt=0)
    max_iter: int = Field(default=100, gt=0)
    rel_tol: float = Field(default=1e-6, ge=0)
    variance_floor: float = Field(default=1e-6, gt=0)
    kmeans_iter: int = Field(default=10, ge=0)
    chunk_size: int = Field(default=65536, gt=0, description="Frames per E-step chunk")
    rescue_fraction: float = Field(
        default=1e-8, ge=0, description="Components below this share of N frames are re-seeded"
    )


class GmmFile(BaseModel):
    n_components: int
    dim: int
    weights: list[float]
    means: list[list[float]]
    variances: list[list[float]]

    @model_validator(mode="after")
    def _check_parameters(self) -> Self:
        variances = np.asarray(self.variances, dtype=np.float64)
        if not (np.isfinite(variances).all() and (variances > 0).all()):
            raise ValueError("variances must be finite and positive")
        weights = np.asarray(self.weights, dtype=np.float64)
        if not (np.isfinite(weights).all() and (weights >= 0).all()):
            raise ValueError("weights must be finite and non-negative")
        if not math.isclose(weights.sum(), 1.0, abs_tol=1e-6):
            raise ValueError(f"weights sum to {weights.sum()!r}, not 1")
        if not np.isfinite(np.asarray(self.means, dtype=np.float64)).all():
            raise ValueError("means must be finite")
        return self

    @classmethod
    def from_model(cls, model: GmmModel) -> "GmmFile":
        return cls(
            n_components=model.n_components,
            dim=model.dim,
            weights=model.weights.tolist(),
            means=model.means.tolist(),
            variances=model.variances.tolist(),
        )

    def to_model(self) -> GmmModel:
        return GmmModel(
            weights=np.asarray(self.weights, dtype=np.float64),
            means=np.asarray(self.means, dtype=np.float64).reshape(self.n_components, self.dim),
            variances=np.asarray(self.variances, dtype=np.float64).reshape(
                self.n_components, self.dim
            ),
        )


class DetectorFile(BaseModel):
    """On-disk form of a two-class GMM detector."""

    format: str = "spoofaudit.detector/1"
    bona_model: GmmFile
    spoof_model: GmmFile
    feature_config: FeatureConfig
    seed: int
    dataset_id: str = ""
    gmm_config: GmmConfig | None = None
    provenance: dict[str, Any] = Field(default_factory=dict)

    @classmethod
    def from_detector(
        cls,
        detector: DetectorModel,
        gmm_config: GmmConfig | None = None,
        provenance: dict[str, Any] | None = None,
    ) -> "DetectorFile":
        return cls(
            bona_model=GmmFile.from_model(detector.bona_model),
            spoof_model=GmmFile.from_model(detector.spoof_model),
            feature_config=detector.feature_config,
            seed=detector.seed,
            dataset_id=detector.dataset_id,
            gmm_config=gmm_config,
            provenance=provenance or {},
        )

    def to_detector(self) -> DetectorModel:
        return DetectorModel(
            bona_model=self.bona_model.to_model(),
            spoof_model=self.spoof_model.to_model(),
            feature_config=self.feature_config,
            seed=self.seed,
            dataset_id=self.dataset_id,
        )
