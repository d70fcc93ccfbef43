from dataclasses import dataclass, field
from typing import TYPE_CHECKING

import numpy as np

if TYPE_CHECKING:
    from spoofaudit.schemas.features import FeatureConfig


@dataclass(frozen=True, eq=False)
class GmmModel:
    """Diagonal-covariance Gaussian mixture."""

    weights: np.ndarray
    means: np.ndarray
    variances: np.ndarray

    def __post_init__(self) -> None:
        k, d = self.means.shape
        if self.weights.shape != (k,) or self.variances.shape != (k, d):
            raise ValueError(
                f"inconsistent GMM shapes: weights {self.weights.shape}, "
                f"means {self.means.shape}, variances {self.variances.shape}"
            )
        for arr in (self.weights, self.means, self.variances):
            arr.setflags(write=False)

    @property
    def n_components(self) -> int:
        return int(self.means.shape[0])

    @property
    def dim(self) -> int:
        return int(self.means.shape[1])

    def __repr__(self) -> str:
        return f"<GmmModel {self.n_components} components, dim {self.dim}>"


@dataclass(frozen=True)
class FitTrace:
    """Per-iteration diagnostics of one EM run."""

    log_likelihood: list[float] = field(default_factory=list)
    converged: bool = False
    rescued_components: int = 0

    @property
    def n_iter(self) -> int:
        return len(self.log_likelihood)


@dataclass(frozen=True, eq=False)
class DetectorModel:
    """Two-class GMM detector: one mixture per class over the same features."""

    bona_model: GmmModel
    spoof_model: GmmModel
    feature_config: "FeatureConfig"
    seed: int
    dataset_id: str = ""

    def __post_init__(self) -> None:
        if self.bona_model.dim != self.spoof_model.dim:
            raise ValueError(
                f"class models disagree on dim: {self.bona_model.dim} vs {self.spoof_model.dim}"
            )
        if self.bona_model.dim != self.feature_config.output_dims:
            raise ValueError(
                f"model dim {self.bona_model.dim} does not match "
                f"{self.feature_config.kind.value} output dims {self.feature_config.output_dims}"
            )
