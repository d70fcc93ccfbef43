import enum
from dataclasses import dataclass

import numpy as np


class FeatureKind(str, enum.Enum):
    LFCC = "LFCC"
    MFCC = "MFCC"
    LOGSPEC = "LOGSPEC"

    @property
    def cache_tag(self) -> bytes:
        return _CACHE_TAGS[self]

    @classmethod
    def from_cache_tag(cls, tag: bytes) -> "FeatureKind":
        for kind, known in _CACHE_TAGS.items():
            if known == tag:
                return kind
        raise ValueError(f"Unknown feature kind tag: {tag!r}")


_CACHE_TAGS = {
    FeatureKind.LFCC: b"LFCC",
    FeatureKind.MFCC: b"MFCC",
    FeatureKind.LOGSPEC: b"LSPC",
}


@dataclass(frozen=True, eq=False)
class FilterBank:
    """Triangular filters over the one-sided FFT bins, one row per filter."""

    weights: np.ndarray
    center_hz: np.ndarray
    edges_hz: np.ndarray

    def __post_init__(self) -> None:
        self.weights.setflags(write=False)

    @property
    def n_filters(self) -> int:
        return int(self.weights.shape[0])

    @property
    def n_bins(self) -> int:
        return int(self.weights.shape[1])


@dataclass(frozen=True, eq=False)
class FeatureMatrix:
    values: np.ndarray
    kind: FeatureKind
    frame_hop_ms: float

    def __post_init__(self) -> None:
        if self.values.ndim != 2:
            raise ValueError(f"feature values must be 2-D, got {self.values.ndim}-D")
        self.values.setflags(write=False)

    @property
    def n_frames(self) -> int:
        return int(self.values.shape[0])

    @property
    def dims(self) -> int:
        return int(self.values.shape[1])

    def __repr__(self) -> str:
        return f"<FeatureMatrix {self.kind.value} {self.n_frames}x{self.dims}>"
