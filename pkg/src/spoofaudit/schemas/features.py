from typing import Literal, Self

from pydantic import BaseModel, ConfigDict, Field, model_validator

from spoofaudit.models.features import FeatureKind

WindowFn = Literal["hamming", "hanning", "rectangular"]


class FeatureConfig(BaseModel):
    """Front-end parameters. Times are in milliseconds, frequencies in Hz."""

    model_config = ConfigDict(frozen=True)

    kind: FeatureKind
    sample_rate: int = Field(default=16000, gt=0)
    window_ms: float = Field(..., gt=0)
    hop_ms: float = Field(..., gt=0)
    n_fft: int = Field(..., gt=0)
    n_filters: int = Field(..., gt=0)
    n_coeffs: int = Field(..., gt=0)
    f_min: float = Field(default=0.0, ge=0)
    f_max: float = Field(..., gt=0)
    delta_window: int = Field(default=2, ge=1)
    log_floor: float = Field(default=1e-10, gt=0)
    window_fn: WindowFn = "hamming"

    @model_validator(mode="after")
    def _check_ranges(self) -> Self:
        if self.f_min >= self.f_max:
            raise ValueError(f"f_min ({self.f_min}) must be below f_max ({self.f_max})")
        if self.f_max > self.sample_rate / 2:
            raise ValueError(f"f_max ({self.f_max}) exceeds Nyquist ({self.sample_rate / 2})")
        if self.n_coeffs > self.n_filters:
            raise ValueError(f"n_coeffs ({self.n_coeffs}) exceeds n_filters ({self.n_filters})")
        if self.window_ms < self.hop_ms:
            raise ValueError(f"window_ms ({self.window_ms}) is shorter than hop_ms ({self.hop_ms})")
        if self.window_len > self.n_fft:
            raise ValueError(f"window of {self.window_len} samples exceeds n_fft ({self.n_fft})")
        return self

    @property
    def window_len(self) -> int:
        return round(self.window_ms * self.sample_rate / 1000)

    @property
    def hop_len(self) -> int:
        return round(self.hop_ms * self.sample_rate / 1000)

    @property
    def n_bins(self) -> int:
        return self.n_fft // 2 + 1

    @property
    def output_dims(self) -> int:
        if self.kind is FeatureKind.LOGSPEC:
            return self.n_bins
        return 3 * self.n_coeffs

    @classmethod
    def lfcc(cls, preset: Literal["M03", "M01"] = "M03", **overrides) -> "FeatureConfig":
        """LFCC front-end of the GMM detector.

        ``M03`` (30 ms / 15 ms, up to 4 kHz) is the configuration used in the bias study;
        ``M01`` (20 ms / 10 ms, 30 Hz - 8 kHz) is the challenge baseline configuration.
        """
        params = {
            "M03": {"window_ms": 30.0, "hop_ms": 15.0, "f_min": 0.0, "f_max": 4000.0},
            "M01": {"window_ms": 20.0, "hop_ms": 10.0, "f_min": 30.0, "f_max": 8000.0},
        }[preset]
        base = {
            "kind": FeatureKind.LFCC,
            "n_fft": 512,
            "n_filters": 20,
            "n_coeffs": 20,
            "delta_window": 2,
            "window_fn": "hamming",
            **params,
        }
        return cls(**{**base, **overrides})

    @classmethod
    def mfcc(cls, **overrides) -> "FeatureConfig":
        base = {
            "kind": FeatureKind.MFCC,
            "window_ms": 25.0,
            "hop_ms": 10.0,
            "n_fft": 512,
            "n_filters": 40,
            "n_coeffs": 24,
            "f_min": 0.0,
            "f_max": 8000.0,
            "delta_window": 2,
            "window_fn": "hamming",
        }
        return cls(**{**base, **overrides})

    @classmethod
    def logspec(cls, **overrides) -> "FeatureConfig":
        # 2048-sample window, 512-sample hop at 16 kHz
        base = {
            "kind": FeatureKind.LOGSPEC,
            "window_ms": 128.0,
            "hop_ms": 32.0,
            "n_fft": 2048,
            "n_filters": 1025,
            "n_coeffs": 1025,
            "f_min": 0.0,
            "f_max": 8000.0,
            "window_fn": "hanning",
        }
        return cls(**{**base, **overrides})

    @classmethod
    def default_for(cls, kind: FeatureKind) -> "FeatureConfig":
        return {
            FeatureKind.LFCC: cls.lfcc,
            FeatureKind.MFCC: cls.mfcc,
            FeatureKind.LOGSPEC: cls.logspec,
        }[kind]()
