"""Cepstral and spectral front-ends.

LFCC and MFCC share one pipeline: STFT power, triangular filterbank, log, orthonormal DCT-II,
then Δ and ΔΔ regression coefficients. LOGSPEC is the STFT power in dB.
"""

import logging

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy.fft import dct, rfft
from scipy.signal import get_window

from spoofaudit.errors import FeatureError
from spoofaudit.models.audio import AudioBuffer
from spoofaudit.models.features import FeatureKind, FeatureMatrix, FilterBank
from spoofaudit.schemas.features import FeatureConfig

logger = logging.getLogger(__name__)

_SCIPY_WINDOWS = {"hamming": "hamming", "hanning": "hann", "rectangular": "boxcar"}


def _is_power_of_two(n: int) -> bool:
    return n > 0 and (n & (n - 1)) == 0


def frame_count(n_samples: int, window_len: int, hop: int) -> int:
    n = max(n_samples, window_len)
    return 1 + (n - window_len) // hop


def stft_power(
    buf: AudioBuffer,
    window_len: int,
    hop: int,
    n_fft: int,
    window_fn: str = "hamming",
) -> np.ndarray:
    """Short-time power spectrum, frames x (n_fft/2 + 1).

    A buffer shorter than one window is zero-padded to exactly one window.
    """
    if hop <= 0:
        raise FeatureError(f"hop must be positive, got {hop}")
    if not _is_power_of_two(n_fft):
        raise FeatureError(f"n_fft must be a power of two, got {n_fft}")
    if not 1 <= window_len <= n_fft:
        raise FeatureError(f"window_len {window_len} must be in [1, n_fft={n_fft}]")
    if window_fn not in _SCIPY_WINDOWS:
        raise FeatureError(f"unknown window function {window_fn!r}")
    if not buf.is_mono:
        raise FeatureError("stft_power expects a mono buffer; call to_mono first")
    if buf.n_frames == 0:
        raise FeatureError("cannot compute a spectrum of an empty buffer")

    x = buf.samples
    if x.shape[0] < window_len:
        x = np.pad(x, (0, window_len - x.shape[0]))

    frames = sliding_window_view(x, window_len)[::hop]
    window = get_window(_SCIPY_WINDOWS[window_fn], window_len, fftbins=True)
    spectrum = rfft(frames * window, n=n_fft, axis=1)
    return spectrum.real**2 + spectrum.imag**2


def hz_to_mel(f):
    return 2595.0 * np.log10(1.0 + np.asarray(f, dtype=np.float64) / 700.0)


def mel_to_hz(m):
    return 700.0 * (10.0 ** (np.asarray(m, dtype=np.float64) / 2595.0) - 1.0)


def _check_band(n_filters: int, sample_rate: int, f_min: float, f_max: float) -> None:
    if n_filters < 1:
        raise FeatureError(f"n_filters must be at least 1, got {n_filters}")
    if f_max > sample_rate / 2:
        raise FeatureError(f"f_max {f_max} Hz exceeds Nyquist ({sample_rate / 2} Hz)")
    if not 0 <= f_min < f_max:
        raise FeatureError(f"need 0 <= f_min < f_max, got f_min={f_min}, f_max={f_max}")


def _triangles(edges_hz: np.ndarray, n_fft: int, sample_rate: int) -> FilterBank:
    bin_hz = np.arange(n_fft // 2 + 1) * sample_rate / n_fft
    left = edges_hz[:-2, None]
    center = edges_hz[1:-1, None]
    right = edges_hz[2:, None]

    rising = (bin_hz - left) / (center - left)
    falling = (right - bin_hz) / (right - center)
    weights = np.maximum(0.0, np.minimum(rising, falling))

    empty = np.flatnonzero(weights.sum(axis=1) == 0)
    if empty.size:
        raise FeatureError(
            f"filter(s) {empty.tolist()} cover no FFT bin; use fewer filters or a larger n_fft"
        )
    return FilterBank(weights=weights, center_hz=edges_hz[1:-1].copy(), edges_hz=edges_hz)


def linear_filterbank(
    n_filters: int, n_fft: int, sample_rate: int, f_min: float, f_max: float
) -> FilterBank:
    """Unit-peak triangles with boundary points equally spaced in Hz."""
    _check_band(n_filters, sample_rate, f_min, f_max)
    edges = np.linspace(f_min, f_max, n_filters + 2)
    return _triangles(edges, n_fft, sample_rate)


def mel_filterbank(
    n_filters: int, n_fft: int, sample_rate: int, f_min: float, f_max: float
) -> FilterBank:
    """Unit-peak triangles with boundary points equally spaced in mel."""
    _check_band(n_filters, sample_rate, f_min, f_max)
    edges = mel_to_hz(np.linspace(hz_to_mel(f_min), hz_to_mel(f_max), n_filters + 2))
    # Pin the ends against round-off in the mel round trip
    edges[0], edges[-1] = f_min, f_max
    return _triangles(edges, n_fft, sample_rate)


def cepstra(
    power: np.ndarray, fb: FilterBank, n_coeffs: int, log_floor: float = 1e-10
) -> np.ndarray:
    """Orthonormal DCT-II of log filterbank energies, first ``n_coeffs`` kept (c0 included)."""
    if power.ndim != 2 or power.shape[1] != fb.n_bins:
        raise FeatureError(
            f"power spectrum has {power.shape[-1]} bins, filterbank expects {fb.n_bins}"
        )
    if not 1 <= n_coeffs <= fb.n_filters:
        raise FeatureError(f"n_coeffs {n_coeffs} must be in [1, n_filters={fb.n_filters}]")

    energies = power @ fb.weights.T
    return dct(np.log(energies + log_floor), type=2, norm="ortho", axis=1)[:, :n_coeffs]


def _regression(values: np.ndarray, n: int) -> np.ndarray:
    t = values.shape[0]
    padded = np.pad(values, ((n, n), (0, 0)), mode="edge")
    numerator = np.zeros_like(values)
    for k in range(1, n + 1):
        numerator += k * (padded[n + k : n + k + t] - padded[n - k : n - k + t])
    return numerator / (2 * sum(k * k for k in range(1, n + 1)))


def add_deltas(feat: FeatureMatrix, n: int = 2) -> FeatureMatrix:
    """Append Δ and ΔΔ columns: [static | Δ | ΔΔ]."""
    if n < 1:
        raise FeatureError(f"delta window must be at least 1, got {n}")
    if feat.n_frames < 1:
        raise FeatureError("cannot compute deltas of an empty feature matrix")

    static = np.asarray(feat.values, dtype=np.float64)
    d1 = _regression(static, n)
    d2 = _regression(d1, n)
    return FeatureMatrix(
        values=np.hstack([static, d1, d2]), kind=feat.kind, frame_hop_ms=feat.frame_hop_ms
    )


def _check_input(buf: AudioBuffer, cfg: FeatureConfig, kind: FeatureKind) -> None:
    if cfg.kind is not kind:
        raise FeatureError(f"expected a {kind.value} config, got {cfg.kind.value}")
    if buf.sample_rate != cfg.sample_rate:
        raise FeatureError(
            f"buffer is at {buf.sample_rate} Hz, config expects {cfg.sample_rate} Hz; "
            "resample first"
        )


def _cepstral(buf: AudioBuffer, cfg: FeatureConfig, fb: FilterBank) -> FeatureMatrix:
    power = stft_power(buf, cfg.window_len, cfg.hop_len, cfg.n_fft, cfg.window_fn)
    static = cepstra(power, fb, cfg.n_coeffs, cfg.log_floor)
    feat = add_deltas(
        FeatureMatrix(values=static, kind=cfg.kind, frame_hop_ms=cfg.hop_ms), cfg.delta_window
    )
    if not np.all(np.isfinite(feat.values)):
        raise FeatureError(f"non-finite {cfg.kind.value} values; is the input finite?")
    return feat


def extract_lfcc(buf: AudioBuffer, cfg: FeatureConfig | None = None) -> FeatureMatrix:
    cfg = cfg or FeatureConfig.lfcc()
    _check_input(buf, cfg, FeatureKind.LFCC)
    fb = linear_filterbank(cfg.n_filters, cfg.n_fft, cfg.sample_rate, cfg.f_min, cfg.f_max)
    return _cepstral(buf, cfg, fb)


def extract_mfcc(buf: AudioBuffer, cfg: FeatureConfig | None = None) -> FeatureMatrix:
    cfg = cfg or FeatureConfig.mfcc()
    _check_input(buf, cfg, FeatureKind.MFCC)
    fb = mel_filterbank(cfg.n_filters, cfg.n_fft, cfg.sample_rate, cfg.f_min, cfg.f_max)
    return _cepstral(buf, cfg, fb)


def extract_logspec(buf: AudioBuffer, cfg: FeatureConfig | None = None) -> FeatureMatrix:
    """Power spectrogram in dB, frames x (n_fft/2 + 1)."""
    cfg = cfg or FeatureConfig.logspec()
    _check_input(buf, cfg, FeatureKind.LOGSPEC)
    power = stft_power(buf, cfg.window_len, cfg.hop_len, cfg.n_fft, cfg.window_fn)
    values = 10.0 * np.log10(power + cfg.log_floor)
    if not np.all(np.isfinite(values)):
        raise FeatureError("non-finite LOGSPEC values; is the input finite?")
    return FeatureMatrix(values=values, kind=FeatureKind.LOGSPEC, frame_hop_ms=cfg.hop_ms)


_EXTRACTORS = {
    FeatureKind.LFCC: extract_lfcc,
    FeatureKind.MFCC: extract_mfcc,
    FeatureKind.LOGSPEC: extract_logspec,
}


def extract(buf: AudioBuffer, cfg: FeatureConfig) -> FeatureMatrix:
    return _EXTRACTORS[cfg.kind](buf, cfg)
