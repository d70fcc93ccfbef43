"""
Tests for the spectral and cepstral front-ends.
"""

import math

import numpy as np
import pytest
from pydantic import ValidationError

from spoofaudit.errors import FeatureError
from spoofaudit.models.audio import AudioBuffer
from spoofaudit.models.features import FeatureKind, FeatureMatrix, FilterBank
from spoofaudit.schemas.features import FeatureConfig
from spoofaudit.services.features import (
    add_deltas,
    cepstra,
    extract,
    extract_lfcc,
    extract_logspec,
    extract_mfcc,
    frame_count,
    hz_to_mel,
    linear_filterbank,
    mel_filterbank,
    stft_power,
)

from .conftest import tone


def mono(samples: np.ndarray, rate: int = 16000) -> AudioBuffer:
    return AudioBuffer(samples=np.asarray(samples, dtype=np.float64), sample_rate=rate)


def identity_bank(n: int) -> FilterBank:
    return FilterBank(
        weights=np.eye(n), center_hz=np.arange(n, dtype=float), edges_hz=np.zeros(n + 2)
    )


def dct_oracle(x: np.ndarray) -> np.ndarray:
    n = x.shape[0]
    out = np.empty(n)
    for k in range(n):
        scale = math.sqrt(1.0 / n) if k == 0 else math.sqrt(2.0 / n)
        out[k] = scale * sum(
            x[i] * math.cos(math.pi * k * (2 * i + 1) / (2 * n)) for i in range(n)
        )
    return out


class TestStftPower:
    """Tests for framing and the power spectrum."""

    def test_zero_signal(self):
        """Test that silence has an all-zero power matrix."""
        power = stft_power(mono(np.zeros(4000)), 480, 240, 512)
        assert not power.any()

    def test_frame_count_of_one_second(self):
        """Test that 16000 samples with window 480 and hop 240 give 65 frames."""
        assert frame_count(16000, 480, 240) == 65
        assert stft_power(mono(np.zeros(16000)), 480, 240, 512).shape == (65, 257)

    def test_frame_count_property(self):
        """Test the frame-count formula over random (length, window, hop) triples."""
        rng = np.random.default_rng(7)
        for _ in range(1000):
            window = int(rng.integers(1, 257))
            hop = int(rng.integers(1, window + 1))
            n = int(rng.integers(window, window + 2000))
            power = stft_power(mono(np.zeros(n)), window, hop, 256)
            assert power.shape[0] == 1 + (n - window) // hop == frame_count(n, window, hop)

    def test_short_buffer_is_padded_to_one_window(self):
        """Test that a buffer shorter than the window yields one frame."""
        assert stft_power(mono(np.ones(100)), 480, 240, 512).shape[0] == 1

    def test_bin_centred_sine(self):
        """Test that a bin-centred sine with a rectangular window concentrates in its bin."""
        k = 32
        signal = np.sin(2 * np.pi * k * np.arange(4 * 512) / 512)
        power = stft_power(mono(signal), 512, 512, 512, window_fn="rectangular")

        for row in power:
            assert row[k] / row.sum() >= 0.99

    @pytest.mark.parametrize(
        ("window", "hop", "n_fft", "fn"),
        [(480, 0, 512, "hamming"), (480, 240, 500, "hamming"), (600, 240, 512, "hamming"),
         (480, 240, 512, "blackman")],
    )
    def test_invalid_parameters(self, window, hop, n_fft, fn):
        """Test that invalid STFT parameters raise FeatureError."""
        with pytest.raises(FeatureError):
            stft_power(mono(np.zeros(1000)), window, hop, n_fft, fn)

    def test_empty_buffer(self):
        """Test that an empty buffer raises FeatureError."""
        with pytest.raises(FeatureError):
            stft_power(mono(np.zeros(0)), 480, 240, 512)


class TestFilterbanks:
    """Tests for the linear and mel filterbanks."""

    def test_linear_boundaries_equally_spaced(self):
        """Test that 20 linear filters over 0-4000 Hz have edges at k*4000/21."""
        fb = linear_filterbank(20, 512, 16000, 0.0, 4000.0)

        np.testing.assert_allclose(fb.edges_hz, np.arange(22) * 4000.0 / 21)
        assert fb.weights.shape == (20, 257)

    def test_single_filter_peaks_at_midpoint(self):
        """Test that one filter spans the band and peaks at its middle."""
        fb = linear_filterbank(1, 512, 16000, 0.0, 8000.0)

        assert fb.center_hz[0] == pytest.approx(4000.0)
        assert fb.weights[0, 128] == pytest.approx(1.0)
        assert fb.weights[0, 0] == 0.0

    @pytest.mark.parametrize("make", [linear_filterbank, mel_filterbank])
    @pytest.mark.parametrize(("n", "f_min", "f_max"), [(20, 0.0, 4000.0), (40, 0.0, 8000.0),
                                                       (20, 30.0, 8000.0)])
    def test_interior_bins_covered(self, make, n, f_min, f_max):
        """Test that every bin strictly inside the band has a nonzero weight."""
        fb = make(n, 512, 16000, f_min, f_max)
        bin_hz = np.arange(257) * 16000 / 512
        inside = (bin_hz > f_min) & (bin_hz < f_max)

        assert (fb.weights >= 0).all()
        assert (fb.weights.sum(axis=1) > 0).all()
        assert (fb.weights[:, inside].sum(axis=0) > 0).all()

    def test_mel_scale(self):
        """Test the mel mapping at 0 and 700 Hz."""
        assert hz_to_mel(0.0) == 0.0
        assert hz_to_mel(700.0) == pytest.approx(2595.0 * math.log10(2.0))
        assert hz_to_mel(700.0) == pytest.approx(781.17, abs=0.01)

    def test_mel_centres_increase(self):
        """Test that mel filter centres increase monotonically in Hz."""
        fb = mel_filterbank(40, 512, 16000, 0.0, 8000.0)
        assert (np.diff(fb.center_hz) > 0).all()
        assert fb.edges_hz[0] == 0.0
        assert fb.edges_hz[-1] == 8000.0

    def test_too_many_filters(self):
        """Test that filters narrower than a bin raise FeatureError."""
        with pytest.raises(FeatureError, match="cover no FFT bin"):
            linear_filterbank(200, 64, 16000, 0.0, 8000.0)

    def test_band_above_nyquist(self):
        """Test that f_max above Nyquist raises FeatureError."""
        with pytest.raises(FeatureError):
            linear_filterbank(20, 512, 8000, 0.0, 6000.0)


class TestCepstra:
    """Tests for log filterbank energies and the DCT."""

    def test_constant_energies(self):
        """Test that equal filter energies leave only coefficient 0."""
        e0 = 3.0
        c = cepstra(np.full((2, 8), e0), identity_bank(8), 8)

        np.testing.assert_allclose(c[:, 0], math.sqrt(8) * math.log(e0 + 1e-10))
        np.testing.assert_allclose(c[:, 1:], 0.0, atol=1e-12)

    def test_zero_power_frame(self):
        """Test that a zero-power frame maps to the log floor."""
        c = cepstra(np.zeros((1, 8)), identity_bank(8), 8, log_floor=1e-10)

        assert c[0, 0] == pytest.approx(math.sqrt(8) * math.log(1e-10))
        np.testing.assert_allclose(c[0, 1:], 0.0, atol=1e-9)

    def test_matches_direct_summation(self):
        """Test the DCT against a direct O(n^2) summation."""
        rng = np.random.default_rng(0)
        for _ in range(20):
            power = rng.uniform(0.1, 10.0, size=(1, 20))
            c = cepstra(power, identity_bank(20), 20)
            np.testing.assert_allclose(c[0], dct_oracle(np.log(power[0] + 1e-10)), atol=1e-9)

    def test_transpose_inverts(self):
        """Test that the orthonormal DCT followed by its transpose recovers the input."""
        n = 20
        basis = cepstra(np.exp(np.eye(n)), identity_bank(n), n, log_floor=0.0)
        rng = np.random.default_rng(1)
        x = rng.standard_normal(n)
        np.testing.assert_allclose(basis.T @ (basis @ x), x, atol=1e-9)

    def test_bin_mismatch(self):
        """Test that a spectrum/filterbank size mismatch raises FeatureError."""
        with pytest.raises(FeatureError):
            cepstra(np.ones((3, 10)), identity_bank(8), 4)


class TestDeltas:
    """Tests for regression deltas."""

    def test_constant_sequence(self):
        """Test that a constant sequence has zero deltas."""
        feat = FeatureMatrix(values=np.full((10, 3), 2.5), kind=FeatureKind.LFCC, frame_hop_ms=15)
        out = add_deltas(feat)

        assert out.dims == 9
        assert not out.values[:, 3:].any()

    def test_linear_ramp_slope(self):
        """Test that the delta of a ramp equals its slope on interior frames."""
        t = np.arange(12, dtype=float)[:, None]
        feat = FeatureMatrix(values=0.5 * t, kind=FeatureKind.LFCC, frame_hop_ms=15)

        out = add_deltas(feat, n=2)

        np.testing.assert_array_equal(out.values[2:-2, 1], 0.5)
        np.testing.assert_array_equal(out.values[:, 0], feat.values[:, 0])

    def test_single_frame(self):
        """Test that a single frame has zero deltas."""
        feat = FeatureMatrix(values=np.array([[1.0, -2.0]]), kind=FeatureKind.MFCC, frame_hop_ms=10)
        out = add_deltas(feat)

        np.testing.assert_array_equal(out.values, [[1.0, -2.0, 0.0, 0.0, 0.0, 0.0]])


class TestExtractors:
    """Tests for the LFCC, MFCC and LOGSPEC pipelines."""

    def test_lfcc_shape(self):
        """Test that one second gives a 65 x 60 LFCC matrix."""
        feat = extract_lfcc(mono(tone(440, seconds=1.0)))

        assert feat.values.shape == (65, 60)
        assert feat.kind is FeatureKind.LFCC
        assert feat.frame_hop_ms == 15.0

    def test_lfcc_baseline_preset(self):
        """Test that the 20 ms / 10 ms preset gives more frames and the same width."""
        feat = extract_lfcc(mono(tone(440, seconds=1.0)), FeatureConfig.lfcc("M01"))
        assert feat.values.shape == (99, 60)

    def test_silence_is_finite(self):
        """Test that digital silence produces finite features."""
        for feat in (
            extract_lfcc(mono(np.zeros(16000))),
            extract_mfcc(mono(np.zeros(16000))),
        ):
            assert np.isfinite(feat.values).all()

    def test_mfcc_shape(self):
        """Test that MFCC features are 72-dimensional."""
        feat = extract_mfcc(mono(tone(440, seconds=1.0)))
        assert feat.dims == 72

    def test_mfcc_static_constant_for_stationary_tone(self):
        """Test that a stationary tone gives constant static coefficients on interior frames."""
        freq = 64 * 16000 / 512
        feat = extract_mfcc(mono(tone(freq, seconds=1.0)))
        static = feat.values[1:-1, :24]

        np.testing.assert_allclose(static, np.broadcast_to(static[0], static.shape), atol=1e-6)

    def test_logspec_silence(self):
        """Test that silence maps to 10*log10(log_floor) in every cell."""
        feat = extract_logspec(mono(np.zeros(16000)))

        assert feat.dims == 1025
        np.testing.assert_allclose(feat.values, 10 * math.log10(1e-10))

    def test_logspec_peak(self):
        """Test that a bin-centred sine peaks at its hand-computed level."""
        k = 128
        signal = tone(k * 16000 / 2048, seconds=1.0, amp=1.0)
        cfg = FeatureConfig.logspec(window_fn="rectangular")
        feat = extract_logspec(mono(signal), cfg)

        expected = 10 * math.log10((2048 / 2) ** 2)
        assert feat.values[0, k] == pytest.approx(expected, abs=1.0)

    def test_dispatch_by_kind(self):
        """Test that extract dispatches on the config kind."""
        buf = mono(tone(440, seconds=0.5))
        assert extract(buf, FeatureConfig.mfcc()).kind is FeatureKind.MFCC

    def test_wrong_sample_rate(self):
        """Test that features refuse audio at another rate."""
        with pytest.raises(FeatureError, match="resample"):
            extract_lfcc(mono(np.zeros(8000), rate=8000))

    def test_config_validation(self):
        """Test that more coefficients than filters is rejected."""
        with pytest.raises(ValidationError):
            FeatureConfig.lfcc(n_coeffs=30)
