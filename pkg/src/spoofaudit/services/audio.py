"""WAV decoding, mixdown and resampling.

Everything downstream works on mono float64 samples at ``WORKING_RATE``.
"""

import logging
from math import gcd
from pathlib import Path

import numpy as np
import soundfile as sf
from scipy.signal import firwin, resample_poly

from spoofaudit.errors import (
    AudioFileNotFoundError,
    MalformedAudioError,
    UnsupportedCodecError,
    UsageError,
)
from spoofaudit.models.audio import AudioBuffer

logger = logging.getLogger(__name__)

WORKING_RATE = 16000

SUPPORTED_SUBTYPES = frozenset({"PCM_16", "FLOAT"})
RIFF_FORMATS = frozenset({"WAV", "WAVEX"})

TAPS_PER_PHASE = 64
KAISER_BETA = 8.6


def read_wav(path: Path | str) -> AudioBuffer:
    """Decode a RIFF/WAVE file holding PCM16 or float32 samples.

    PCM16 values are divided by 32768. Multi-channel files keep their channels as columns.
    """
    path = Path(path)
    if not path.is_file():
        raise AudioFileNotFoundError(path)

    try:
        info = sf.info(str(path))
    except sf.LibsndfileError as e:
        raise MalformedAudioError(path, str(e)) from e

    if info.format not in RIFF_FORMATS:
        raise MalformedAudioError(path, f"container is {info.format}, not RIFF/WAVE")
    if info.subtype not in SUPPORTED_SUBTYPES:
        raise UnsupportedCodecError(path, info.subtype)

    try:
        data, sample_rate = sf.read(str(path), dtype="float64", always_2d=True)
    except sf.LibsndfileError as e:
        raise MalformedAudioError(path, str(e)) from e

    if info.subtype == "FLOAT":
        peak = float(np.max(np.abs(data))) if data.size else 0.0
        if peak > 1.0:
            logger.warning(f"{path.name}: float samples peak at {peak:.3f}, clipping to [-1, 1]")
            data = np.clip(data, -1.0, 1.0)

    channels = data.shape[1]
    samples = data[:, 0].copy() if channels == 1 else data
    return AudioBuffer(samples=samples, sample_rate=int(sample_rate), channel_count=channels)


def to_mono(buf: AudioBuffer) -> AudioBuffer:
    """Average channels per frame. Mono input is returned as is."""
    if buf.is_mono:
        return buf
    return AudioBuffer(
        samples=buf.samples.mean(axis=1),
        sample_rate=buf.sample_rate,
        channel_count=buf.channel_count,
    )


def _polyphase_filter(up: int, down: int) -> np.ndarray:
    cutoff = 1.0 / max(up, down)
    return firwin(TAPS_PER_PHASE * up + 1, cutoff, window=("kaiser", KAISER_BETA))


def resample(buf: AudioBuffer, target_hz: int) -> AudioBuffer:
    """Band-limited polyphase resampling to ``target_hz``.

    The output holds ``round(len * target / source)`` samples.
    """
    if target_hz <= 0:
        raise UsageError(f"target sample rate must be positive, got {target_hz}")
    if target_hz == buf.sample_rate:
        return buf

    g = gcd(target_hz, buf.sample_rate)
    up, down = target_hz // g, buf.sample_rate // g
    n_out = round(buf.n_frames * target_hz / buf.sample_rate)

    if buf.n_frames == 0:
        out = np.zeros((0, *buf.samples.shape[1:]), dtype=np.float64)
    else:
        out = resample_poly(buf.samples, up, down, axis=0, window=_polyphase_filter(up, down))
        if out.shape[0] >= n_out:
            out = out[:n_out]
        else:
            pad = [(0, n_out - out.shape[0])] + [(0, 0)] * (out.ndim - 1)
            out = np.pad(out, pad)

    return AudioBuffer(
        samples=np.ascontiguousarray(out, dtype=np.float64),
        sample_rate=target_hz,
        channel_count=buf.channel_count,
    )


def load_working_audio(path: Path | str, target_hz: int = WORKING_RATE) -> AudioBuffer:
    """Read, mix down and resample a file to the working rate."""
    buf = read_wav(path)
    if buf.sample_rate != target_hz:
        logger.debug(f"Resampling {Path(path).name}: {buf.sample_rate} Hz -> {target_hz} Hz")
    return resample(to_mono(buf), target_hz)
