"""Small synthetic corpus for smoke tests and demos.

Bona fide utterances are harmonic tones with a random fundamental; synthetic ones are
band-limited noise. Both are one second at 16 kHz.
"""

import logging
from pathlib import Path

import numpy as np
import pandas as pd
import soundfile as sf
from scipy.signal import butter, sosfilt

from spoofaudit.models.audio import AudioBuffer
from spoofaudit.models.demographics import Accent, AgeGroup, Fluency, Gender, Label
from spoofaudit.schemas.records import ManifestEntry
from spoofaudit.services.audio import WORKING_RATE
from spoofaudit.services.score_io import NATIVE_COLUMNS

logger = logging.getLogger(__name__)

DURATION_S = 1.0
PEAK = 0.5

_GENDERS = (Gender.MALE, Gender.FEMALE)
_AGES = (AgeGroup.TWENTIES, AgeGroup.THIRTIES)


def _normalize(x: np.ndarray) -> np.ndarray:
    return PEAK * x / np.max(np.abs(x))


def harmonic_tone(rng: np.random.Generator, n_samples: int, rate: int) -> np.ndarray:
    t = np.arange(n_samples) / rate
    f0 = rng.uniform(100.0, 300.0)
    x = np.zeros(n_samples)
    for k in range(1, 7):
        if k * f0 >= rate / 2:
            break
        x += np.sin(2 * np.pi * k * f0 * t + rng.uniform(0, 2 * np.pi)) / k
    x *= np.hanning(n_samples) ** 0.25
    x += 1e-3 * rng.standard_normal(n_samples)
    return _normalize(x)


def filtered_noise(rng: np.random.Generator, n_samples: int, rate: int) -> np.ndarray:
    low = rng.uniform(1000.0, 2500.0)
    high = low + rng.uniform(1000.0, 3000.0)
    sos = butter(4, [low, min(high, 0.45 * rate)], btype="band", fs=rate, output="sos")
    return _normalize(sosfilt(sos, rng.standard_normal(n_samples)))


def toy_corpus(n: int, seed: int = 0) -> list[tuple[ManifestEntry, AudioBuffer]]:
    """``n`` bona fide and ``n`` synthetic utterances, bona fide first.

    Bona fide entries cycle through male/female and 20s/30s with accent US so the corpus can
    feed a small study.
    """
    if n <= 0:
        raise ValueError(f"n must be positive, got {n}")
    n_samples = int(DURATION_S * WORKING_RATE)
    out = []
    for i in range(2 * n):
        rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(i,)))
        if i < n:
            entry = ManifestEntry(
                utt_id=f"toy_b{i:04d}",
                label=Label.BONAFIDE,
                gender=_GENDERS[i % 2],
                age_group=_AGES[(i // 2) % 2],
                accent=Accent.US,
                fluency=Fluency.FLUENT,
            )
            samples = harmonic_tone(rng, n_samples, WORKING_RATE)
        else:
            entry = ManifestEntry(utt_id=f"toy_s{i - n:04d}", label=Label.SPOOF)
            samples = filtered_noise(rng, n_samples, WORKING_RATE)
        out.append((entry, AudioBuffer(samples=samples, sample_rate=WORKING_RATE)))
    return out


def write_toy_corpus(root: Path, n: int, seed: int = 0) -> Path:
    """Write ``wav/<utt_id>.wav`` (PCM16) plus ``manifest.csv`` under ``root``.

    Returns the manifest path. Paths in the manifest are relative to ``root``.
    """
    root = Path(root)
    wav_dir = root / "wav"
    wav_dir.mkdir(parents=True, exist_ok=True)
    rows = []
    for entry, buf in toy_corpus(n, seed):
        rel = f"wav/{entry.utt_id}.wav"
        sf.write(str(root / rel), buf.samples, buf.sample_rate, subtype="PCM_16")
        rows.append({**{c: entry.attribute(c) for c in NATIVE_COLUMNS}, "path": rel})

    manifest = root / "manifest.csv"
    pd.DataFrame(rows, columns=[*NATIVE_COLUMNS, "path"]).to_csv(manifest, index=False)
    logger.info(f"Wrote toy corpus of {len(rows)} utterances to {root}")
    return manifest
