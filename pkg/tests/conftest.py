from pathlib import Path

import numpy as np
import pandas as pd
import pytest
import soundfile as sf

from spoofaudit.models.demographics import Label
from spoofaudit.schemas.metrics import ThresholdSet
from spoofaudit.schemas.records import ScoreRecord
from spoofaudit.schemas.study import GroupSpec, StudySpec
from spoofaudit.services.score_io import NATIVE_COLUMNS


def tone(freq: float, seconds: float = 0.5, rate: int = 16000, amp: float = 0.5) -> np.ndarray:
    """A sine wave as float64 samples."""
    t = np.arange(int(seconds * rate)) / rate
    return amp * np.sin(2 * np.pi * freq * t)


def write_pcm16_wav(path: Path, samples: np.ndarray, rate: int = 16000) -> Path:
    """Write samples (mono 1-D or frames x channels) as a 16-bit PCM WAV."""
    path.parent.mkdir(parents=True, exist_ok=True)
    sf.write(str(path), samples, rate, subtype="PCM_16")
    return path


def write_native_csv(path: Path, rows: list[dict[str, str]], extra: tuple[str, ...] = ()) -> Path:
    """Write a native manifest; missing demographic cells are left empty."""
    columns = [*NATIVE_COLUMNS, *extra]
    pd.DataFrame([{c: row.get(c, "") for c in columns} for row in rows], columns=columns).to_csv(
        path, index=False
    )
    return path


def make_pool(
    cells: dict[tuple[str, str], int],
    n_spoof: int = 50,
    seed: int = 0,
    shift: dict[tuple[str, str], float] | None = None,
) -> list[ScoreRecord]:
    """Scored records for (gender, age_group) cells with accent US, plus spoof records.

    Bona fide scores are N(shift, 1); spoof scores are N(3, 1).
    """
    rng = np.random.default_rng(seed)
    shift = shift or {}
    records = []
    for (gender, age), n in cells.items():
        for i in range(n):
            records.append(
                ScoreRecord(
                    utt_id=f"b_{gender}_{age}_{i:04d}",
                    score=float(rng.normal(shift.get((gender, age), 0.0), 1.0)),
                    label=Label.BONAFIDE,
                    gender=gender,
                    age_group=age,
                    accent="US",
                    fluency="fluent",
                )
            )
    for i in range(n_spoof):
        records.append(
            ScoreRecord(utt_id=f"s_{i:04d}", score=float(rng.normal(3.0, 1.0)), label=Label.SPOOF)
        )
    return records


def gender_spec(samples: int = 20, repeats: int = 3, base_seed: int = 0) -> StudySpec:
    """Gender study over the 20s and 30s groups."""
    return StudySpec(
        name="gender-small",
        kind="gender",
        fixed={"accent": "US"},
        group_by="age_group",
        groups=[
            GroupSpec(value="20s", samples_per_set=samples),
            GroupSpec(value="30s", samples_per_set=samples),
        ],
        varied="gender",
        values=["male", "female"],
        repeats=repeats,
        base_seed=base_seed,
    )


@pytest.fixture
def thresholds() -> ThresholdSet:
    return ThresholdSet(t_eer=1.5, t_fpr=1.0, t_fnr=2.0, reference_id="ref")


@pytest.fixture
def pool() -> list[ScoreRecord]:
    return make_pool(
        {("male", "20s"): 60, ("female", "20s"): 60, ("male", "30s"): 40, ("female", "30s"): 40},
        shift={("female", "20s"): 0.8},
    )


@pytest.fixture(scope="session")
def toy_dir(tmp_path_factory) -> Path:
    """A toy corpus of 200 bona fide and 200 synthetic utterances, shared by the slow tests."""
    from spoofaudit.services.toy import write_toy_corpus

    root = tmp_path_factory.mktemp("toy")
    write_toy_corpus(root, n=200, seed=0)
    return root
