"""On-disk feature cache, one ``<utt_id>.feat`` file per utterance.

Layout (little-endian)::

    offset  size  field
    0       4     kind tag: b"LFCC" | b"MFCC" | b"LSPC"
    4       4     frames (uint32)
    8       4     dims (uint32)
    12      8     frame hop in ms (float64)
    20      ...   frames * dims float64, row-major
"""

import logging
import struct
from collections.abc import Iterable, Iterator
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np
from pydantic import ValidationError

from spoofaudit.errors import CacheFormatError, UsageError
from spoofaudit.models.features import FeatureKind, FeatureMatrix
from spoofaudit.schemas.features import FeatureConfig
from spoofaudit.schemas.records import ManifestEntry
from spoofaudit.services.audio import load_working_audio
from spoofaudit.services.features import extract

logger = logging.getLogger(__name__)

HEADER = struct.Struct("<4sIId")
SUFFIX = ".feat"
CONFIG_NAME = "feature_config.json"


def encode_features(feat: FeatureMatrix) -> bytes:
    header = HEADER.pack(feat.kind.cache_tag, feat.n_frames, feat.dims, feat.frame_hop_ms)
    return header + np.ascontiguousarray(feat.values, dtype="<f8").tobytes()


def decode_features(data: bytes, source: str = "<bytes>") -> FeatureMatrix:
    if len(data) < HEADER.size:
        raise CacheFormatError(f"{source}: truncated header ({len(data)} bytes)")
    tag, frames, dims, hop_ms = HEADER.unpack_from(data)
    try:
        kind = FeatureKind.from_cache_tag(tag)
    except ValueError as e:
        raise CacheFormatError(f"{source}: {e}") from e

    expected = HEADER.size + frames * dims * 8
    if len(data) != expected:
        raise CacheFormatError(
            f"{source}: header declares {frames}x{dims} values ({expected} bytes), "
            f"file has {len(data)} bytes"
        )
    values = np.frombuffer(data, dtype="<f8", offset=HEADER.size).reshape(frames, dims)
    return FeatureMatrix(values=values.astype(np.float64), kind=kind, frame_hop_ms=hop_ms)


class FeatureCache:
    def __init__(self, root: Path):
        self.root = Path(root)

    def path_for(self, utt_id: str) -> Path:
        if not utt_id or "/" in utt_id or "\\" in utt_id or utt_id in (".", ".."):
            raise CacheFormatError(f"utterance id {utt_id!r} cannot be used as a cache file name")
        return self.root / f"{utt_id}{SUFFIX}"

    def __contains__(self, utt_id: str) -> bool:
        return self.path_for(utt_id).is_file()

    def write(self, utt_id: str, feat: FeatureMatrix) -> Path:
        self.root.mkdir(parents=True, exist_ok=True)
        path = self.path_for(utt_id)
        tmp = path.with_suffix(SUFFIX + ".tmp")
        tmp.write_bytes(encode_features(feat))
        tmp.replace(path)
        return path

    def read(self, utt_id: str) -> FeatureMatrix:
        path = self.path_for(utt_id)
        if not path.is_file():
            raise CacheFormatError(f"no cached features for {utt_id} under {self.root}")
        return decode_features(path.read_bytes(), source=str(path))

    def ids(self) -> Iterator[str]:
        for path in sorted(self.root.glob(f"*{SUFFIX}")):
            yield path.name.removesuffix(SUFFIX)

    def write_config(self, cfg: FeatureConfig) -> None:
        """Record the front-end configuration; a cache holds features of one configuration only."""
        path = self.root / CONFIG_NAME
        if path.is_file():
            existing = self.read_config()
            if existing != cfg:
                raise UsageError(
                    f"{self.root} holds features made with a different configuration; "
                    f"choose another cache directory"
                )
            return
        self.root.mkdir(parents=True, exist_ok=True)
        path.write_text(cfg.model_dump_json(indent=2) + "\n")

    def read_config(self) -> FeatureConfig:
        path = self.root / CONFIG_NAME
        try:
            return FeatureConfig.model_validate_json(path.read_text())
        except FileNotFoundError as e:
            raise CacheFormatError(f"{self.root} has no {CONFIG_NAME}; run extract first") from e
        except ValidationError as e:
            raise CacheFormatError(f"Invalid {path}: {e}") from e


def audio_path(entry: ManifestEntry, audio_dir: Path) -> Path:
    """Manifest path resolved against ``audio_dir``; ``<utt_id>.wav`` when the entry has none.

    MP3 paths (Common Voice) resolve to the WAV file of the same stem.
    """
    path = Path(audio_dir) / (entry.path or f"{entry.utt_id}.wav")
    return path.with_suffix(".wav") if path.suffix.lower() == ".mp3" else path


def _extract_one(task: tuple[str, str, FeatureConfig, str]) -> str:
    utt_id, path, cfg, root = task
    feat = extract(load_working_audio(path, cfg.sample_rate), cfg)
    FeatureCache(Path(root)).write(utt_id, feat)
    return utt_id


def extract_to_cache(
    entries: Iterable[ManifestEntry],
    audio_dir: Path,
    cfg: FeatureConfig,
    cache: FeatureCache,
    jobs: int = 1,
    overwrite: bool = False,
) -> int:
    """Extract features for every entry into ``cache``. Returns the number of files written.

    Cache content does not depend on ``jobs``.
    """
    cache.write_config(cfg)
    tasks = [
        (e.utt_id, str(audio_path(e, audio_dir)), cfg, str(cache.root))
        for e in entries
        if overwrite or e.utt_id not in cache
    ]
    if jobs <= 1 or len(tasks) <= 1:
        done = [_extract_one(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            done = list(pool.map(_extract_one, tasks, chunksize=16))
    logger.info(
        f"Extracted {cfg.kind.value} features for {len(done)} utterance(s) into {cache.root}"
    )
    return len(done)
