"""
Tests for the feature cache.
"""

import numpy as np
import pytest

from spoofaudit.errors import CacheFormatError, UsageError
from spoofaudit.models.demographics import Label
from spoofaudit.models.features import FeatureKind, FeatureMatrix
from spoofaudit.schemas.features import FeatureConfig
from spoofaudit.schemas.records import ManifestEntry
from spoofaudit.services.cache import (
    HEADER,
    FeatureCache,
    audio_path,
    decode_features,
    encode_features,
    extract_to_cache,
)

from .conftest import tone, write_pcm16_wav


def sample_matrix() -> FeatureMatrix:
    values = np.arange(12, dtype=np.float64).reshape(4, 3) / 7.0
    return FeatureMatrix(values=values, kind=FeatureKind.MFCC, frame_hop_ms=10.0)


class TestCodec:
    """Tests for the binary cache format."""

    def test_header_layout(self):
        """Test that the header carries tag, shape and hop in little-endian order."""
        data = encode_features(sample_matrix())

        assert data[:4] == b"MFCC"
        assert HEADER.unpack_from(data)[1:] == (4, 3, 10.0)
        assert len(data) == HEADER.size + 4 * 3 * 8

    def test_decode_restores_values(self):
        """Test that decoding returns the encoded matrix exactly."""
        feat = decode_features(encode_features(sample_matrix()))

        assert feat.kind is FeatureKind.MFCC
        np.testing.assert_array_equal(feat.values, sample_matrix().values)

    def test_truncated_header(self):
        """Test that a short file raises CacheFormatError."""
        with pytest.raises(CacheFormatError, match="truncated"):
            decode_features(b"LFCC\x00")

    def test_size_mismatch(self):
        """Test that a payload of the wrong length raises CacheFormatError."""
        with pytest.raises(CacheFormatError, match="header declares"):
            decode_features(encode_features(sample_matrix())[:-8])

    def test_unknown_tag(self):
        """Test that an unknown kind tag raises CacheFormatError."""
        data = b"ABCD" + encode_features(sample_matrix())[4:]
        with pytest.raises(CacheFormatError):
            decode_features(data)


class TestFeatureCache:
    """Tests for FeatureCache."""

    def test_write_and_read(self, tmp_path):
        """Test that cached features are listed and read back."""
        cache = FeatureCache(tmp_path)
        cache.write("b", sample_matrix())
        cache.write("a", sample_matrix())

        assert list(cache.ids()) == ["a", "b"]
        assert "a" in cache
        assert "c" not in cache
        np.testing.assert_array_equal(cache.read("b").values, sample_matrix().values)

    def test_missing_entry(self, tmp_path):
        """Test that reading an uncached id raises CacheFormatError."""
        with pytest.raises(CacheFormatError, match="no cached features"):
            FeatureCache(tmp_path).read("ghost")

    @pytest.mark.parametrize("utt_id", ["", "a/b", "..", "x\\y"])
    def test_unsafe_ids(self, tmp_path, utt_id):
        """Test that ids unusable as file names are refused."""
        with pytest.raises(CacheFormatError):
            FeatureCache(tmp_path).path_for(utt_id)

    def test_config_is_recorded_once(self, tmp_path):
        """Test that a cache accepts its own configuration and refuses another."""
        cache = FeatureCache(tmp_path)
        cache.write_config(FeatureConfig.lfcc())
        cache.write_config(FeatureConfig.lfcc())

        assert cache.read_config() == FeatureConfig.lfcc()
        with pytest.raises(UsageError, match="different configuration"):
            cache.write_config(FeatureConfig.lfcc("M01"))

    def test_missing_config(self, tmp_path):
        """Test that a cache without a recorded configuration is reported."""
        with pytest.raises(CacheFormatError, match="run extract"):
            FeatureCache(tmp_path).read_config()


class TestExtractToCache:
    """Tests for extract_to_cache."""

    def test_extracts_missing_entries_only(self, tmp_path):
        """Test extraction from WAV files, skipping ids already cached."""
        audio = tmp_path / "wav"
        write_pcm16_wav(audio / "u1.wav", tone(300, seconds=0.5))
        write_pcm16_wav(audio / "clips" / "two.wav", tone(600, seconds=0.5))
        entries = [
            ManifestEntry(utt_id="u1", label=Label.BONAFIDE),
            ManifestEntry(utt_id="u2", path="clips/two.wav", label=Label.SPOOF),
        ]
        cache = FeatureCache(tmp_path / "cache")

        assert extract_to_cache(entries, audio, FeatureConfig.lfcc(), cache) == 2
        assert extract_to_cache(entries, audio, FeatureConfig.lfcc(), cache) == 0
        assert extract_to_cache(entries, audio, FeatureConfig.lfcc(), cache, overwrite=True) == 2

        feat = cache.read("u2")
        assert feat.kind is FeatureKind.LFCC
        assert feat.values.shape == (32, 60)

    def test_audio_path_default(self, tmp_path):
        """Test that an entry without a path resolves to <utt_id>.wav."""
        entry = ManifestEntry(utt_id="LA_0001", label=Label.BONAFIDE)
        assert audio_path(entry, tmp_path) == tmp_path / "LA_0001.wav"

    def test_audio_path_reads_converted_mp3(self, tmp_path):
        """Test that an MP3 manifest path resolves to the WAV file of the same stem."""
        entry = ManifestEntry(
            utt_id="cv1", label=Label.BONAFIDE, path="clips/common_voice_en_1.mp3"
        )
        assert audio_path(entry, tmp_path) == tmp_path / "clips" / "common_voice_en_1.wav"
