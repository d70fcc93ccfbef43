"""Exception hierarchy.

Library code raises these; the CLI maps ``exit_code`` to the process exit status.
"""


class SpoofAuditError(Exception):
    exit_code: int = 3


class UsageError(SpoofAuditError):
    exit_code = 1


class DataError(SpoofAuditError):
    exit_code = 2


class InvariantViolation(SpoofAuditError):
    exit_code = 3


# Audio


class AudioFileNotFoundError(DataError):
    def __init__(self, path):
        self.path = path
        super().__init__(f"Audio file not found: {path}")


class MalformedAudioError(DataError):
    def __init__(self, path, reason: str):
        self.path = path
        super().__init__(f"Malformed RIFF/WAVE file {path}: {reason}")


class UnsupportedCodecError(DataError):
    def __init__(self, path, codec: str):
        self.path = path
        self.codec = codec
        super().__init__(f"Unsupported codec in {path}: {codec} (expected PCM_16 or FLOAT)")


# Features and models


class FeatureError(DataError):
    pass


class CacheFormatError(DataError):
    pass


class NonFiniteDataError(DataError):
    pass


class InsufficientDataError(DataError):
    pass


class ModelFileError(DataError):
    pass


# Manifests and scores


class ManifestError(DataError):
    pass


class ScoreFileError(DataError):
    pass


class MissingScoresError(DataError):
    def __init__(self, missing: list[str]):
        self.missing = sorted(missing)
        preview = ", ".join(self.missing[:20])
        more = f" (+{len(self.missing) - 20} more)" if len(self.missing) > 20 else ""
        super().__init__(f"{len(self.missing)} utterance(s) have no score: {preview}{more}")


# Metrics, studies and reports


class UnattainableTargetError(DataError):
    pass


class UndersizedPoolError(InsufficientDataError):
    def __init__(self, cell: str, available: int, required: int):
        self.cell = cell
        self.available = available
        self.required = required
        super().__init__(
            f"Pool for {cell} has {available} bona fide utterance(s), "
            f"needs {required} (short by {required - available})"
        )


class InconsistentSetsError(DataError):
    pass
