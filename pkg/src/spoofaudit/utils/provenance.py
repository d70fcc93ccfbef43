import hashlib
import json
from collections.abc import Iterable, Mapping
from pathlib import Path
from typing import Any

from spoofaudit import __version__


def _canonical(payload: Mapping[str, Any]) -> str:
    return json.dumps(payload, sort_keys=True, separators=(",", ":"), default=str)


def config_digest(payload: Mapping[str, Any]) -> str:
    """SHA-256 over the canonical JSON form of a resolved configuration."""
    return hashlib.sha256(_canonical(payload).encode()).hexdigest()


def build_provenance(stage: str, config: Mapping[str, Any]) -> dict[str, Any]:
    # No timestamps
    return {
        "stage": stage,
        "tool_version": __version__,
        "config": dict(config),
        "digest": config_digest({"stage": stage, **config}),
    }


def verify_provenance(provenance: Mapping[str, Any]) -> bool:
    if "digest" not in provenance or "config" not in provenance:
        return False
    expected = config_digest({"stage": provenance.get("stage"), **provenance["config"]})
    return expected == provenance["digest"]


def ids_digest(ids: Iterable[str]) -> str:
    """SHA-256 over newline-joined utterance ids, in the given order."""
    h = hashlib.sha256()
    for utt_id in ids:
        h.update(utt_id.encode())
        h.update(b"\n")
    return h.hexdigest()


def write_sidecar(artifact: Path, provenance: Mapping[str, Any]) -> Path:
    """Write ``<artifact>.provenance.json`` next to a non-JSON artifact."""
    path = artifact.with_name(artifact.name + ".provenance.json")
    path.write_text(json.dumps(provenance, indent=2, sort_keys=True, default=str) + "\n")
    return path
