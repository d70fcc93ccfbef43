from spoofaudit.utils.provenance import (
    build_provenance,
    config_digest,
    ids_digest,
    verify_provenance,
    write_sidecar,
)

__all__ = [
    "build_provenance",
    "config_digest",
    "ids_digest",
    "verify_provenance",
    "write_sidecar",
]
