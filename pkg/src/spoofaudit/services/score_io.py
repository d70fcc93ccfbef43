"""Manifests, score files and their join into ``ScoreRecord`` lists.

Supported manifest formats:

- ``cvc_tsv``: Common Voice ``validated.tsv`` (bona fide, demographics from age/gender/accents)
- ``asvspoof_protocol``: ``SPEAKER UTT - SYSTEM KEY`` lines
- ``native_csv``: ``utt_id,label,gender,age_group,accent,fluency[,score][,path][,validated]``
- ``kept_ids``: one utterance id per line (bona fide stuttering speech)

Demographic fields that are missing or not recognised become ``unknown`` (or ``other`` for
accents outside the table) and are counted in the manifest's ``LoadReport``.
"""

import csv
import enum
import logging
import math
import tomllib
from collections.abc import Iterable, Iterator, Mapping
from importlib import resources
from pathlib import Path, PurePath

import pandas as pd
from pydantic import ValidationError

from spoofaudit.errors import ManifestError, MissingScoresError, ScoreFileError
from spoofaudit.models.demographics import (
    Accent,
    AgeGroup,
    Fluency,
    Gender,
    Label,
    Orientation,
)
from spoofaudit.schemas.records import LoadReport, ManifestEntry, ScoreRecord

logger = logging.getLogger(__name__)


class ManifestFormat(str, enum.Enum):
    CVC_TSV = "cvc_tsv"
    ASVSPOOF_PROTOCOL = "asvspoof_protocol"
    NATIVE_CSV = "native_csv"
    KEPT_IDS = "kept_ids"


NATIVE_COLUMNS = ("utt_id", "label", "gender", "age_group", "accent", "fluency")

CVC_AGES = {
    "teens": AgeGroup.TEENS,
    "twenties": AgeGroup.TWENTIES,
    "thirties": AgeGroup.THIRTIES,
    "fourties": AgeGroup.FORTIES,
    "forties": AgeGroup.FORTIES,
    "fifties": AgeGroup.FIFTIES,
    "sixties": AgeGroup.SIXTIES,
    "seventies": AgeGroup.SEVENTIES,
    "eighties": AgeGroup.EIGHTIES,
    "nineties": AgeGroup.NINETIES,
}

CVC_GENDERS = {
    "male": Gender.MALE,
    "male_masculine": Gender.MALE,
    "female": Gender.FEMALE,
    "female_feminine": Gender.FEMALE,
    "other": Gender.OTHER,
    "intersex": Gender.OTHER,
    "transgender": Gender.OTHER,
    "non-binary": Gender.OTHER,
}


def load_accent_table(path: Path | None = None) -> dict[str, Accent]:
    """Lower-cased Common Voice label -> canonical accent."""
    if path is None:
        raw = resources.files("spoofaudit.data").joinpath("accents.toml").read_bytes()
    else:
        raw = Path(path).read_bytes()
    doc = tomllib.loads(raw.decode("utf-8"))
    table: dict[str, Accent] = {}
    for tag, labels in doc.get("accents", {}).items():
        try:
            accent = Accent(tag)
        except ValueError as e:
            raise ManifestError(f"accent table: unknown canonical tag {tag!r}") from e
        for label in labels:
            table[label.strip().lower()] = accent
    return table


class Manifest:
    """Ordered, id-unique collection of manifest entries."""

    def __init__(self, entries: Iterable[ManifestEntry], report: LoadReport | None = None):
        self._entries: list[ManifestEntry] = []
        self._index: dict[str, ManifestEntry] = {}
        for entry in entries:
            if entry.utt_id in self._index:
                raise ManifestError(f"duplicate utt_id {entry.utt_id!r}")
            self._entries.append(entry)
            self._index[entry.utt_id] = entry
        self.report = report or LoadReport(source="<memory>", format="native_csv")
        self.report.entries = len(self._entries)

    def __len__(self) -> int:
        return len(self._entries)

    def __iter__(self) -> Iterator[ManifestEntry]:
        return iter(self._entries)

    def __contains__(self, utt_id: str) -> bool:
        return utt_id in self._index

    def __getitem__(self, utt_id: str) -> ManifestEntry:
        return self._index[utt_id]

    @property
    def ids(self) -> list[str]:
        return [e.utt_id for e in self._entries]

    def select(
        self,
        label: Label | None = None,
        validated_only: bool = False,
        **attributes: str,
    ) -> list[ManifestEntry]:
        """Entries matching a label and exact demographic values, in manifest order."""
        out = []
        for entry in self._entries:
            if label is not None and entry.label is not label:
                continue
            if validated_only and not entry.validated:
                continue
            if all(entry.attribute(k) == v for k, v in attributes.items()):
                out.append(entry)
        return out

    @classmethod
    def merge(cls, *manifests: "Manifest") -> "Manifest":
        report = LoadReport(
            source=" + ".join(m.report.source for m in manifests), format="merged"
        )
        for m in manifests:
            for reason, count in m.report.degraded.items():
                report.degraded[reason] = report.degraded.get(reason, 0) + count
        return cls((e for m in manifests for e in m), report)


def _enum_or_unknown(enum_cls, row: Mapping[str, str], field: str, report: LoadReport):
    unknown = enum_cls("unknown")
    value = row.get(field, "").strip()
    if not value:
        report.note(f"{field}:missing")
        return unknown
    try:
        return enum_cls(value)
    except ValueError:
        report.note(f"{field}:unrecognized")
        return unknown


def _starts_with_label(text: str, label: str) -> bool:
    return text.startswith(label) and text[len(label) :].lstrip()[:1] in ("", ",")


def _split_accents(raw: str, table: Mapping[str, Accent]) -> list[str]:
    """Split a multi-label accent cell on commas. Known labels may themselves contain commas."""
    labels = sorted(table, key=len, reverse=True)
    parts = []
    rest = raw.lower()
    while rest := rest.lstrip(" ,"):
        label = next((lab for lab in labels if _starts_with_label(rest, lab)), None)
        if label is None:
            label, _, rest = rest.partition(",")
        else:
            rest = rest[len(label) :]
        parts.append(label.strip())
    return parts


def _cvc_accent(raw: str, table: Mapping[str, Accent], report: LoadReport) -> Accent:
    raw = raw.strip()
    if not raw:
        report.note("accent:missing")
        return Accent.UNKNOWN
    if raw.lower() in table:
        return table[raw.lower()]

    tags = {table.get(part) for part in _split_accents(raw, table)}
    tags.discard(None)
    if len(tags) == 1:
        return tags.pop()
    report.note("accent:conflicting" if tags else "accent:unmapped")
    return Accent.OTHER


def _read_table(path: Path, sep: str) -> pd.DataFrame:
    try:
        return pd.read_csv(
            path,
            sep=sep,
            dtype=str,
            keep_default_na=False,
            na_filter=False,
            quoting=csv.QUOTE_NONE if sep == "\t" else csv.QUOTE_MINIMAL,
            encoding="utf-8",
        )
    except FileNotFoundError as e:
        raise ManifestError(f"Manifest not found: {path}") from e
    except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as e:
        raise ManifestError(f"Cannot parse {path}: {e}") from e


def _require(df: pd.DataFrame, columns: Iterable[str], path: Path) -> None:
    missing = [c for c in columns if c not in df.columns]
    if missing:
        raise ManifestError(f"{path}: missing mandatory column(s) {', '.join(missing)}")


def _load_cvc(path: Path, report: LoadReport, accent_table: Mapping[str, Accent]):
    df = _read_table(path, "\t")
    accent_col = "accents" if "accents" in df.columns else "accent"
    _require(df, ("client_id", "path", "age", "gender", accent_col), path)
    has_votes = "up_votes" in df.columns and "down_votes" in df.columns

    for row in df.to_dict("records"):
        clip = row["path"].strip()
        if not clip:
            raise ManifestError(f"{path}: empty path cell")
        age = row["age"].strip().lower()
        if not age:
            report.note("age:missing")
        elif age not in CVC_AGES:
            report.note("age:unrecognized")
        gender = row["gender"].strip().lower()
        if not gender:
            report.note("gender:missing")
        elif gender not in CVC_GENDERS:
            report.note("gender:unrecognized")
        validated = True
        if has_votes:
            try:
                validated = int(row["up_votes"] or 0) > int(row["down_votes"] or 0)
            except ValueError:
                report.note("votes:unparseable")
                validated = False

        yield ManifestEntry(
            utt_id=PurePath(clip).stem,
            path=clip,
            label=Label.BONAFIDE,
            gender=CVC_GENDERS.get(gender, Gender.UNKNOWN),
            age_group=CVC_AGES.get(age, AgeGroup.UNKNOWN),
            accent=_cvc_accent(row[accent_col], accent_table, report),
            validated=validated,
        )


def _load_protocol(path: Path):
    try:
        lines = path.read_text(encoding="utf-8").splitlines()
    except FileNotFoundError as e:
        raise ManifestError(f"Protocol not found: {path}") from e

    for lineno, line in enumerate(lines, start=1):
        tokens = line.split()
        if not tokens:
            continue
        if len(tokens) < 5:
            raise ManifestError(
                f"{path}:{lineno}: expected 'SPEAKER UTT - SYSTEM KEY', got {line.strip()!r}"
            )
        try:
            label = Label(tokens[4])
        except ValueError as e:
            raise ManifestError(
                f"{path}:{lineno}: key must be 'bonafide' or 'spoof', got {tokens[4]!r}"
            ) from e
        yield lineno, ManifestEntry(utt_id=tokens[1], label=label)


def _load_native(path: Path, report: LoadReport):
    df = _read_table(path, ",")
    _require(df, ("utt_id", "label"), path)
    for lineno, row in enumerate(df.to_dict("records"), start=2):
        try:
            label = Label(row["label"].strip())
        except ValueError as e:
            raise ManifestError(f"{path}:{lineno}: invalid label {row['label']!r}") from e
        validated = row.get("validated", "true").strip().lower() not in ("false", "0", "no")
        path_cell = row.get("path", "").strip() or None
        yield lineno, ManifestEntry(
            utt_id=row["utt_id"].strip(),
            path=path_cell,
            label=label,
            gender=_enum_or_unknown(Gender, row, "gender", report),
            age_group=_enum_or_unknown(AgeGroup, row, "age_group", report),
            accent=_enum_or_unknown(Accent, row, "accent", report),
            fluency=_enum_or_unknown(Fluency, row, "fluency", report),
            validated=validated,
        )


def _load_kept_ids(path: Path):
    try:
        lines = path.read_text(encoding="utf-8").splitlines()
    except FileNotFoundError as e:
        raise ManifestError(f"Id list not found: {path}") from e
    for lineno, line in enumerate(lines, start=1):
        utt_id = line.strip()
        if not utt_id or utt_id.startswith("#"):
            continue
        yield lineno, ManifestEntry(
            utt_id=utt_id, label=Label.BONAFIDE, fluency=Fluency.STUTTERING
        )


def load_manifest(
    path: Path | str,
    format: ManifestFormat | str,
    accent_table: Mapping[str, Accent] | None = None,
) -> Manifest:
    path = Path(path)
    try:
        fmt = ManifestFormat(format)
    except ValueError as e:
        choices = ", ".join(f.value for f in ManifestFormat)
        raise ManifestError(f"unknown manifest format {format!r}; expected one of {choices}") from e

    report = LoadReport(source=str(path), format=fmt.value)
    seen: dict[str, int | None] = {}
    entries: list[ManifestEntry] = []

    if fmt is ManifestFormat.CVC_TSV:
        table = accent_table if accent_table is not None else load_accent_table()
        numbered = ((None, e) for e in _load_cvc(path, report, table))
    elif fmt is ManifestFormat.ASVSPOOF_PROTOCOL:
        numbered = _load_protocol(path)
    elif fmt is ManifestFormat.NATIVE_CSV:
        numbered = _load_native(path, report)
    else:
        numbered = _load_kept_ids(path)

    try:
        for lineno, entry in numbered:
            if entry.utt_id in seen:
                where = f" (line {lineno})" if lineno is not None else ""
                raise ManifestError(f"{path}: duplicate utt_id {entry.utt_id!r}{where}")
            seen[entry.utt_id] = lineno
            entries.append(entry)
    except ValidationError as e:
        raise ManifestError(f"{path}: invalid entry: {e}") from e

    manifest = Manifest(entries, report)
    if report.total_degraded:
        logger.warning(
            f"Loaded {len(manifest)} entries from {path.name}; "
            f"{report.total_degraded} demographic field(s) degraded"
        )
    else:
        logger.info(f"Loaded {len(manifest)} entries from {path.name}")
    return manifest


def load_scores(path: Path | str) -> dict[str, float]:
    """Read ``utt_id score`` pairs (whitespace- or comma-separated, ``#`` comments allowed)."""
    path = Path(path)
    try:
        lines = path.read_text(encoding="utf-8").splitlines()
    except FileNotFoundError as e:
        raise ScoreFileError(f"Score file not found: {path}") from e

    scores: dict[str, float] = {}
    first_line: dict[str, int] = {}
    for lineno, line in enumerate(lines, start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        fields = [f.strip() for f in stripped.split(",")] if "," in stripped else stripped.split()
        if len(fields) != 2:
            raise ScoreFileError(f"{path}:{lineno}: expected 2 columns, got {len(fields)}")
        utt_id, raw = fields
        if not scores and utt_id == "utt_id":
            continue
        try:
            value = float(raw)
        except ValueError as e:
            raise ScoreFileError(f"{path}:{lineno}: non-numeric score {raw!r} for {utt_id}") from e
        if not math.isfinite(value):
            raise ScoreFileError(f"{path}:{lineno}: non-finite score {raw!r} for {utt_id}")
        if utt_id in scores:
            raise ScoreFileError(
                f"{path}:{lineno}: duplicate id {utt_id!r} "
                f"(first seen on line {first_line[utt_id]})"
            )
        scores[utt_id] = value
        first_line[utt_id] = lineno
    logger.info(f"Loaded {len(scores)} score(s) from {path.name}")
    return scores


def join(
    manifest: Manifest | Iterable[ManifestEntry],
    scores: Mapping[str, float],
    orientation: Orientation | str = Orientation.HIGHER_SYNTHETIC,
) -> list[ScoreRecord]:
    """Attach scores to manifest entries, flipping sign for higher-is-bona-fide detectors."""
    sign = -1.0 if Orientation(orientation) is Orientation.HIGHER_BONAFIDE else 1.0
    entries = list(manifest)
    missing = [e.utt_id for e in entries if e.utt_id not in scores]
    if missing:
        raise MissingScoresError(missing)
    return [
        ScoreRecord(
            utt_id=e.utt_id,
            score=sign * scores[e.utt_id],
            label=e.label,
            gender=e.gender,
            age_group=e.age_group,
            accent=e.accent,
            fluency=e.fluency,
            validated=e.validated,
        )
        for e in entries
    ]


def write_records_csv(records: Iterable[ScoreRecord], path: Path | str) -> Path:
    """Write records in the native CSV layout with a score column."""
    rows = [
        {
            **{c: r.attribute(c) for c in NATIVE_COLUMNS},
            "validated": str(r.validated).lower(),
            "score": repr(r.score),
        }
        for r in records
    ]
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    pd.DataFrame(rows, columns=[*NATIVE_COLUMNS, "validated", "score"]).to_csv(path, index=False)
    return path


def load_records(path: Path | str) -> list[ScoreRecord]:
    """Read a native CSV that carries a score column (as written by ``write_records_csv``)."""
    path = Path(path)
    manifest = load_manifest(path, ManifestFormat.NATIVE_CSV)
    df = _read_table(path, ",")
    _require(df, ("score",), path)
    scores: dict[str, float] = {}
    for lineno, (utt_id, raw) in enumerate(zip(df["utt_id"], df["score"], strict=True), start=2):
        try:
            value = float(raw)
        except ValueError as e:
            raise ScoreFileError(f"{path}:{lineno}: non-numeric score {raw!r} for {utt_id}") from e
        if not math.isfinite(value):
            raise ScoreFileError(f"{path}:{lineno}: non-finite score {raw!r} for {utt_id}")
        scores[utt_id.strip()] = value
    return join(manifest, scores)
