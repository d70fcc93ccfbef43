"""Feature extraction and toy corpus commands."""

from pathlib import Path
from typing import Annotated, Literal

import typer

from spoofaudit.cli._helpers import console, handle_errors, log_config, read_manifests
from spoofaudit.config import get_settings
from spoofaudit.errors import UsageError
from spoofaudit.models.features import FeatureKind
from spoofaudit.schemas.features import FeatureConfig
from spoofaudit.services.cache import FeatureCache, extract_to_cache
from spoofaudit.services.score_io import ManifestFormat
from spoofaudit.services.toy import write_toy_corpus

app = typer.Typer(help="Feature extraction commands.")


def feature_config(kind: FeatureKind, preset: Literal["M03", "M01"] | None) -> FeatureConfig:
    if preset is not None and kind is not FeatureKind.LFCC:
        raise UsageError(f"--preset applies to LFCC only, not {kind.value}")
    if kind is FeatureKind.LFCC:
        return FeatureConfig.lfcc(preset or "M03")
    return FeatureConfig.default_for(kind)


@app.command("extract")
@handle_errors
def extract(
    manifest: Annotated[
        list[Path], typer.Option("--manifest", "-m", help="Manifest file (repeatable)")
    ],
    fmt: Annotated[
        list[ManifestFormat] | None,
        typer.Option("--format", "-f", help="Manifest format (one, or one per --manifest)"),
    ] = None,
    audio_dir: Annotated[
        Path | None,
        typer.Option("--audio-dir", "-a", help="Audio base directory [default: manifest dir]"),
    ] = None,
    kind: Annotated[
        FeatureKind, typer.Option("--kind", "-k", help="Feature kind")
    ] = FeatureKind.LFCC,
    preset: Annotated[
        str | None, typer.Option("--preset", help="LFCC configuration: M03 (default) or M01")
    ] = None,
    cache_dir: Annotated[
        Path | None, typer.Option("--cache-dir", "-c", help="Feature cache [default: settings]")
    ] = None,
    jobs: Annotated[int, typer.Option("--jobs", "-j", min=1, help="Parallel workers")] = 1,
    overwrite: Annotated[bool, typer.Option("--overwrite", help="Recompute cached files")] = False,
):
    """Extract features for every manifest entry into the feature cache."""
    if preset not in (None, "M03", "M01"):
        raise UsageError(f"unknown LFCC preset {preset!r}; expected M03 or M01")
    cfg = feature_config(kind, preset)
    cache = FeatureCache(cache_dir or get_settings().resolved_cache_dir)
    base = audio_dir or manifest[0].parent
    log_config(
        "extract",
        {"feature_config": cfg.model_dump(mode="json"), "cache_dir": cache.root, "jobs": jobs},
    )

    entries = read_manifests(manifest, fmt or [ManifestFormat.NATIVE_CSV])
    written = extract_to_cache(entries, base, cfg, cache, jobs=jobs, overwrite=overwrite)
    console.print(
        f"[green]✓[/green] {written} feature file(s) written, "
        f"{len(entries) - written} already cached ({cache.root})"
    )


@app.command("toy")
@handle_errors
def toy(
    out_dir: Annotated[Path, typer.Option("--out-dir", "-o", help="Directory to write into")],
    n: Annotated[int, typer.Option("--n", min=1, help="Utterances per class")] = 200,
    seed: Annotated[int, typer.Option("--seed", help="Random seed")] = 0,
):
    """Generate a toy corpus of harmonic tones (bona fide) and filtered noise (spoof)."""
    log_config("toy", {"out_dir": out_dir, "n": n, "seed": seed})
    manifest = write_toy_corpus(out_dir, n, seed)
    console.print(f"[green]✓[/green] Wrote {2 * n} utterances, manifest {manifest}")
