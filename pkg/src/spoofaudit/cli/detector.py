"""Detector training and scoring commands."""

from pathlib import Path
from typing import Annotated

import typer

from spoofaudit.cli._helpers import console, handle_errors, log_config, read_manifests
from spoofaudit.config import get_settings
from spoofaudit.errors import UsageError
from spoofaudit.models.demographics import Label, Orientation
from spoofaudit.schemas.gmm import GmmConfig
from spoofaudit.services.cache import FeatureCache
from spoofaudit.services.gmm import load_detector, save_detector, score_cached, train_detector
from spoofaudit.services.score_io import ManifestFormat, join, load_scores, write_records_csv
from spoofaudit.utils.provenance import build_provenance, ids_digest, write_sidecar

app = typer.Typer(help="Detector training and scoring commands.")


@app.command("train-gmm")
@handle_errors
def train_gmm(
    manifest: Annotated[
        list[Path], typer.Option("--manifest", "-m", help="Training manifest (repeatable)")
    ],
    out: Annotated[Path, typer.Option("--out", "-o", help="Model file to write (JSON)")],
    fmt: Annotated[
        list[ManifestFormat] | None,
        typer.Option("--format", "-f", help="Manifest format (one, or one per --manifest)"),
    ] = None,
    cache_dir: Annotated[
        Path | None, typer.Option("--cache-dir", "-c", help="Feature cache [default: settings]")
    ] = None,
    components: Annotated[
        int, typer.Option("--components", "-n", min=1, help="Gaussians per class")
    ] = 512,
    max_iter: Annotated[int, typer.Option("--max-iter", min=1, help="EM iterations")] = 100,
    seed: Annotated[int, typer.Option("--seed", min=0, help="Training seed")] = 0,
    dataset_id: Annotated[
        str | None, typer.Option("--dataset-id", help="Recorded in the model [default: manifest]")
    ] = None,
):
    """Train a bona fide / spoof GMM pair on cached features."""
    cache = FeatureCache(cache_dir or get_settings().resolved_cache_dir)
    cfg = cache.read_config()
    gmm_config = GmmConfig(n_components=components, max_iter=max_iter)
    dataset_id = dataset_id or manifest[0].stem
    log_config(
        "train-gmm",
        {
            "seed": seed,
            "dataset_id": dataset_id,
            "gmm_config": gmm_config.model_dump(mode="json"),
            "feature_config": cfg.model_dump(mode="json"),
        },
    )

    entries = read_manifests(manifest, fmt or [ManifestFormat.NATIVE_CSV])
    bona = [cache.read(e.utt_id) for e in entries.select(label=Label.BONAFIDE)]
    spoof = [cache.read(e.utt_id) for e in entries.select(label=Label.SPOOF)]
    detector = train_detector(bona, spoof, cfg, seed, gmm_config, dataset_id)
    save_detector(detector, out, gmm_config)
    console.print(
        f"[green]✓[/green] Trained {components}-component detector on {len(bona)} bona fide / "
        f"{len(spoof)} spoof utterances: {out}"
    )


@app.command("score")
@handle_errors
def score(
    manifest: Annotated[
        list[Path], typer.Option("--manifest", "-m", help="Manifest to score (repeatable)")
    ],
    out: Annotated[Path, typer.Option("--out", "-o", help="Scored native CSV to write")],
    fmt: Annotated[
        list[ManifestFormat] | None,
        typer.Option("--format", "-f", help="Manifest format (one, or one per --manifest)"),
    ] = None,
    model: Annotated[
        Path | None, typer.Option("--model", help="GMM detector file (scores cached features)")
    ] = None,
    scores: Annotated[
        Path | None, typer.Option("--scores", help="External score file (utt_id score)")
    ] = None,
    orientation: Annotated[
        Orientation,
        typer.Option("--orientation", help="Direction of external scores"),
    ] = Orientation.HIGHER_SYNTHETIC,
    cache_dir: Annotated[
        Path | None, typer.Option("--cache-dir", "-c", help="Feature cache [default: settings]")
    ] = None,
    jobs: Annotated[int, typer.Option("--jobs", "-j", min=1, help="Parallel workers")] = 1,
):
    """Attach detector scores to a manifest and write the scored native CSV."""
    if (model is None) == (scores is None):
        raise UsageError("give exactly one of --model or --scores")

    entries = read_manifests(manifest, fmt or [ManifestFormat.NATIVE_CSV])
    if model is not None:
        cache = FeatureCache(cache_dir or get_settings().resolved_cache_dir)
        config = {"model": model, "cache_dir": cache.root, "jobs": jobs}
        log_config("score", config)
        detector = load_detector(model)
        raw = score_cached(detector, entries.ids, cache, jobs=jobs)
        orientation = Orientation.HIGHER_SYNTHETIC
    else:
        config = {"scores": scores, "orientation": orientation.value}
        log_config("score", config)
        raw = load_scores(scores)

    records = join(entries, raw, orientation)
    write_records_csv(records, out)
    write_sidecar(
        out,
        build_provenance(
            "score",
            {
                **{k: str(v) for k, v in config.items() if k != "jobs"},
                "manifests": [str(p) for p in manifest],
                "ids_digest": ids_digest(entries.ids),
            },
        ),
    )
    console.print(f"[green]✓[/green] Wrote {len(records)} scored record(s) to {out}")
