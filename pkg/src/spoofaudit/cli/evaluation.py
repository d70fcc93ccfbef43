"""Calibration, detector evaluation and bias study commands."""

import json
import tomllib
from pathlib import Path
from typing import Annotated

import typer
from pydantic import ValidationError
from rich.table import Table

from spoofaudit.cli._helpers import console, handle_errors, log_config
from spoofaudit.errors import DataError, UsageError
from spoofaudit.models.demographics import Fluency, Label, Orientation
from spoofaudit.models.metrics import ScoreSet
from spoofaudit.schemas.metrics import ThresholdSet
from spoofaudit.schemas.study import STUTTERING_POOL_SIZE, StudySpec
from spoofaudit.services.harness import check_stuttering_pool, condition_study, run_study
from spoofaudit.services.harness import write_study_result as save_study
from spoofaudit.services.metrics import calibrate as calibrate_thresholds
from spoofaudit.services.metrics import detection_report
from spoofaudit.services.score_io import (
    ManifestFormat,
    join,
    load_manifest,
    load_records,
    load_scores,
)
from spoofaudit.utils.provenance import build_provenance

app = typer.Typer(help="Calibration and bias study commands.")


def load_thresholds(path: Path) -> ThresholdSet:
    try:
        return ThresholdSet.model_validate_json(path.read_text())
    except FileNotFoundError as e:
        raise DataError(f"Threshold file not found: {path}") from e
    except ValidationError as e:
        raise DataError(f"Invalid threshold file {path}: {e}") from e


def load_study_spec(
    spec: Path | None, preset: str | None, seed: int | None, repeats: int | None
) -> StudySpec:
    if (spec is None) == (preset is None):
        raise UsageError("give exactly one of --spec or --preset")
    try:
        if spec is not None:
            study = StudySpec.from_toml(spec)
            if repeats is not None:
                study = StudySpec.model_validate({**study.model_dump(), "repeats": repeats})
        else:
            study = StudySpec.preset(preset, repeats=repeats)
    except FileNotFoundError as e:
        raise UsageError(f"Study file not found: {spec}") from e
    except (ValidationError, ValueError, tomllib.TOMLDecodeError) as e:
        raise UsageError(f"Invalid study specification: {e}") from e
    if seed is not None:
        study = study.model_copy(update={"base_seed": seed})
    return study


@app.command("calibrate")
@handle_errors
def calibrate(
    ref: Annotated[Path, typer.Option("--ref", help="Scored reference records (native CSV)")],
    out: Annotated[Path, typer.Option("--out", "-o", help="Threshold file to write")] = Path(
        "thresholds.json"
    ),
    fpr_target: Annotated[
        float, typer.Option("--fpr-target", min=0.0, max=1.0, help="FPR target (fraction)")
    ] = 0.08,
    fnr_target: Annotated[
        float, typer.Option("--fnr-target", min=0.0, max=1.0, help="FNR target (fraction)")
    ] = 0.08,
    reference_id: Annotated[
        str | None, typer.Option("--reference-id", help="Recorded name [default: file stem]")
    ] = None,
):
    """Derive the EER, FPR-target and FNR-target thresholds from a reference set."""
    reference_id = reference_id or ref.stem
    log_config(
        "calibrate",
        {"ref": ref, "fpr_target": fpr_target, "fnr_target": fnr_target, "id": reference_id},
    )
    records = load_records(ref)
    reference = ScoreSet.from_lists(
        [r.score for r in records if r.label is Label.BONAFIDE],
        [r.score for r in records if r.label is Label.SPOOF],
    )
    thresholds = calibrate_thresholds(reference, fpr_target, fnr_target, reference_id)
    thresholds = thresholds.model_copy(
        update={
            "provenance": build_provenance(
                "calibrate",
                {
                    "reference_id": reference_id,
                    "fpr_target": fpr_target,
                    "fnr_target": fnr_target,
                    "n_bona": reference.n_bona,
                    "n_spoof": reference.n_spoof,
                },
            )
        }
    )
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(thresholds.model_dump_json(indent=2) + "\n")

    table = Table(title=f"Thresholds on {reference_id}")
    table.add_column("Operating point", style="cyan")
    table.add_column("Threshold", justify="right")
    table.add_row("EER (FPR1)", f"{thresholds.t_eer:.6g}")
    table.add_row(f"FPR {fpr_target:.2%} (FPR2)", f"{thresholds.t_fpr:.6g}")
    table.add_row(f"FNR {fnr_target:.2%} (FPR3)", f"{thresholds.t_fnr:.6g}")
    console.print(table)
    console.print(
        f"[green]✓[/green] Reference EER {thresholds.reference_eer:.2%}; wrote {out}"
    )


@app.command("evaluate")
@handle_errors
def evaluate(
    scores: Annotated[Path, typer.Option("--scores", help="Score file (utt_id score)")],
    protocol: Annotated[
        list[Path], typer.Option("--protocol", "-p", help="ASVspoof protocol (repeatable)")
    ],
    orientation: Annotated[
        Orientation, typer.Option("--orientation", help="Direction of the scores")
    ] = Orientation.HIGHER_SYNTHETIC,
    out: Annotated[
        Path | None, typer.Option("--out", "-o", help="Write the reports as JSON")
    ] = None,
):
    """Report pooled EER per protocol partition (e.g. D_dev and D_eval)."""
    log_config("evaluate", {"scores": scores, "protocols": protocol, "orientation": orientation})
    raw = load_scores(scores)
    reports = []
    for path in protocol:
        manifest = load_manifest(path, ManifestFormat.ASVSPOOF_PROTOCOL)
        records = join(manifest, raw, orientation)
        reports.append(
            detection_report(
                ScoreSet.from_lists(
                    [r.score for r in records if r.label is Label.BONAFIDE],
                    [r.score for r in records if r.label is Label.SPOOF],
                ),
                partition=path.stem,
            )
        )

    table = Table(title="Detector performance")
    table.add_column("Partition", style="cyan")
    table.add_column("Bona fide", justify="right")
    table.add_column("Spoof", justify="right")
    table.add_column("EER (%)", justify="right")
    table.add_column("Threshold", justify="right")
    for r in reports:
        table.add_row(
            r.partition, str(r.n_bona), str(r.n_spoof), f"{r.eer:.2%}", f"{r.threshold:.6g}"
        )
    console.print(table)

    if out is not None:
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(
            json.dumps([r.model_dump(mode="json") for r in reports], indent=2) + "\n"
        )
        console.print(f"[green]✓[/green] Wrote {out}")


@app.command("study")
@handle_errors
def study(
    records: Annotated[Path, typer.Option("--records", "-r", help="Scored records (native CSV)")],
    thresholds: Annotated[Path, typer.Option("--thresholds", "-t", help="Threshold file")],
    out: Annotated[Path, typer.Option("--out", "-o", help="Study result to write (JSON + CSV)")],
    spec: Annotated[Path | None, typer.Option("--spec", "-s", help="Study TOML file")] = None,
    preset: Annotated[
        str | None, typer.Option("--preset", help="Built-in study (gender, age-male, ...)")
    ] = None,
    seed: Annotated[
        int | None, typer.Option("--seed", min=0, help="Base seed [default: from the study]")
    ] = None,
    repeats: Annotated[
        int | None, typer.Option("--repeats", min=1, help="Repeats [default: from the study]")
    ] = None,
    detector_id: Annotated[
        str | None, typer.Option("--detector-id", help="Detector name [default: records stem]")
    ] = None,
    jobs: Annotated[int, typer.Option("--jobs", "-j", min=1, help="Parallel workers")] = 1,
):
    """Run a repeated-sampling bias study and write its result."""
    study_spec = load_study_spec(spec, preset, seed, repeats)
    threshold_set = load_thresholds(thresholds)
    detector_id = detector_id or records.stem
    log_config(
        "study",
        {
            "spec": study_spec.model_dump(mode="json"),
            "detector_id": detector_id,
            "thresholds": threshold_set.model_dump(mode="json", exclude={"provenance"}),
            "jobs": jobs,
        },
    )
    result = run_study(
        load_records(records), study_spec, threshold_set, detector_id=detector_id, jobs=jobs
    )
    json_path, csv_path = save_study(result, out)
    console.print(
        f"[green]✓[/green] {len(result.sets)} set(s) evaluated; wrote {json_path} and {csv_path}"
    )


@app.command("fluency")
@handle_errors
def fluency(
    records: Annotated[Path, typer.Option("--records", "-r", help="Scored records (native CSV)")],
    thresholds: Annotated[Path, typer.Option("--thresholds", "-t", help="Threshold file")],
    out_dir: Annotated[Path, typer.Option("--out-dir", "-o", help="Directory for results")],
    condition: Annotated[
        list[Fluency] | None,
        typer.Option("--condition", help="fluent and/or stuttering [default: both]"),
    ] = None,
    expected_pool: Annotated[
        int, typer.Option("--expected-pool", help="Expected stuttering pool size")
    ] = STUTTERING_POOL_SIZE,
    detector_id: Annotated[
        str | None, typer.Option("--detector-id", help="Detector name [default: records stem]")
    ] = None,
):
    """Absolute metrics with fluent or stuttering speech as the bona fide class."""
    conditions = condition or [Fluency.FLUENT, Fluency.STUTTERING]
    if Fluency.UNKNOWN in conditions:
        raise UsageError("--condition must be fluent or stuttering")
    threshold_set = load_thresholds(thresholds)
    detector_id = detector_id or records.stem
    log_config(
        "fluency",
        {
            "conditions": [c.value for c in conditions],
            "detector_id": detector_id,
            "expected_pool": expected_pool,
            "thresholds": threshold_set.model_dump(mode="json", exclude={"provenance"}),
        },
    )
    loaded = load_records(records)
    out_dir.mkdir(parents=True, exist_ok=True)
    for c in conditions:
        result = condition_study(loaded, threshold_set, c, detector_id)
        if c is Fluency.STUTTERING:
            check_stuttering_pool(result.n_bona, expected_pool)
        path = out_dir / f"{detector_id}.{c.value}.json"
        path.write_text(result.model_dump_json(indent=2) + "\n")
        m = result.metrics
        console.print(
            f"[green]✓[/green] {c.value}: FPR1 {m.fpr1:.2%}, FPR2 {m.fpr2:.2%}, "
            f"FPR3 {m.fpr3:.2%}, EER {m.eer:.2%} ({path})"
        )

