"""Report rendering command."""

import json
from pathlib import Path
from typing import Annotated

import typer

from spoofaudit.cli._helpers import console, handle_errors, log_config
from spoofaudit.errors import DataError, UsageError
from spoofaudit.services.harness import load_condition_result, load_study_result
from spoofaudit.services.report import (
    fluency_csv,
    fluency_inputs,
    render_bias_table,
    render_condition_table,
    render_fluency_summary,
    summarize_fluency,
)

STUDY_FORMAT = "spoofaudit.study/1"
CONDITION_FORMAT = "spoofaudit.condition/1"

app = typer.Typer(help="Report rendering commands.")


def _artifact_format(path: Path) -> str:
    try:
        return json.loads(path.read_text()).get("format", "")
    except FileNotFoundError as e:
        raise DataError(f"Result file not found: {path}") from e
    except (json.JSONDecodeError, AttributeError) as e:
        raise DataError(f"{path} is not a result file: {e}") from e


@app.command("report")
@handle_errors
def report(
    results: Annotated[list[Path], typer.Argument(help="Study or fluency result files")],
    fmt: Annotated[str, typer.Option("--format", "-f", help="markdown or csv")] = "markdown",
    mode: Annotated[
        str, typer.Option("--mode", help="delta or absolute (study results only)")
    ] = "delta",
    out: Annotated[
        Path | None, typer.Option("--out", "-o", help="Write here instead of stdout")
    ] = None,
):
    """Render bias tables from study results, or fluency summaries from fluency results."""
    if fmt not in ("markdown", "csv"):
        raise UsageError(f"--format must be markdown or csv, got {fmt!r}")
    if mode not in ("delta", "absolute"):
        raise UsageError(f"--mode must be delta or absolute, got {mode!r}")
    log_config("report", {"results": results, "format": fmt, "mode": mode})

    formats = {_artifact_format(p) for p in results}
    if formats == {STUDY_FORMAT}:
        text = render_bias_table([load_study_result(p) for p in results], fmt, mode)
    elif formats == {CONDITION_FORMAT}:
        per_detector = fluency_inputs(load_condition_result(p) for p in results)
        rows = summarize_fluency(per_detector)
        if fmt == "csv":
            text = fluency_csv(rows)
        else:
            text = render_condition_table(per_detector) + "\n" + render_fluency_summary(rows)
    else:
        raise UsageError(
            f"cannot render {sorted(formats)} together; pass study results or fluency results"
        )

    if out is None:
        typer.echo(text, nl=False)
    else:
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(text)
        console.print(f"[green]✓[/green] Wrote {out}")
