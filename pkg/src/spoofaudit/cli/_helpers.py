"""Shared helpers for CLI commands."""

import json
import logging
from collections.abc import Callable, Iterator
from contextlib import contextmanager
from functools import wraps
from pathlib import Path
from typing import Any

import click
import typer
from pydantic import ValidationError
from rich.console import Console
from rich.logging import RichHandler
from rich.markup import escape
from rich.table import Table
from typer.core import TyperGroup

from spoofaudit.config import get_settings
from spoofaudit.errors import SpoofAuditError, UsageError
from spoofaudit.schemas.records import LoadReport
from spoofaudit.services.score_io import Manifest, ManifestFormat, load_manifest

console = Console()
err_console = Console(stderr=True)

logger = logging.getLogger("spoofaudit.cli")


def setup_logging(verbose: bool = False) -> None:
    level = "DEBUG" if verbose else get_settings().log_level
    logging.basicConfig(
        level=level,
        format="%(message)s",
        handlers=[RichHandler(console=err_console, show_path=False, markup=False)],
        force=True,
    )


@contextmanager
def usage_exit_code() -> Iterator[None]:
    """Argument errors raised by click exit with the usage status."""
    try:
        yield
    except click.UsageError as e:
        e.exit_code = UsageError.exit_code
        raise


class AuditGroup(TyperGroup):
    """Root command group. Missing or invalid options and unknown commands exit 1."""

    def make_context(self, *args, **kwargs) -> click.Context:
        with usage_exit_code():
            return super().make_context(*args, **kwargs)

    def invoke(self, ctx: click.Context):
        with usage_exit_code():
            return super().invoke(ctx)


def handle_errors[T](func: Callable[..., T]) -> Callable[..., T]:
    """Decorator mapping library exceptions to exit codes.

    Usage errors exit 1, data errors 2, invariant violations and anything unexpected 3.
    """

    @wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except (click.exceptions.Exit, click.ClickException, click.exceptions.Abort):
            raise
        except SpoofAuditError as e:
            err_console.print(f"[red]Error:[/red] {escape(str(e))}", highlight=False)
            raise typer.Exit(code=e.exit_code) from None
        except ValidationError as e:
            err_console.print(
                f"[red]Error:[/red] invalid configuration: {escape(str(e))}", highlight=False
            )
            raise typer.Exit(code=1) from None
        except Exception as e:
            logger.exception("Unexpected failure")
            err_console.print(
                f"[red]Error:[/red] internal error: {escape(str(e))}", highlight=False
            )
            raise typer.Exit(code=3) from None

    return wrapper


def log_config(command: str, config: dict[str, Any]) -> None:
    """Log the resolved configuration of a command as one line."""
    logger.info(f"{command}: {json.dumps(config, sort_keys=True, default=str)}")


def show_load_report(report: LoadReport) -> None:
    if not report.total_degraded:
        return
    table = Table(title=f"Degraded fields in {report.source}")
    table.add_column("Field", style="cyan")
    table.add_column("Reason")
    table.add_column("Count", justify="right")
    for key, count in sorted(report.degraded.items()):
        field, _, reason = key.partition(":")
        table.add_row(field, reason, str(count))
    err_console.print(table)
    logger.warning(f"{report.total_degraded} degraded field(s) in {report.source}")


def read_manifests(paths: list[Path], formats: list[ManifestFormat]) -> Manifest:
    """Load one or more manifests; a single ``--format`` applies to all of them."""
    if not paths:
        raise UsageError("at least one --manifest is required")
    if len(formats) == 1:
        formats = formats * len(paths)
    if len(formats) != len(paths):
        raise UsageError(f"got {len(paths)} manifest(s) but {len(formats)} --format value(s)")
    manifests = []
    for path, fmt in zip(paths, formats, strict=True):
        manifest = load_manifest(path, fmt)
        show_load_report(manifest.report)
        manifests.append(manifest)
    return manifests[0] if len(manifests) == 1 else Manifest.merge(*manifests)
