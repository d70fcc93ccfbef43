"""spoofaudit CLI - fairness audits for synthetic speech detectors."""

from typing import Annotated

import typer

from spoofaudit.cli._helpers import AuditGroup, setup_logging
from spoofaudit.cli.detector import app as detector_app
from spoofaudit.cli.evaluation import app as evaluation_app
from spoofaudit.cli.features import app as features_app
from spoofaudit.cli.reports import app as reports_app

app = typer.Typer(
    name="spoofaudit",
    help="Fairness audits for synthetic speech detectors.",
    no_args_is_help=True,
    cls=AuditGroup,
)

# Unnamed sub-apps add their commands at the top level
app.add_typer(features_app)
app.add_typer(detector_app)
app.add_typer(evaluation_app)
app.add_typer(reports_app)


@app.callback()
def _root(
    verbose: Annotated[bool, typer.Option("--verbose", "-v", help="Debug logging")] = False,
):
    setup_logging(verbose)


def main():
    """Entry point for the CLI."""
    app()


if __name__ == "__main__":
    main()
