import logging
from pathlib import Path
from typing import Annotated, Optional

import typer

from app.config import Config
from app.error import VerifierError
from app.verify.fixtures import fixture_names, fixture_text
from app.verify.schema import CheckReport
from app.verify.services import VerifyService

logger = logging.getLogger(__name__)

cli = typer.Typer(help="Verify Kenmotsu structures and *-Ricci solitons on a chart.", add_completion=False)
verify_services = VerifyService()

PointsOption = Annotated[int, typer.Option("--points", min=0, help="number of sample points")]
SeedOption = Annotated[int, typer.Option("--seed", help="sampling seed")]
TolOption = Annotated[float, typer.Option("--tol", min=0.0, help="tolerance of exact-path checks")]
OrderOption = Annotated[int, typer.Option("--order", min=2, help="jet truncation order")]
ReportOption = Annotated[Optional[Path], typer.Option("--report", help="write the JSON report here")]
ChecksOption = Annotated[Optional[str], typer.Option("--checks", help="comma-separated check names")]


@cli.callback()
def main():
    logging.basicConfig(level=Config.LOG_LEVEL)


def _finish(report: CheckReport, report_path: Optional[Path]) -> None:
    for line in verify_services.summary_lines(report):
        typer.echo(line)
    if report_path is not None:
        verify_services.emit_report(report, report_path)
    raise typer.Exit(report.exit_code)


def _check_list(checks: Optional[str]) -> Optional[list[str]]:
    if checks is None:
        return None
    return [name.strip() for name in checks.split(",") if name.strip()]


def _execute(text: str, points, seed, tol, order, report, checks) -> None:
    try:
        result = verify_services.run(
            text, points=points, seed=seed, tol=tol, order=order, checks=_check_list(checks)
        )
        _finish(result, report)
    except VerifierError as exc:
        logger.error(f"{type(exc).__name__}: {exc}")
        typer.echo(f"error: {exc}", err=True)
        raise typer.Exit(1)


@cli.command()
def run(
    config: Annotated[Path, typer.Argument(help="manifold config file")],
    points: PointsOption = Config.DEFAULT_POINTS,
    seed: SeedOption = Config.DEFAULT_SEED,
    tol: TolOption = Config.DEFAULT_TOL,
    order: OrderOption = Config.DEFAULT_ORDER,
    report: ReportOption = None,
    checks: ChecksOption = None,
):
    """Run the check suite on a manifold config file."""
    try:
        text = config.read_text(encoding="utf-8")
    except OSError as exc:
        typer.echo(f"error: cannot read {config}: {exc.strerror}", err=True)
        raise typer.Exit(1)
    _execute(text, points, seed, tol, order, report, checks)


@cli.command()
def examples(
    name: Annotated[str, typer.Argument(help="built-in example name, or 'list'")],
    points: PointsOption = Config.DEFAULT_POINTS,
    seed: SeedOption = Config.DEFAULT_SEED,
    tol: TolOption = Config.DEFAULT_TOL,
    order: OrderOption = Config.DEFAULT_ORDER,
    report: ReportOption = None,
    checks: ChecksOption = None,
):
    """Run a built-in example, or list them."""
    if name == "list":
        for fixture in fixture_names():
            typer.echo(fixture)
        return
    try:
        text = fixture_text(name)
    except VerifierError as exc:
        typer.echo(f"error: {exc}", err=True)
        raise typer.Exit(1)
    _execute(text, points, seed, tol, order, report, checks)


if __name__ == "__main__":
    cli()
