"""Main CLI entry point for calm-probe."""

import logging
from pathlib import Path

import typer
from rich.console import Console
from rich.logging import RichHandler

from calm_probe import __version__
from calm_probe.core.config import DEFAULT_SEED, SEED_ENV_VAR
from calm_probe.core.exceptions import CalmProbeError, ConfigError
from calm_probe.model.builtins import BUILTIN_NAMES

app = typer.Typer(
    name="calm-probe",
    help="Certify or falsify partial calmness of bilevel programs with a linear lower level",
    no_args_is_help=True,
    add_completion=False,
)

console = Console()
err_console = Console(stderr=True)

# Typer option constants (avoid function calls directly in default parameters per Ruff B008)
MODEL_OPT = typer.Option(None, "--model", "-m", help="Model file to load")
BUILTIN_OPT = typer.Option(
    None, "--builtin", "-b", help=f"Bundled model: {', '.join(BUILTIN_NAMES)}"
)
SEED_OPT = typer.Option(DEFAULT_SEED, "--seed", envvar=SEED_ENV_VAR, help="Random seed")
RADII_OPT = typer.Option(None, "--radii", help="Comma-separated ball radii, e.g. 0.5,0.1,0.01")
KAPPA_OPT = typer.Option(None, "--kappa-grid", help="Comma-separated penalties for path traces")
SAMPLES_OPT = typer.Option(None, "--samples", "-n", help="Samples per radius")
OUT_OPT = typer.Option(None, "--out", "-o", help="Write the JSON report to this file")
TOL_OPT = typer.Option(None, "--tol", help="Tolerance override key=val (repeatable)")
TIMING_OPT = typer.Option(False, "--timing", help="Store wall-clock time in the report")
VERBOSE_OPT = typer.Option(False, "--verbose", "-v", help="Debug logging and detailed tables")
CENTER_X_OPT = typer.Option(None, "--center-x", help="Center x, comma-separated")
CENTER_Y_OPT = typer.Option(None, "--center-y", help="Center y, comma-separated")
GRID_OPT = typer.Option(
    None, "--grid", "-g", help="lo:hi:count per x component (repeatable; one spec is reused)"
)
REPORT_ARG = typer.Argument(..., help="Report file written with --out")
CSV_OPT = typer.Option(None, "--csv", help="Also export the report tables as CSV into DIR")


def version_callback(value: bool) -> None:
    """Print version and exit."""
    if value:
        console.print(f"calm-probe version {__version__}")
        raise typer.Exit()


@app.callback()
def main(
    version: bool = typer.Option(
        False,
        "--version",
        "-V",
        callback=version_callback,
        is_eager=True,
        help="Show version and exit",
    ),
) -> None:
    """
    Calm-Probe: partial calmness diagnostics for bilevel programs.

    Evaluates the lower-level value function, certifies weak-sharp
    minima where the data allows it, and searches for diverging penalty
    parameters that refute partial calmness.
    """
    pass


def configure_logging(verbose: bool) -> None:
    """Route the calm_probe loggers through a RichHandler on stderr."""
    logger = logging.getLogger("calm_probe")
    for handler in list(logger.handlers):
        if isinstance(handler, RichHandler):
            logger.removeHandler(handler)
    logger.addHandler(RichHandler(console=err_console, show_time=False, show_path=False))
    logger.setLevel(logging.DEBUG if verbose else logging.WARNING)


def parse_floats(raw: str | None, what: str) -> list[float] | None:
    """Parse a comma-separated list of numbers."""
    if raw is None:
        return None
    try:
        values = [float(v) for v in raw.replace(" ", "").split(",") if v]
    except ValueError as e:
        raise ConfigError(f"Bad {what}: {raw!r}") from e
    if not values:
        raise ConfigError(f"Empty {what}")
    return values


def parse_tolerances(items: list[str] | None) -> dict[str, str]:
    """Parse repeated key=val tolerance overrides."""
    overrides: dict[str, str] = {}
    for item in items or []:
        key, sep, value = item.partition("=")
        if not sep or not key.strip():
            raise ConfigError(f"Bad tolerance override {item!r}, expected key=val")
        overrides[key.strip()] = value.strip()
    return overrides


def _run(
    command: str,
    model: Path | None,
    builtin: str | None,
    seed: int,
    radii: str | None,
    kappa_grid: str | None,
    samples: int | None,
    out: Path | None,
    tol: list[str] | None,
    timing: bool,
    verbose: bool,
    center_x: str | None = None,
    center_y: str | None = None,
    grid: list[str] | None = None,
    flags: dict[str, bool] | None = None,
) -> None:
    """Build the run config, dispatch, render and exit with the verdict's code."""
    from calm_probe.analysis.dispatcher import EXIT_ERROR, AnalysisDispatcher
    from calm_probe.cli.formatters.report import ReportRenderer
    from calm_probe.report import RunConfig

    configure_logging(verbose)
    try:
        config = RunConfig(
            command=command,
            model_path=None if model is None else str(model),
            builtin=builtin,
            seed=seed,
            tolerances=parse_tolerances(tol),
            radii=parse_floats(radii, "radii"),
            kappa_grid=parse_floats(kappa_grid, "kappa grid"),
            samples=samples,
            grid=list(grid or []),
            center_x=parse_floats(center_x, "center x"),
            center_y=parse_floats(center_y, "center y"),
            flags=flags or {},
            timing=timing,
        )
        report = AnalysisDispatcher(config).run()
        ReportRenderer(console).render(report.to_dict(), verbose=verbose)
        if out is not None:
            written = report.save(out)
            console.print(f"\n[dim]Report written to {written}[/dim]")
    except CalmProbeError as e:
        console.print(f"[red]Error: {e}[/red]")
        raise typer.Exit(EXIT_ERROR) from e

    if report.exit_code:
        raise typer.Exit(report.exit_code)


@app.command(name="phi-sweep")
def phi_sweep(
    model: Path | None = MODEL_OPT,
    builtin: str | None = BUILTIN_OPT,
    grid: list[str] | None = GRID_OPT,
    seed: int = SEED_OPT,
    out: Path | None = OUT_OPT,
    tol: list[str] | None = TOL_OPT,
    timing: bool = TIMING_OPT,
    verbose: bool = VERBOSE_OPT,
) -> None:
    """
    Tabulate the lower-level optimal value phi(x) over a grid.

    Examples:

        calm-probe phi-sweep --builtin example-4-2 --grid=-2:2:9

        calm-probe phi-sweep -b example-4-5 --grid=-1:1:3 --grid=0:0:1
    """
    _run(
        "phi-sweep", model, builtin, seed, None, None, None, out, tol, timing, verbose,
        grid=grid,
    )


@app.command()
def falsify(
    model: Path | None = MODEL_OPT,
    builtin: str | None = BUILTIN_OPT,
    seed: int = SEED_OPT,
    radii: str | None = RADII_OPT,
    kappa_grid: str | None = KAPPA_OPT,
    samples: int | None = SAMPLES_OPT,
    center_x: str | None = CENTER_X_OPT,
    center_y: str | None = CENTER_Y_OPT,
    out: Path | None = OUT_OPT,
    tol: list[str] | None = TOL_OPT,
    timing: bool = TIMING_OPT,
    verbose: bool = VERBOSE_OPT,
) -> None:
    """
    Test partial calmness at the model candidate.

    Verifies the candidate, sweeps the required penalty over shrinking
    balls and traces every witness path of the model. Exit code 2 means
    Falsified, 0 NotFalsified and 3 that the candidate was rejected.

    Examples:

        calm-probe falsify --builtin example-4-2

        calm-probe falsify -b example-4-3-center --samples 2500 --radii 0.5,0.1,0.05,0.01
    """
    _run(
        "falsify", model, builtin, seed, radii, kappa_grid, samples, out, tol, timing, verbose,
        center_x=center_x, center_y=center_y,
    )


@app.command()
def certify(
    model: Path | None = MODEL_OPT,
    builtin: str | None = BUILTIN_OPT,
    seed: int = SEED_OPT,
    radii: str | None = RADII_OPT,
    samples: int | None = SAMPLES_OPT,
    center_x: str | None = CENTER_X_OPT,
    center_y: str | None = CENTER_Y_OPT,
    uwsm: bool = typer.Option(True, "--uwsm/--no-uwsm", help="Weak-sharp modulus"),
    probes: bool = typer.Option(True, "--probes/--no-probes", help="LUWSMC and RRCQ probes"),
    rank: bool = typer.Option(True, "--rank/--no-rank", help="Constant rank check"),
    isc: bool = typer.Option(True, "--isc/--no-isc", help="Inner semicontinuity probe"),
    out: Path | None = OUT_OPT,
    tol: list[str] | None = TOL_OPT,
    timing: bool = TIMING_OPT,
    verbose: bool = VERBOSE_OPT,
) -> None:
    """
    Collect positive evidence for partial calmness.

    Fixed-coefficient models get a weak-sharp modulus certificate checked
    on samples; models with x-dependent coefficients get the modulus
    sweep instead. The probes, the rank check and the inner
    semicontinuity check run around the candidate.

    Examples:

        calm-probe certify --builtin fully-linear-random --seed 7

        calm-probe certify -b example-4-4 --no-probes
    """
    _run(
        "certify", model, builtin, seed, radii, None, samples, out, tol, timing, verbose,
        center_x=center_x, center_y=center_y,
        flags={"uwsm": uwsm, "probes": probes, "rank": rank, "isc": isc},
    )


@app.command()
def report(
    path: Path = REPORT_ARG,
    csv_dir: Path | None = CSV_OPT,
    verbose: bool = VERBOSE_OPT,
) -> None:
    """
    Render a stored report, optionally exporting its tables as CSV.

    Examples:

        calm-probe report falsify.json

        calm-probe report certify.json --csv tables/
    """
    from calm_probe.analysis.dispatcher import EXIT_ERROR
    from calm_probe.cli.formatters.report import ReportRenderer
    from calm_probe.report import Report

    configure_logging(verbose)
    try:
        stored = Report.load(path)
        ReportRenderer(console).render(stored.to_dict(), verbose=verbose)
        if csv_dir is not None:
            for written in stored.export_csv(csv_dir):
                console.print(f"[dim]Wrote {written}[/dim]")
    except CalmProbeError as e:
        console.print(f"[red]Error: {e}[/red]")
        raise typer.Exit(EXIT_ERROR) from e


if __name__ == "__main__":
    app()
