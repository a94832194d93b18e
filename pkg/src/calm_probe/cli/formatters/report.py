"""Whole-report rendering for calm-probe CLI."""

from typing import Any

from rich.console import Console
from rich.panel import Panel
from rich.table import Table

from calm_probe.cli.formatters.certificate import CertificateRenderer
from calm_probe.cli.formatters.verdict import VerdictRenderer, fmt


class ReportRenderer:
    """Renders a stored report dictionary: header, payload and messages."""

    def __init__(self, console: Console | None = None):
        """
        Initialize the report renderer.

        Args:
            console: Rich Console instance. If None, creates a new one.
        """
        self.console = console or Console()

    def render(self, report: dict[str, Any], verbose: bool = False) -> None:
        """
        Render any report produced by the dispatcher.

        Args:
            report: Report dictionary as returned by `Report.to_dict`.
            verbose: Show the detailed tables of each renderer.
        """
        self.render_header(report)
        for warning in report.get("warnings", []):
            self.console.print(f"[yellow]⚠️  {warning}[/yellow]")
        for notice in report.get("notices", []):
            self.console.print(f"[dim]• {notice}[/dim]")
        self.console.print()

        command = report["command"]
        result = report["result"]
        if command == "phi-sweep":
            self.render_phi(report["tables"].get("phi", []), result)
        elif command == "falsify":
            VerdictRenderer(self.console).render(result, verbose=verbose)
        elif command == "certify":
            CertificateRenderer(self.console).render(result, verbose=verbose)
        else:
            self.console.print(f"[red]Unknown report command: {command}[/red]")

    def render_header(self, report: dict[str, Any]) -> None:
        model = report["model"]
        config = report["config"]
        table = Table(show_header=False, box=None)
        table.add_column("Label", style="bold")
        table.add_column("Value")
        table.add_row("Model", model.get("name") or config.get("model_path") or "-")
        table.add_row("Dimensions", f"n = {model['n']}, m = {model['m']}, q = {model['q']}")
        table.add_row("Form", model["form"])
        table.add_row("F(x, y)", model["F"])
        table.add_row("c(x)", ", ".join(model["c"]))
        table.add_row("Seed", str(config["seed"]))
        if config.get("tolerances"):
            table.add_row(
                "Tolerances", ", ".join(f"{k}={v}" for k, v in sorted(config["tolerances"].items()))
            )
        if report.get("wall_clock") is not None:
            table.add_row("Wall clock", f"{report['wall_clock']:.3f}s")
        self.console.print(
            Panel(table, title=f"[bold]calm-probe {report['command']}[/bold]", border_style="blue")
        )

    def render_phi(self, rows: list[dict[str, Any]], result: dict[str, Any]) -> None:
        table = Table(title="Lower-level optimal value φ(x)")
        x_columns = [k for k in (rows[0] if rows else {}) if k.startswith("x")]
        for column in x_columns:
            table.add_column(column, justify="right")
        table.add_column("status")
        table.add_column("φ(x)", justify="right", style="bold")
        for row in rows:
            status = row["status"]
            style = "green" if status == "finite" else "yellow"
            table.add_row(
                *(fmt(row[c]) for c in x_columns),
                f"[{style}]{status}[/{style}]",
                fmt(row["value"], 12),
            )
        self.console.print(table)
        self.console.print(f"[dim]{result['finite']} of {result['points']} values finite[/dim]")
