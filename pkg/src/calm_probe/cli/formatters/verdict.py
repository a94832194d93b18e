"""Falsifier verdict rendering for calm-probe CLI."""

from typing import Any

from rich.console import Console
from rich.panel import Panel
from rich.table import Table
from rich.text import Text


def fmt(value: Any, digits: int = 6) -> str:
    """Format a report number; non-finite values are stored as strings."""
    if value is None:
        return "-"
    if isinstance(value, bool):
        return "yes" if value else "no"
    if isinstance(value, float | int):
        return f"{value:.{digits}g}"
    return str(value)


def fmt_vector(values: list[Any] | None) -> str:
    if values is None:
        return "-"
    return "(" + ", ".join(fmt(v) for v in values) + ")"


def fmt_point(point: dict[str, Any] | None) -> str:
    if point is None:
        return "-"
    return f"x={fmt_vector(point['x'])} y={fmt_vector(point['y'])}"


class VerdictRenderer:
    """Renders required-penalty sweeps, path traces and the overall verdict."""

    VERDICT_STYLES = {
        "falsified": ("red bold", "✗ ", "FALSIFIED"),
        "not-falsified": ("green", "✓ ", "NOT FALSIFIED"),
        "center-rejected": ("yellow", "⚠️ ", "CENTER REJECTED"),
    }

    def __init__(self, console: Console | None = None):
        """
        Initialize the verdict renderer.

        Args:
            console: Rich Console instance. If None, creates a new one.
        """
        self.console = console or Console()

    def render(self, result: dict[str, Any], verbose: bool = False) -> None:
        """
        Render a falsify payload.

        Args:
            result: The `result` block of a falsify report.
            verbose: If True, show every path row including infeasible t.
        """
        self.render_center_check(result["center_check"])
        sweep = result.get("sweep")
        if sweep is not None:
            self.console.print()
            self.render_sweep(sweep)
        for i, path in enumerate(result.get("paths", []), start=1):
            self.console.print()
            self.render_trace(path, title=f"Witness path {i}", show_infeasible=verbose)
        self.console.print()
        self.render_verdict(result)

    def render_center_check(self, check: dict[str, Any]) -> None:
        style = "green" if check["ok"] else "yellow"
        content = Text()
        content.append("Center check: ", style="bold")
        content.append("ok" if check["ok"] else "rejected", style=style)
        if check.get("F_center") is not None:
            content.append(f"\nF at center: {fmt(check['F_center'])}")
        content.append(f"\nFeasible neighbors checked: {check['samples_checked']}", style="dim")
        if check.get("reason"):
            content.append(f"\nReason: {check['reason']}", style=style)
        if check.get("better_point"):
            content.append(f"\nBetter point: {fmt_point(check['better_point'])}")
        self.console.print(content)

    def render_sweep(self, sweep: dict[str, Any]) -> None:
        table = Table(title="Required penalty by radius", show_lines=False)
        table.add_column("Radius", justify="right")
        table.add_column("Samples", justify="right")
        table.add_column("sup required κ", justify="right", style="bold")
        table.add_column("κ = ∞ flags", justify="right")
        table.add_column("Worst sample")
        for row in sweep["per_radius"]:
            worst = row.get("worst")
            flags = row["infinite_flags"]
            table.add_row(
                fmt(row["radius"]),
                str(row["sample_count"]),
                fmt(row["sup_kappa"]),
                f"[yellow]{flags}[/yellow]" if flags else "0",
                fmt_point(worst["point"]) if worst else "-",
            )
        self.console.print(table)
        self.console.print(f"[dim]{sweep['reason']}[/dim]")

    def render_trace(
        self, path: dict[str, Any], title: str = "Witness path", show_infeasible: bool = False
    ) -> None:
        witness = path.get("witness") or {}
        if witness:
            self.console.print(
                f"[bold]{title}:[/bold] x(t) = {fmt_vector(witness['x'])}, "
                f"y(t) = {fmt_vector(witness['y'])}"
            )
        grid = [float(k) for k in path.get("kappa_grid", [])]
        kappas = [fmt(k) for k in grid]
        table = Table(title=title)
        table.add_column("t", justify="right")
        table.add_column("F", justify="right")
        table.add_column("u = f - φ", justify="right")
        table.add_column("required κ", justify="right", style="bold")
        for k in kappas:
            table.add_column(f"F + {k}·u", justify="right")
        for row in path["trace"]:
            if not row["feasible"]:
                if show_infeasible:
                    table.add_row(fmt(row["t"]), "[dim]infeasible[/dim]", *[""] * (2 + len(kappas)))
                continue
            penalized = [row["penalized"].get(repr(k)) for k in grid]
            table.add_row(
                fmt(row["t"]),
                fmt(row["F"], 10),
                fmt(row["u"], 10),
                fmt(row["required_kappa"]),
                *(fmt(v, 10) for v in penalized),
            )
        self.console.print(table)
        self.console.print(f"[dim]{path['reason']}[/dim]")

    def render_verdict(self, result: dict[str, Any]) -> None:
        verdict = result["verdict"]
        style, icon, label = self.VERDICT_STYLES.get(verdict, ("white", "? ", verdict.upper()))
        content = Text()
        content.append(f"{icon}{label}", style=style)
        if verdict == "not-falsified":
            content.append(f"\nLargest required κ seen: {fmt(result.get('kappa_hat'))}")
            content.append("\nSampling evidence only, not a calmness certificate.", style="dim")
        elif verdict == "falsified":
            content.append(f"\nDiverging required κ found by: {result.get('source')}")
        self.console.print(
            Panel(content, title="[bold]Partial calmness[/bold]", border_style=style.split()[0])
        )
