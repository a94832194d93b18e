"""Certificate and probe rendering for calm-probe CLI."""

from typing import Any

from rich.console import Console
from rich.panel import Panel
from rich.table import Table
from rich.text import Text

from calm_probe.cli.formatters.verdict import fmt, fmt_point, fmt_vector


class CertificateRenderer:
    """Renders the weak-sharp modulus, ratio probes, rank profile and condition summary."""

    EVIDENCE_STYLES = {
        "supported": ("green", "✓"),
        "refuted": ("red", "✗"),
        "unknown": ("yellow", "?"),
        "not-run": ("dim", "-"),
    }

    TREND_STYLES = {
        "bounded": "green",
        "diverging": "red",
        "inconclusive": "yellow",
    }

    def __init__(self, console: Console | None = None):
        """
        Initialize the certificate renderer.

        Args:
            console: Rich Console instance. If None, creates a new one.
        """
        self.console = console or Console()

    def render(self, result: dict[str, Any], verbose: bool = False) -> None:
        """
        Render a certify payload.

        Args:
            result: The `result` block of a certify report.
            verbose: If True, also list dual vertices and every rank subset.
        """
        self.console.print(f"[bold]Lower-level form:[/bold] {result['form']}")
        if result.get("uwsm") is not None:
            self.console.print()
            self.render_modulus(result["uwsm"], result.get("uwsm_check"), verbose)
        for key in ("luwsmc", "rrcq"):
            if result.get(key) is not None:
                self.console.print()
                self.render_ratio_probe(result[key])
        if result.get("domains") is not None:
            self.render_domains(result["domains"])
        if result.get("relaxed_dual") is not None:
            self.render_relaxed_dual(result["relaxed_dual"])
        if result.get("rank") is not None:
            self.console.print()
            self.render_rank(result["rank"], verbose)
        if result.get("isc") is not None:
            self.console.print()
            self.render_isc(result["isc"])
        self.console.print()
        self.render_summary(result["summary"])

    def render_modulus(
        self, cert: dict[str, Any], check: dict[str, Any] | None, verbose: bool = False
    ) -> None:
        table = Table(show_header=False, box=None)
        table.add_column("Label", style="bold")
        table.add_column("Value")
        table.add_row("Modulus M", fmt(cert["modulus_M"]))
        table.add_row("Dual vertices", str(cert["vertex_count"]))
        if cert["per_x_moduli"]:
            table.add_row("Kind", "[yellow]parameter sweep (evidence only)[/yellow]")
            table.add_row(
                "M(x) grows along samples",
                "[red]yes[/red]" if cert["grows"] else "[green]no[/green]",
            )
        else:
            table.add_row("Kind", "[green]certificate (fixed coefficients)[/green]")
        if check is not None:
            holds = check["holds"]
            table.add_row(
                "Inequality check",
                f"{'[green]holds' if holds else '[red]violated'}[/] on {check['samples']} samples"
                f" ({check['violations']} violations)",
            )
            table.add_row("Largest |ξ3| seen", fmt(check["max_dual_xi3"]))
            table.add_row("Largest primal/dual gap", fmt(check["max_primal_dual_gap"]))
        self.console.print(Panel(table, title="[bold]Weak-sharp modulus[/bold]", border_style="blue"))

        if cert["per_x_moduli"]:
            sweep = Table(title="M(x) by parameter")
            sweep.add_column("x")
            sweep.add_column("M(x)", justify="right")
            for row in cert["per_x_moduli"]:
                sweep.add_row(fmt_vector(row["x"]), fmt(row["M"]))
            self.console.print(sweep)
        if verbose:
            for vertex in cert["vertices"]:
                self.console.print(f"  [dim]vertex {fmt_vector(vertex)}[/dim]")

    def render_ratio_probe(self, probe: dict[str, Any]) -> None:
        trend = probe["trend"]
        style = self.TREND_STYLES.get(trend, "white")
        table = Table(title=f"{probe['kind']} ratio probe")
        table.add_column("Radius", justify="right")
        table.add_column("Samples", justify="right")
        table.add_column("Worst ratio", justify="right", style="bold")
        table.add_column("α estimate", justify="right")
        table.add_column("Skipped (φ / 0/0)", justify="right")
        table.add_column("Hard", justify="right")
        for row in probe["per_radius"]:
            hard = row["hard_violations"]
            table.add_row(
                fmt(row["radius"]),
                str(row["sample_count"]),
                fmt(row["worst_ratio"]),
                fmt(row["alpha_estimate"]),
                f"{row['skipped_phi']} / {row['skipped_zero']}",
                f"[red]{hard}[/red]" if hard else "0",
            )
        self.console.print(table)
        self.console.print(f"Trend: [{style}]{trend}[/{style}]")

    def render_domains(self, domains: dict[str, Any]) -> None:
        verdict = domains["verdict"]
        style = "green" if verdict == "coincide" else "red"
        self.console.print(
            f"Domains of Γ and S near x̄: [{style}]{verdict}[/{style}] "
            f"[dim]({domains['finite']} finite, {domains['infeasible']} infeasible, "
            f"{domains['unbounded']} unbounded)[/dim]"
        )

    def render_relaxed_dual(self, relaxed: dict[str, Any]) -> None:
        self.console.print(
            f"Dual bound without the coupling row at {fmt_point(relaxed['point'])}: "
            f"[yellow]{relaxed['status']}[/yellow]"
            + (f" ({fmt(relaxed['value'])})" if relaxed["status"] == "optimal" else "")
        )

    def render_rank(self, rank: dict[str, Any], verbose: bool = False) -> None:
        verdict = rank["verdict"]
        style = {"constant-rank-holds": "green", "violated": "red"}.get(verdict, "yellow")
        content = Text()
        content.append("Active set I: ", style="bold")
        content.append(fmt_vector(rank["active_set"]) if rank["active_set"] else "(empty)")
        content.append(f"\nParameters sampled: {rank['sample_count']}", style="dim")
        content.append("\nVerdict: ", style="bold")
        content.append(verdict, style=style)
        if rank["violated_subset"] is not None:
            a, b = rank["witness"]
            ra, rb = rank["witness_ranks"]
            content.append(
                f"\nRows J = {fmt_vector(rank['violated_subset'])}: rank {ra} at x = "
                f"{fmt_vector(a)}, rank {rb} at x = {fmt_vector(b)}"
            )
        self.console.print(Panel(content, title="[bold]Constant rank[/bold]", border_style=style))
        if verbose:
            for subset in rank["subsets"]:
                mark = "✓" if subset["constant"] else "✗"
                self.console.print(
                    f"  {mark} J = {fmt_vector(subset['J'])}: ranks {subset['ranks']}"
                )

    def render_isc(self, isc: dict[str, Any]) -> None:
        verdict = isc["verdict"]
        style = "green" if verdict == "consistent" else "red"
        table = Table(title="Inner semicontinuity: sup dist(ȳ, S(x̄ + t d))")
        table.add_column("t", justify="right")
        table.add_column("sup dist", justify="right")
        table.add_column("φ not finite", justify="right")
        for t, d, k in zip(isc["t_schedule"], isc["sup_dist"], isc["non_finite"], strict=True):
            table.add_row(fmt(t), fmt(d), str(k))
        self.console.print(table)
        self.console.print(f"Verdict: [{style}]{verdict}[/{style}]")
        if isc.get("violating_direction") is not None:
            self.console.print(f"Direction: {fmt_vector(isc['violating_direction'])}")

    def render_summary(self, summary: dict[str, Any]) -> None:
        table = Table(title="Conditions")
        table.add_column("Condition")
        table.add_column("Evidence")
        for name, evidence in summary["conditions"].items():
            style, icon = self.EVIDENCE_STYLES.get(evidence, ("white", "?"))
            table.add_row(name, f"[{style}]{icon} {evidence}[/{style}]")
        self.console.print(table)
        for rule in summary["implications"]:
            self.console.print(f"  [green]⇒[/green] {rule}")
        for contradiction in summary["contradictions"]:
            self.console.print(f"  [red]✗ {contradiction}[/red]")
