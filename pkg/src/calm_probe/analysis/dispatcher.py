"""Unified command dispatcher: turns a RunConfig into a Report."""

import itertools
import logging
import time
from collections.abc import Callable
from dataclasses import replace
from pathlib import Path
from typing import Any

import numpy as np

from calm_probe.analysis.certificates import (
    condition_summary,
    constant_rank_check,
    inner_semicontinuity_probe,
    luwsmc_probe,
    model_uwsm_modulus,
    r_regularity_probe,
    relaxed_dual_bound,
    uwsm_inequality_check,
    uwsm_modulus_sweep,
)
from calm_probe.analysis.falsifier import (
    combine_verdicts,
    path_falsify,
    rejected,
    required_kappa_sweep,
    verify_center,
)
from calm_probe.analysis.results import (
    CalmnessOutcome,
    CalmnessVerdict,
    DomainReport,
    IscReport,
    RankProfile,
    RatioProbeReport,
    UwsmCheck,
    WsmCertificate,
)
from calm_probe.analysis.value_function import domain_coincidence_probe, phi
from calm_probe.core.config import DEFAULT_SETTINGS, DEFAULT_TOLERANCES, ProbeSettings, Tolerances
from calm_probe.core.exceptions import AnalysisError, ConfigError, FormNotSupportedError
from calm_probe.model.bilevel import BilevelModel, Point, lower_feasible
from calm_probe.model.builtins import load_builtin
from calm_probe.model.parser import parse_model, serialize_model
from calm_probe.report import Report, RunConfig

logger = logging.getLogger(__name__)

Tables = dict[str, list[dict[str, Any]]]
CommandOutput = tuple[dict[str, Any], Tables, int]

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_FALSIFIED = 2
EXIT_CENTER_REJECTED = 3

_VERDICT_EXIT = {
    CalmnessOutcome.NOT_FALSIFIED: EXIT_OK,
    CalmnessOutcome.FALSIFIED: EXIT_FALSIFIED,
    CalmnessOutcome.CENTER_REJECTED: EXIT_CENTER_REJECTED,
}

DEFAULT_GRID = "-1:1:5"
DEFAULT_UWSM_SAMPLES = 1000


def load_model(config: RunConfig) -> BilevelModel:
    """
    Load the model named by the config.

    Raises:
        ConfigError: If the model file cannot be read.
        ModelError: If the model text or builtin name is invalid.
    """
    if config.builtin is not None:
        return load_builtin(config.builtin, seed=config.seed)
    assert config.model_path is not None
    path = Path(config.model_path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"Cannot read model file {path}: {e}") from e
    return parse_model(text, name=path.stem)


def parse_grid(specs: list[str], n: int) -> list[np.ndarray]:
    """
    Parse one `lo:hi:count` spec per x component.

    A single spec is reused for every component; no spec means -1:1:5.

    Raises:
        ConfigError: For malformed specs or a count mismatch.
    """
    specs = specs or [DEFAULT_GRID]
    if len(specs) == 1:
        specs = specs * n
    if len(specs) != n:
        raise ConfigError(f"Expected 1 or {n} grid specs, got {len(specs)}")
    axes = []
    for spec in specs:
        parts = spec.split(":")
        try:
            lo, hi, count = float(parts[0]), float(parts[1]), int(parts[2])
        except (IndexError, ValueError) as e:
            raise ConfigError(f"Bad grid spec {spec!r}, expected lo:hi:count") from e
        if len(parts) != 3 or count < 1 or hi < lo or (count == 1 and hi != lo):
            raise ConfigError(f"Bad grid spec {spec!r}, expected lo:hi:count")
        axes.append(np.linspace(lo, hi, count))
    return axes


def _point_columns(point: Point) -> dict[str, float]:
    row = {f"x{i + 1}": float(v) for i, v in enumerate(point.x)}
    row.update({f"y{i + 1}": float(v) for i, v in enumerate(point.y)})
    return row


class AnalysisDispatcher:
    """
    Central entry point for running any command.

    Resolves the model, tolerances and settings from a RunConfig once and
    builds a Report with a consistent layout for every command.
    """

    def __init__(self, config: RunConfig, model: BilevelModel | None = None):
        """
        Initialize the dispatcher.

        Args:
            config: Run configuration.
            model: Already loaded model. If None, it is loaded from the config.
        """
        self.config = config
        self._model = model
        self.tol: Tolerances = DEFAULT_TOLERANCES.with_overrides(config.tolerances)
        self.settings: ProbeSettings = self._settings()
        self.warnings: list[str] = []
        self.notices: list[str] = []

    @property
    def model(self) -> BilevelModel:
        if self._model is None:
            self._model = load_model(self.config)
        return self._model

    def _settings(self) -> ProbeSettings:
        changes: dict[str, Any] = {}
        if self.config.radii:
            if any(r <= 0 for r in self.config.radii):
                raise ConfigError("Radii must be positive")
            changes["radii"] = tuple(sorted(self.config.radii, reverse=True))
        if self.config.kappa_grid:
            changes["kappa_grid"] = tuple(self.config.kappa_grid)
        if self.config.samples is not None:
            if self.config.samples < 1:
                raise ConfigError("--samples must be positive")
            changes["samples_per_radius"] = self.config.samples
        return replace(DEFAULT_SETTINGS, **changes)

    def center(self) -> Point | None:
        if self.config.center_x is not None and self.config.center_y is not None:
            return Point.of(self.config.center_x, self.config.center_y)
        return self.model.candidate

    def run(self) -> Report:
        """
        Run the configured command.

        Returns:
            Report with payload, tables and exit code.

        Raises:
            ConfigError: If the command is not recognized.
        """
        handlers: dict[str, Callable[[], CommandOutput]] = {
            "phi-sweep": self._run_phi_sweep,
            "falsify": self._run_falsify,
            "certify": self._run_certify,
        }
        handler = handlers.get(self.config.command)
        if handler is None:
            raise ConfigError(f"Unknown command: {self.config.command}")

        started = time.perf_counter()
        result, tables, exit_code = handler()
        elapsed = time.perf_counter() - started
        logger.info("%s finished in %.3fs", self.config.command, elapsed)
        return Report(
            command=self.config.command,
            config=self.config,
            model=self.model.summary(),
            model_text=serialize_model(self.model),
            result=result,
            tables=tables,
            warnings=self.warnings,
            notices=self.notices,
            exit_code=exit_code,
            wall_clock=elapsed if self.config.timing else None,
        )

    # phi-sweep

    def _run_phi_sweep(self) -> CommandOutput:
        axes = parse_grid(self.config.grid, self.model.n)
        rows: list[dict[str, Any]] = []
        for x in itertools.product(*axes):
            value = phi(self.model, np.array(x), self.tol)
            row: dict[str, Any] = {f"x{i + 1}": float(v) for i, v in enumerate(x)}
            row["status"] = value.status.value
            row["value"] = value.value
            rows.append(row)
        result = {
            "grid": [[float(v) for v in axis] for axis in axes],
            "points": len(rows),
            "finite": sum(r["status"] == "finite" for r in rows),
        }
        return result, {"phi": rows}, EXIT_OK

    # falsify

    def _require_center(self) -> Point:
        center = self.center()
        if center is None:
            raise ConfigError("Model has no candidate; pass --center-x and --center-y")
        return center

    def _run_falsify(self) -> CommandOutput:
        center = self._require_center()
        check = verify_center(
            self.model, center, seed=self.config.seed, tol=self.tol, settings=self.settings
        )
        result: dict[str, Any] = {"center_check": check.to_dict()}
        tables: Tables = {}
        if not check.ok:
            verdict = rejected(center, check)
            self.notices.append(f"Center rejected: {check.reason}")
            result.update(verdict=verdict.verdict.value, overall=verdict.to_dict())
            return result, tables, EXIT_CENTER_REJECTED

        sweep = required_kappa_sweep(
            self.model,
            center,
            seed=self.config.seed,
            tol=self.tol,
            settings=self.settings,
            center_check=check,
        )
        paths = [
            path_falsify(
                self.model, center, path, tol=self.tol, settings=self.settings, center_check=check
            )
            for path in self.model.paths
        ]
        overall = combine_verdicts(center, [sweep, *paths])
        if overall.infinite_flags:
            self.warnings.append(
                f"{overall.infinite_flags} samples need an infinite penalty; "
                "the center may not be a local minimizer"
            )

        result.update(
            verdict=overall.verdict.value,
            kappa_hat=overall.kappa_hat,
            source=overall.source,
            sweep=sweep.to_dict(),
            paths=[p.to_dict() for p in paths],
        )
        tables["kappa_sweep"] = self._sweep_rows(sweep)
        for i, path in enumerate(paths, start=1):
            tables[f"path_{i}"] = self._trace_rows(path)
        return result, tables, _VERDICT_EXIT[overall.verdict]

    @staticmethod
    def _sweep_rows(verdict: CalmnessVerdict) -> list[dict[str, Any]]:
        return [
            {
                "radius": s.radius,
                "sample_count": s.sample_count,
                "sup_kappa": s.sup_kappa,
                "infinite_flags": s.infinite_flags,
            }
            for s in verdict.per_radius
        ]

    @staticmethod
    def _trace_rows(verdict: CalmnessVerdict) -> list[dict[str, Any]]:
        rows = []
        for r in verdict.trace:
            row: dict[str, Any] = {"t": r.t, **_point_columns(r.point), "feasible": r.feasible}
            row.update(F=r.F, u=r.u, required_kappa=r.required_kappa, resolved=r.resolved)
            for kappa in verdict.kappa_grid:
                row[f"penalized[{kappa:g}]"] = r.penalized.get(kappa)
            rows.append(row)
        return rows

    # certify

    def _section(self, name: str, fn: Callable[[], Any]) -> Any:
        """Run one part of certify; analysis failures become notices."""
        try:
            return fn()
        except AnalysisError as e:
            self.notices.append(f"{name} skipped: {e}")
            logger.info("%s skipped: %s", name, e)
            return None

    def _uwsm(self, center: Point | None) -> tuple[WsmCertificate | None, UwsmCheck | None]:
        try:
            certificate = model_uwsm_modulus(self.model, self.tol)
        except FormNotSupportedError as e:
            self.notices.append(f"{e}; reporting the modulus sweep instead")
            base = center.x if center is not None else np.zeros(self.model.n)
            xs = [base + r * np.ones(self.model.n) for r in self.settings.radii]
            xs = [x for x in xs if phi(self.model, x, self.tol).is_finite]
            if not xs:
                self.notices.append("Modulus sweep skipped: phi is not finite at any sample")
                return None, None
            return uwsm_modulus_sweep(self.model, xs, self.tol), None
        samples = self.config.samples or DEFAULT_UWSM_SAMPLES
        check = uwsm_inequality_check(
            self.model,
            certificate,
            samples=samples,
            seed=self.config.seed,
            tol=self.tol,
            settings=self.settings,
        )
        return certificate, check

    def _relaxed_dual(self, luwsmc: RatioProbeReport | None) -> dict[str, Any] | None:
        if luwsmc is None:
            return None
        for stats in luwsmc.per_radius:
            point = stats.worst_point
            if point is None or stats.worst_ratio <= 0:
                continue
            if not lower_feasible(self.model, point.x, point.y, self.tol):
                continue
            outcome = relaxed_dual_bound(self.model, point.x, point.y, self.tol)
            return {
                "point": point.to_dict(),
                "status": outcome.status.name.lower(),
                "value": outcome.value,
            }
        return None

    def _run_certify(self) -> CommandOutput:
        flags = {"uwsm": True, "probes": True, "rank": True, "isc": True, **self.config.flags}
        center = self.center()
        seed = self.config.seed
        result: dict[str, Any] = {"form": self.model.form_tag.value}
        tables: Tables = {}

        certificate: WsmCertificate | None = None
        check: UwsmCheck | None = None
        if flags["uwsm"]:
            certificate, check = self._uwsm(center)
            result["uwsm"] = None if certificate is None else certificate.to_dict()
            result["uwsm_check"] = None if check is None else check.to_dict()
            if certificate is not None and certificate.is_parametric:
                tables["modulus_sweep"] = [
                    {**{f"x{i + 1}": float(v) for i, v in enumerate(x)}, "M": M}
                    for x, M in certificate.per_x_moduli
                ]

        luwsmc: RatioProbeReport | None = None
        rrcq: RatioProbeReport | None = None
        domains: DomainReport | None = None
        rank: RankProfile | None = None
        isc: IscReport | None = None
        if center is None and (flags["probes"] or flags["rank"] or flags["isc"]):
            self.notices.append("Model has no candidate; centered probes skipped")
        elif center is not None:
            model, tol, settings, at = self.model, self.tol, self.settings, center
            if flags["probes"]:
                luwsmc = self._section(
                    "LUWSMC probe",
                    lambda: luwsmc_probe(model, at, seed=seed, tol=tol, settings=settings),
                )
                rrcq = self._section(
                    "RRCQ probe",
                    lambda: r_regularity_probe(model, at, seed=seed, tol=tol, settings=settings),
                )
                domains = domain_coincidence_probe(
                    model, at.x, max(settings.radii), seed=seed, tol=tol
                )
                for name, report in (("luwsmc", luwsmc), ("rrcq", rrcq)):
                    result[name] = None if report is None else report.to_dict()
                    if report is not None:
                        tables[name] = [
                            {
                                "radius": s.radius,
                                "sample_count": s.sample_count,
                                "worst_ratio": s.worst_ratio,
                                "skipped_phi": s.skipped_phi,
                                "skipped_zero": s.skipped_zero,
                                "hard_violations": s.hard_violations,
                            }
                            for s in report.per_radius
                        ]
                result["domains"] = domains.to_dict()
                result["relaxed_dual"] = self._relaxed_dual(luwsmc)
            if flags["rank"]:
                rank = self._section(
                    "Constant rank check",
                    lambda: constant_rank_check(model, at, seed=seed, tol=tol, settings=settings),
                )
                result["rank"] = None if rank is None else rank.to_dict()
            if flags["isc"]:
                isc = self._section(
                    "Inner semicontinuity probe",
                    lambda: inner_semicontinuity_probe(
                        model, at, seed=seed, tol=tol, settings=settings
                    ),
                )
                result["isc"] = None if isc is None else isc.to_dict()
                if isc is not None:
                    tables["isc"] = [
                        {"t": t, "sup_dist": d, "non_finite": k}
                        for t, d, k in zip(
                            isc.t_schedule, isc.sup_dist, isc.non_finite, strict=True
                        )
                    ]

        summary = condition_summary(
            luwsmc=luwsmc,
            rrcq=rrcq,
            rank=rank,
            isc=isc,
            domains=domains,
            uwsm=certificate,
            uwsm_check=check,
        )
        result["summary"] = summary.to_dict()
        return result, tables, EXIT_OK


def run_command(config: RunConfig) -> Report:
    """Run a command with a freshly loaded model."""
    return AnalysisDispatcher(config).run()
