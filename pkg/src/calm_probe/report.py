"""Run configuration and JSON reports with CSV table export."""

import csv
import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any

from calm_probe.core.config import DEFAULT_SEED
from calm_probe.core.exceptions import ConfigError, ReportError

REPORT_FORMAT = 1
COMMANDS = ("phi-sweep", "falsify", "certify")


@dataclass
class RunConfig:
    """Everything needed to reproduce one command run."""

    command: str
    model_path: str | None = None
    builtin: str | None = None
    seed: int = DEFAULT_SEED
    tolerances: dict[str, str] = field(default_factory=dict)
    radii: list[float] | None = None
    kappa_grid: list[float] | None = None
    samples: int | None = None
    grid: list[str] = field(default_factory=list)
    center_x: list[float] | None = None
    center_y: list[float] | None = None
    flags: dict[str, bool] = field(default_factory=dict)
    timing: bool = False

    def __post_init__(self) -> None:
        if self.command not in COMMANDS:
            raise ConfigError(f"Unknown command: {self.command}")
        if (self.model_path is None) == (self.builtin is None):
            raise ConfigError("Give exactly one of --model and --builtin")
        if (self.center_x is None) != (self.center_y is None):
            raise ConfigError("--center-x and --center-y must be given together")

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "RunConfig":
        return cls(**data)


def _json_safe(value: Any) -> Any:
    if isinstance(value, float) and not math.isfinite(value):
        return "nan" if math.isnan(value) else ("inf" if value > 0 else "-inf")
    if isinstance(value, dict):
        return {str(k): _json_safe(v) for k, v in value.items()}
    if isinstance(value, list | tuple):
        return [_json_safe(v) for v in value]
    return value


@dataclass
class Report:
    """
    Result of one command: model, config echo, payload and flat tables.

    `tables` maps a table name to rows of scalar columns; every table can
    be written out as CSV. Wall-clock time is only stored when the config
    asks for it, so equal configs produce byte-identical files.
    """

    command: str
    config: RunConfig
    model: dict[str, Any]
    model_text: str
    result: dict[str, Any]
    tables: dict[str, list[dict[str, Any]]] = field(default_factory=dict)
    warnings: list[str] = field(default_factory=list)
    notices: list[str] = field(default_factory=list)
    exit_code: int = 0
    wall_clock: float | None = None

    def to_dict(self) -> dict[str, Any]:
        data: dict[str, Any] = {
            "format": REPORT_FORMAT,
            "command": self.command,
            "config": self.config.to_dict(),
            "model": self.model,
            "model_text": self.model_text,
            "result": self.result,
            "tables": self.tables,
            "warnings": self.warnings,
            "notices": self.notices,
            "exit_code": self.exit_code,
        }
        if self.wall_clock is not None:
            data["wall_clock"] = self.wall_clock
        return _json_safe(data)  # type: ignore[no-any-return]

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "Report":
        """
        Rebuild a report from its dictionary form.

        Raises:
            ReportError: If required keys are missing or malformed.
        """
        try:
            if data.get("format") != REPORT_FORMAT:
                raise ReportError(f"Unsupported report format: {data.get('format')!r}")
            return cls(
                command=data["command"],
                config=RunConfig.from_dict(data["config"]),
                model=data["model"],
                model_text=data["model_text"],
                result=data["result"],
                tables=data.get("tables", {}),
                warnings=data.get("warnings", []),
                notices=data.get("notices", []),
                exit_code=int(data.get("exit_code", 0)),
                wall_clock=data.get("wall_clock"),
            )
        except (KeyError, TypeError, ValueError, ConfigError) as e:
            raise ReportError(f"Malformed report: {e}") from e

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True, allow_nan=False) + "\n"

    def save(self, path: str | Path) -> Path:
        """
        Write the report as JSON.

        Raises:
            ReportError: If the file cannot be written.
        """
        target = Path(path)
        try:
            target.parent.mkdir(parents=True, exist_ok=True)
            target.write_text(self.to_json(), encoding="utf-8")
        except OSError as e:
            raise ReportError(f"Cannot write report {target}: {e}") from e
        return target

    @classmethod
    def load(cls, path: str | Path) -> "Report":
        """
        Read a report written by `save`.

        Raises:
            ReportError: If the file is missing, not JSON, or not a report.
        """
        source = Path(path)
        try:
            data = json.loads(source.read_text(encoding="utf-8"))
        except OSError as e:
            raise ReportError(f"Cannot read report {source}: {e}") from e
        except json.JSONDecodeError as e:
            raise ReportError(f"Report {source} is not valid JSON: {e}") from e
        if not isinstance(data, dict):
            raise ReportError(f"Report {source} is not a JSON object")
        return cls.from_dict(data)

    def export_csv(self, directory: str | Path) -> list[Path]:
        """
        Write every table to `<directory>/<table>.csv`.

        Column order is the key order of the first row, followed by any
        keys that only appear in later rows.

        Raises:
            ReportError: If a file cannot be written.
        """
        out_dir = Path(directory)
        written: list[Path] = []
        try:
            out_dir.mkdir(parents=True, exist_ok=True)
            for name, rows in sorted(self.tables.items()):
                columns: list[str] = []
                for row in rows:
                    columns.extend(k for k in row if k not in columns)
                target = out_dir / f"{name}.csv"
                with open(target, "w", newline="", encoding="utf-8") as f:
                    writer = csv.DictWriter(f, fieldnames=columns, lineterminator="\n")
                    writer.writeheader()
                    writer.writerows(rows)
                written.append(target)
        except OSError as e:
            raise ReportError(f"Cannot write CSV tables to {out_dir}: {e}") from e
        return written
