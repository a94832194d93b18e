"""Integration tests for calm-probe CLI commands via Typer runner.

These tests exercise the public CLI surface: exit codes, key output
markers and the files written by --out and --csv.
"""

from __future__ import annotations

import json
import re
from pathlib import Path

from typer.testing import CliRunner

from calm_probe.cli.main import app as cli_app

runner = CliRunner()

ANSI_RE = re.compile(r"\x1b\[[0-9;]*[mGKHF]")

FAST = ["--radii", "0.5,0.1,0.01,0.001", "--samples", "200"]


def strip_ansi(text: str) -> str:
    return ANSI_RE.sub("", text)


def test_version() -> None:
    result = runner.invoke(cli_app, ["--version"])
    assert result.exit_code == 0
    assert "calm-probe version" in strip_ansi(result.output)


def test_phi_sweep_table() -> None:
    result = runner.invoke(cli_app, ["phi-sweep", "--builtin", "example-4-2", "--grid=-2:2:5"])
    assert result.exit_code == 0, result.output
    out = strip_ansi(result.output)
    assert "5 of 5 values finite" in out
    assert "-4" in out


def test_phi_sweep_model_file(model_file: Path) -> None:
    result = runner.invoke(cli_app, ["phi-sweep", "--model", str(model_file), "-g", "0:1:2"])
    assert result.exit_code == 0, result.output
    assert "2 of 2 values finite" in strip_ansi(result.output)


def test_falsify_example_4_2_exits_2() -> None:
    result = runner.invoke(cli_app, ["falsify", "-b", "example-4-2", *FAST])
    assert result.exit_code == 2, result.output
    assert "FALSIFIED" in strip_ansi(result.output)


def test_falsify_example_4_5_exits_2() -> None:
    result = runner.invoke(cli_app, ["falsify", "-b", "example-4-5", *FAST])
    assert result.exit_code == 2, result.output


def test_falsify_global_minimizer_exits_0() -> None:
    result = runner.invoke(cli_app, ["falsify", "-b", "example-4-3-center", *FAST])
    assert result.exit_code == 0, result.output
    assert "NOT FALSIFIED" in strip_ansi(result.output)


def test_falsify_rejected_center_exits_3() -> None:
    result = runner.invoke(
        cli_app,
        ["falsify", "-b", "example-4-2", "--center-x", "0", "--center-y", "0.5", *FAST],
    )
    assert result.exit_code == 3, result.output
    assert "CENTER REJECTED" in strip_ansi(result.output)


def test_falsify_needs_one_model_source(model_file: Path) -> None:
    result = runner.invoke(cli_app, ["falsify", "-b", "example-4-2", "-m", str(model_file)])
    assert result.exit_code == 1
    assert "exactly one" in strip_ansi(result.output)


def test_unknown_builtin_is_an_error() -> None:
    result = runner.invoke(cli_app, ["falsify", "-b", "example-9-9"])
    assert result.exit_code == 1
    assert "Error" in strip_ansi(result.output)


def test_bad_radii_is_an_error() -> None:
    result = runner.invoke(cli_app, ["falsify", "-b", "example-4-2", "--radii", "0.5,x"])
    assert result.exit_code == 1


def test_bad_tolerance_is_an_error() -> None:
    result = runner.invoke(cli_app, ["phi-sweep", "-b", "example-4-2", "--tol", "feas"])
    assert result.exit_code == 1


def test_out_is_byte_identical(temp_dir: Path) -> None:
    first, second = temp_dir / "a.json", temp_dir / "b.json"
    for target in (first, second):
        result = runner.invoke(
            cli_app, ["falsify", "-b", "example-4-3-center", *FAST, "--out", str(target)]
        )
        assert result.exit_code == 0, result.output
    assert first.read_bytes() == second.read_bytes()
    data = json.loads(first.read_text())
    assert data["command"] == "falsify"
    assert data["exit_code"] == 0


def test_seed_from_environment(temp_dir: Path) -> None:
    target = temp_dir / "seeded.json"
    result = runner.invoke(
        cli_app,
        ["phi-sweep", "-b", "example-4-2", "--out", str(target)],
        env={"CALM_PROBE_SEED": "11"},
    )
    assert result.exit_code == 0, result.output
    assert json.loads(target.read_text())["config"]["seed"] == 11


def test_certify_fully_linear() -> None:
    result = runner.invoke(
        cli_app,
        [
            "certify",
            "-b",
            "fully-linear-random",
            "--seed",
            "7",
            "--samples",
            "60",
            "--radii",
            "0.5,0.1,0.05,0.01",
        ],
    )
    assert result.exit_code == 0, result.output
    out = strip_ansi(result.output)
    assert "Weak-sharp modulus" in out
    assert "Conditions" in out


def test_certify_example_4_4_rank() -> None:
    result = runner.invoke(cli_app, ["certify", "-b", "example-4-4", "--no-probes", "--no-uwsm"])
    assert result.exit_code == 0, result.output
    out = strip_ansi(result.output)
    assert "Constant rank" in out
    assert "violated" in out


def test_report_renders_and_exports_csv(temp_dir: Path) -> None:
    target = temp_dir / "sweep.json"
    result = runner.invoke(
        cli_app, ["phi-sweep", "-b", "example-4-2", "--grid=-1:1:3", "--out", str(target)]
    )
    assert result.exit_code == 0, result.output

    tables = temp_dir / "tables"
    result = runner.invoke(cli_app, ["report", str(target), "--csv", str(tables)])
    assert result.exit_code == 0, result.output
    assert "3 of 3 values finite" in strip_ansi(result.output)
    assert (tables / "phi.csv").read_text().splitlines()[0] == "x1,status,value"


def test_report_on_corrupt_file(temp_dir: Path) -> None:
    target = temp_dir / "corrupt.json"
    target.write_text("{not json")
    result = runner.invoke(cli_app, ["report", str(target)])
    assert result.exit_code == 1
    assert "Error" in strip_ansi(result.output)
