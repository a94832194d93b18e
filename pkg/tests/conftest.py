"""Pytest fixtures for calm-probe tests."""

import shutil
import tempfile
from collections.abc import Generator
from pathlib import Path

import pytest

from calm_probe.core.config import DEFAULT_TOLERANCES, ProbeSettings, Tolerances
from calm_probe.model.bilevel import BilevelModel
from calm_probe.model.builtins import builtin_text, load_builtin

# min -y over y >= 0: the lower level is unbounded for every parameter.
UNBOUNDED_MODEL = """
[dims]
n = 1
m = 1
q = 1

[upper]
F = x1 + y1

[lower.objective]
c[1] = -1

[lower.constraints]
B[1][1] = -1
"""


@pytest.fixture
def temp_dir() -> Generator[Path, None, None]:
    """Create a temporary directory for tests."""
    path = Path(tempfile.mkdtemp())
    try:
        yield path
    finally:
        shutil.rmtree(path, ignore_errors=True)


@pytest.fixture
def tol() -> Tolerances:
    return DEFAULT_TOLERANCES


@pytest.fixture
def fast_settings() -> ProbeSettings:
    """Fewer radii and samples; the traces still span two decades."""
    return ProbeSettings(radii=(0.5, 0.1, 0.05, 0.01), samples_per_radius=150)


@pytest.fixture
def example_4_2() -> BilevelModel:
    """phi(x) = -x^2; S(0) = [0, 1] and S(x) = {1} otherwise; candidate (0, 0)."""
    return load_builtin("example-4-2")


@pytest.fixture
def example_4_3() -> BilevelModel:
    """Same data as example-4-2 with the global minimizer (2, 1) as candidate."""
    return load_builtin("example-4-3-center")


@pytest.fixture
def example_4_4() -> BilevelModel:
    """phi(x) = 0; S(x) = {(y1, 0) | x y1 >= 0} for x != 0; candidate (0, (0, 0))."""
    return load_builtin("example-4-4")


@pytest.fixture
def example_4_5() -> BilevelModel:
    """phi(x) = -|x1| on X = {x1 = x2^2}; candidate ((0, 0), -1)."""
    return load_builtin("example-4-5")


@pytest.fixture
def model_file(temp_dir: Path) -> Path:
    """The example-4-2 model written to disk."""
    path = temp_dir / "example.model"
    path.write_text(builtin_text("example-4-2"))
    return path


@pytest.fixture
def unbounded_model_file(temp_dir: Path) -> Path:
    path = temp_dir / "unbounded.model"
    path.write_text(UNBOUNDED_MODEL)
    return path
