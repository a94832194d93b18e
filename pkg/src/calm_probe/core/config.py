"""Tolerances and sampling settings shared by every analysis."""

from collections.abc import Mapping
from dataclasses import dataclass, field, fields, replace
from enum import Enum

from calm_probe.core.exceptions import ConfigError

DEFAULT_SEED = 20200917
SEED_ENV_VAR = "CALM_PROBE_SEED"


class RankPolicy(Enum):
    """How numerical rank is measured."""

    ECHELON = "echelon"  # row echelon with partial pivoting
    SVD = "svd"  # singular values


@dataclass(frozen=True)
class Tolerances:
    """
    Numerical tolerances for the LP kernel and the probes.

    All values are absolute except `rank`, which is relative to the
    largest pivot or singular value, and `zero`, which is relative to the
    magnitude of the quantities a difference is taken from.
    """

    feas: float = 1e-9
    dual: float = 1e-8
    vertex: float = 1e-8
    rank: float = 1e-8
    pivot: float = 1e-11
    zero: float = 1e-14
    max_pivots: int = 5000
    vertex_cap: int = 200_000
    subset_cap: int = 12
    rank_policy: RankPolicy = RankPolicy.ECHELON

    def with_overrides(self, overrides: Mapping[str, str | float | int]) -> "Tolerances":
        """
        Return a copy with some fields replaced.

        Args:
            overrides: Field name to new value. String values are parsed.

        Raises:
            ConfigError: For unknown keys or unparsable values.
        """
        known = {f.name: f for f in fields(self)}
        changes: dict[str, object] = {}
        for key, raw in overrides.items():
            name = key.strip().replace("-", "_")
            if name.startswith("tau_"):
                name = name[4:]
            if name not in known:
                raise ConfigError(f"Unknown tolerance: {key}")
            current = getattr(self, name)
            try:
                if isinstance(current, RankPolicy):
                    changes[name] = RankPolicy(str(raw).strip().lower())
                elif isinstance(current, int):
                    changes[name] = int(raw)
                else:
                    changes[name] = float(raw)
            except ValueError as e:
                raise ConfigError(f"Bad value for {key}: {raw!r}") from e
        return replace(self, **changes)  # type: ignore[arg-type]

    def as_dict(self) -> dict[str, float | int | str]:
        """Plain mapping used when echoing the configuration into reports."""
        out: dict[str, float | int | str] = {}
        for f in fields(self):
            value = getattr(self, f.name)
            out[f.name] = value.value if isinstance(value, RankPolicy) else value
        return out


DEFAULT_TOLERANCES = Tolerances()


def dyadic_schedule(first: int = 1, last: int = 20) -> tuple[float, ...]:
    """t_k = 2^-k for k = first..last."""
    return tuple(2.0**-k for k in range(first, last + 1))


def harmonic_schedule(first: int = 2, last: int = 20) -> tuple[float, ...]:
    """t_k = 1/k for k = first..last."""
    return tuple(1.0 / k for k in range(first, last + 1))


def merge_schedules(*schedules: tuple[float, ...]) -> tuple[float, ...]:
    """Union of several schedules, strictly decreasing."""
    return tuple(sorted({t for schedule in schedules for t in schedule}, reverse=True))


@dataclass(frozen=True)
class ProbeSettings:
    """Sampling defaults for probes and the falsifier."""

    radii: tuple[float, ...] = (0.5, 0.25, 0.1, 0.05, 0.025, 0.01)
    samples_per_radius: int = 400
    boundary_fraction: float = 0.25
    max_attempts_factor: int = 20
    kappa_grid: tuple[float, ...] = (1.0, 10.0, 100.0, 1000.0)
    t_schedule: tuple[float, ...] = field(default_factory=dyadic_schedule)
    growth_factor: float = 10.0
    divergence_floor: float = 1e3
    bounded_spread: float = 2.0
    center_radius: float = 0.1
    center_samples: int = 200


DEFAULT_SETTINGS = ProbeSettings()
