"""Dense LP kernel for calm-probe."""

from calm_probe.core.config import (
    DEFAULT_SEED,
    DEFAULT_SETTINGS,
    DEFAULT_TOLERANCES,
    ProbeSettings,
    RankPolicy,
    Tolerances,
)
from calm_probe.core.models import (
    LpOutcome,
    LpProblem,
    LpStatus,
    Polyhedron,
    Sense,
    Sign,
    VertexSet,
)
from calm_probe.core.rank import numerical_rank
from calm_probe.core.simplex import solve_lp
from calm_probe.core.vertices import enumerate_vertices

__all__ = [
    "DEFAULT_SEED",
    "DEFAULT_SETTINGS",
    "DEFAULT_TOLERANCES",
    "LpOutcome",
    "LpProblem",
    "LpStatus",
    "Polyhedron",
    "ProbeSettings",
    "RankPolicy",
    "Sense",
    "Sign",
    "Tolerances",
    "VertexSet",
    "enumerate_vertices",
    "numerical_rank",
    "solve_lp",
]
