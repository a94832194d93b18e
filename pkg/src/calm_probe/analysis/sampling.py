"""
Sampling on max-norm balls with common random numbers.

One set of unit draws is generated per probe call and scaled by every
radius, so traces across radii are directly comparable.
"""

import logging
from collections.abc import Iterator
from dataclasses import dataclass
from enum import Enum, auto

import numpy as np
from numpy.typing import NDArray

from calm_probe.core.config import DEFAULT_TOLERANCES, Tolerances
from calm_probe.core.models import FloatArray
from calm_probe.model.bilevel import BilevelModel, Point, instantiate, project_to_upper

logger = logging.getLogger(__name__)


class BoundaryMode(Enum):
    """How the boundary-biased share of samples is moved."""

    NONE = auto()
    FEASIBLE = auto()  # along a direction to the boundary of the lower-level feasible set
    PLANE = auto()  # onto the hyperplane g_j = 0 of one constraint


@dataclass(frozen=True, eq=False)
class UnitDraws:
    """Unit-ball draws reused for every radius of one probe call."""

    x: FloatArray
    y: FloatArray
    directions: FloatArray
    boundary: NDArray[np.bool_]
    rows: NDArray[np.int64]

    @classmethod
    def draw(
        cls, n: int, m: int, q: int, count: int, seed: int, boundary_fraction: float
    ) -> "UnitDraws":
        rng = np.random.default_rng(seed)
        x = rng.uniform(-1.0, 1.0, size=(count, n))
        y = rng.uniform(-1.0, 1.0, size=(count, m))
        directions = rng.normal(size=(count, m))
        norms = np.max(np.abs(directions), axis=1, keepdims=True)
        directions = directions / np.where(norms > 0, norms, 1.0)
        boundary = rng.random(count) < boundary_fraction
        rows = rng.integers(0, q, size=count)
        return cls(x=x, y=y, directions=directions, boundary=boundary, rows=rows)

    def __len__(self) -> int:
        return int(self.x.shape[0])


def _ball_step(y: FloatArray, d: FloatArray, center_y: FloatArray, radius: float) -> float:
    """Largest s >= 0 keeping y + s d inside the max-norm ball around center_y."""
    steps = []
    for yi, di, ci in zip(y, d, center_y, strict=True):
        if di > 0:
            steps.append((ci + radius - yi) / di)
        elif di < 0:
            steps.append((ci - radius - yi) / di)
    return max(0.0, min(steps, default=np.inf))


def push_to_feasible_boundary(
    g: FloatArray,
    B: FloatArray,
    y: FloatArray,
    d: FloatArray,
    center_y: FloatArray,
    radius: float,
    tol: Tolerances = DEFAULT_TOLERANCES,
) -> FloatArray:
    """
    Move a feasible y along d until a lower-level constraint becomes
    tight, stopping at the ball boundary.
    """
    slopes = B @ d
    ratio_steps = [-gj / sj for gj, sj in zip(g, slopes, strict=True) if sj > tol.pivot]
    s = min(max(0.0, min(ratio_steps, default=np.inf)), _ball_step(y, d, center_y, radius))
    if not np.isfinite(s):
        return y
    return y + s * d


def push_to_plane(
    gj: float,
    Bj: FloatArray,
    y: FloatArray,
    d: FloatArray,
    center_y: FloatArray,
    radius: float,
    tol: Tolerances = DEFAULT_TOLERANCES,
) -> FloatArray:
    """Move y along d onto {g_j = 0}; unchanged if that leaves the ball."""
    slope = float(Bj @ d)
    if abs(slope) <= tol.pivot:
        return y
    moved = y - (gj / slope) * d
    if float(np.max(np.abs(moved - center_y))) > radius * (1.0 + 1e-12):
        return y
    return moved


def ball_points(
    model: BilevelModel,
    center: Point,
    radius: float,
    draws: UnitDraws,
    mode: BoundaryMode = BoundaryMode.NONE,
    lower_feasible: bool = True,
    upper_feasible: bool = False,
    tol: Tolerances = DEFAULT_TOLERANCES,
) -> Iterator[tuple[int, Point]]:
    """
    Yield (draw index, point) for the draws that pass the filters.

    Args:
        model: Model whose constraints filter the samples.
        center: Ball center.
        radius: Max-norm radius.
        draws: Unit draws shared by all radii.
        mode: Boundary bias for draws flagged in `draws.boundary`.
        lower_feasible: Keep only points with A(x) + B(x) y <= tol.feas.
        upper_feasible: Project x onto X first and keep it only if it
            stays in X and in the ball.
    """
    for i in range(len(draws)):
        x = center.x + radius * draws.x[i]
        if upper_feasible:
            projected = project_to_upper(model, x, tol)
            if projected is None:
                continue
            if float(np.max(np.abs(projected - center.x), initial=0.0)) > radius * (1.0 + 1e-12):
                continue
            x = projected
        y = center.y + radius * draws.y[i]
        _, A, B = instantiate(model, x)
        g = A + B @ y

        if draws.boundary[i] and mode == BoundaryMode.FEASIBLE:
            if float(np.max(g)) <= tol.feas:
                y = push_to_feasible_boundary(g, B, y, draws.directions[i], center.y, radius, tol)
                g = A + B @ y
        elif draws.boundary[i] and mode == BoundaryMode.PLANE:
            j = int(draws.rows[i])
            y = push_to_plane(float(g[j]), B[j], y, draws.directions[i], center.y, radius, tol)
            g = A + B @ y

        if lower_feasible and float(np.max(g)) > tol.feas:
            continue
        yield i, Point(x=x, y=y)
