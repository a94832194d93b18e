"""Data models for the dense LP kernel."""

from collections.abc import Sequence
from dataclasses import dataclass, field
from enum import Enum, auto

import numpy as np
from numpy.typing import ArrayLike, NDArray

from calm_probe.core.exceptions import DimensionMismatchError

FloatArray = NDArray[np.float64]


class Sign(Enum):
    """Sign restriction on a single LP variable."""

    FREE = auto()
    NONPOSITIVE = auto()
    NONNEGATIVE = auto()


class Sense(Enum):
    """Optimization direction."""

    MIN = auto()
    MAX = auto()


class LpStatus(Enum):
    """Terminal status of a simplex run."""

    OPTIMAL = auto()
    INFEASIBLE = auto()
    UNBOUNDED = auto()


def _as_matrix(data: ArrayLike | None, n_cols: int) -> FloatArray:
    if data is None:
        return np.zeros((0, n_cols), dtype=float)
    mat = np.asarray(data, dtype=float)
    if mat.size == 0:
        return np.zeros((0, n_cols), dtype=float)
    return np.atleast_2d(mat)


def _as_vector(data: ArrayLike | None) -> FloatArray:
    if data is None:
        return np.zeros(0, dtype=float)
    return np.atleast_1d(np.asarray(data, dtype=float)).ravel()


@dataclass(frozen=True, eq=False)
class Polyhedron:
    """
    {v | eq_matrix v = eq_rhs, ineq_matrix v <= ineq_rhs, sign restrictions}.

    Use `Polyhedron.build` to get consistently shaped (possibly empty)
    arrays; the constructor itself only checks dimensions.
    """

    eq_matrix: FloatArray
    eq_rhs: FloatArray
    ineq_matrix: FloatArray
    ineq_rhs: FloatArray
    signs: tuple[Sign, ...]

    def __post_init__(self) -> None:
        n = len(self.signs)
        if self.eq_matrix.ndim != 2 or self.ineq_matrix.ndim != 2:
            raise DimensionMismatchError("Constraint matrices must be two-dimensional")
        if self.eq_matrix.shape[1] != n or self.ineq_matrix.shape[1] != n:
            raise DimensionMismatchError(
                f"Constraint matrices have {self.eq_matrix.shape[1]} and "
                f"{self.ineq_matrix.shape[1]} columns, expected {n}"
            )
        if self.eq_rhs.shape != (self.eq_matrix.shape[0],):
            raise DimensionMismatchError("Equality right-hand side length does not match rows")
        if self.ineq_rhs.shape != (self.ineq_matrix.shape[0],):
            raise DimensionMismatchError("Inequality right-hand side length does not match rows")

    @classmethod
    def build(
        cls,
        n_vars: int,
        eq_matrix: ArrayLike | None = None,
        eq_rhs: ArrayLike | None = None,
        ineq_matrix: ArrayLike | None = None,
        ineq_rhs: ArrayLike | None = None,
        signs: Sequence[Sign] | Sign = Sign.FREE,
    ) -> "Polyhedron":
        """Create a polyhedron, normalizing missing blocks to empty arrays."""
        sign_tuple = (signs,) * n_vars if isinstance(signs, Sign) else tuple(signs)
        return cls(
            eq_matrix=_as_matrix(eq_matrix, n_vars),
            eq_rhs=_as_vector(eq_rhs),
            ineq_matrix=_as_matrix(ineq_matrix, n_vars),
            ineq_rhs=_as_vector(ineq_rhs),
            signs=sign_tuple,
        )

    @property
    def n_vars(self) -> int:
        return len(self.signs)

    @property
    def n_eq(self) -> int:
        return int(self.eq_matrix.shape[0])

    @property
    def n_ineq(self) -> int:
        return int(self.ineq_matrix.shape[0])

    def violation(self, point: ArrayLike) -> float:
        """Largest constraint violation of `point` (0.0 if feasible)."""
        v = _as_vector(point)
        if v.shape != (self.n_vars,):
            raise DimensionMismatchError(f"Point has length {v.size}, expected {self.n_vars}")
        worst = 0.0
        if self.n_eq:
            worst = max(worst, float(np.max(np.abs(self.eq_matrix @ v - self.eq_rhs))))
        if self.n_ineq:
            worst = max(worst, float(np.max(self.ineq_matrix @ v - self.ineq_rhs)))
        for value, sign in zip(v, self.signs, strict=True):
            if sign == Sign.NONNEGATIVE:
                worst = max(worst, -float(value))
            elif sign == Sign.NONPOSITIVE:
                worst = max(worst, float(value))
        return worst

    def contains(self, point: ArrayLike, tol: float) -> bool:
        """Membership test at absolute tolerance `tol`."""
        return self.violation(point) <= tol


@dataclass(frozen=True, eq=False)
class LpProblem:
    """A dense linear program: optimize objective . v over a polyhedron."""

    objective: FloatArray
    feasible_region: Polyhedron
    sense: Sense = Sense.MIN

    def __post_init__(self) -> None:
        if self.objective.shape != (self.feasible_region.n_vars,):
            raise DimensionMismatchError(
                f"Objective has length {self.objective.size}, "
                f"expected {self.feasible_region.n_vars}"
            )


@dataclass(eq=False)
class LpOutcome:
    """
    Result of `solve_lp`.

    `duals` holds one multiplier per constraint, equality rows first.
    For minimization the inequality multipliers are <= 0 and
    eq_rhs . duals_eq + ineq_rhs . duals_ineq equals `value` at optimality.
    """

    status: LpStatus
    value: float
    primal_point: FloatArray | None = None
    duals: FloatArray | None = None
    basis: tuple[int, ...] = ()
    n_eq: int = 0
    iterations: int = 0

    @property
    def is_optimal(self) -> bool:
        return self.status == LpStatus.OPTIMAL

    @property
    def eq_duals(self) -> FloatArray:
        if self.duals is None:
            return np.zeros(0)
        return self.duals[: self.n_eq]

    @property
    def ineq_duals(self) -> FloatArray:
        if self.duals is None:
            return np.zeros(0)
        return self.duals[self.n_eq :]

    def dual_value(self, problem: LpProblem) -> float:
        """Dual objective evaluated at the returned multipliers."""
        region = problem.feasible_region
        return float(region.eq_rhs @ self.eq_duals + region.ineq_rhs @ self.ineq_duals)


@dataclass(eq=False)
class VertexSet:
    """Vertices of a polyhedron together with the tight sets that define them."""

    vertices: list[FloatArray] = field(default_factory=list)
    bases: list[tuple[int, ...]] = field(default_factory=list)
    candidates_checked: int = 0

    @property
    def is_empty(self) -> bool:
        """True when the polyhedron has no vertex (empty, or contains a line)."""
        return not self.vertices

    def __len__(self) -> int:
        return len(self.vertices)

    def as_array(self) -> FloatArray:
        if not self.vertices:
            return np.zeros((0, 0))
        return np.vstack(self.vertices)
