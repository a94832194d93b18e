"""Two-phase primal simplex with Bland's anti-cycling rule."""

import logging
from dataclasses import dataclass

import numpy as np

from calm_probe.core.config import DEFAULT_TOLERANCES, Tolerances
from calm_probe.core.exceptions import NumericalBreakdownError
from calm_probe.core.models import (
    FloatArray,
    LpOutcome,
    LpProblem,
    LpStatus,
    Sense,
    Sign,
)

logger = logging.getLogger(__name__)


@dataclass
class _StandardForm:
    """min c.v s.t. A v = b, v >= 0, b >= 0, plus the map back to the caller's variables."""

    A: FloatArray
    b: FloatArray
    c: FloatArray
    columns: list[tuple[int, float]]  # structural column -> (original variable, +-1)
    row_flip: FloatArray
    n_struct: int


def _standard_form(problem: LpProblem) -> _StandardForm:
    """
    Bring the problem into standard form.

    Free variables are split into a positive and a negative part,
    nonpositive variables are negated, and every inequality row gets
    its own slack column. Rows with a negative right-hand side are
    multiplied by -1 so that b >= 0.
    """
    region = problem.feasible_region
    columns: list[tuple[int, float]] = []
    for j, sign in enumerate(region.signs):
        if sign == Sign.NONNEGATIVE:
            columns.append((j, 1.0))
        elif sign == Sign.NONPOSITIVE:
            columns.append((j, -1.0))
        else:
            columns.append((j, 1.0))
            columns.append((j, -1.0))

    rows = np.vstack([region.eq_matrix, region.ineq_matrix])
    n_rows = rows.shape[0]
    struct = np.zeros((n_rows, len(columns)))
    for k, (j, mult) in enumerate(columns):
        struct[:, k] = mult * rows[:, j]
    slack = np.zeros((n_rows, region.n_ineq))
    for i in range(region.n_ineq):
        slack[region.n_eq + i, i] = 1.0

    A = np.hstack([struct, slack])
    b = np.concatenate([region.eq_rhs, region.ineq_rhs])
    objective = problem.objective if problem.sense == Sense.MIN else -problem.objective
    c = np.concatenate(
        [np.array([mult * objective[j] for j, mult in columns]), np.zeros(region.n_ineq)]
    )

    row_flip = np.where(b < 0, -1.0, 1.0)
    A = A * row_flip[:, None]
    b = b * row_flip
    return _StandardForm(A=A, b=b, c=c, columns=columns, row_flip=row_flip, n_struct=len(columns))


class _Tableau:
    """
    Dense simplex tableau.

    Rows 0..m-1 hold B^-1 [A | b]; the last row holds the reduced costs
    and minus the current objective value.
    """

    def __init__(self, M: FloatArray, basis: list[int], tol: Tolerances):
        self.M = M
        self.basis = basis
        self.tol = tol
        self.iterations = 0

    @property
    def n_rows(self) -> int:
        return self.M.shape[0] - 1

    @property
    def value(self) -> float:
        return float(-self.M[-1, -1])

    def pivot(self, row: int, column: int) -> None:
        self.M[row] /= self.M[row, column]
        for i in range(self.M.shape[0]):
            if i != row and self.M[i, column] != 0.0:
                self.M[i] -= self.M[i, column] * self.M[row]
        self.basis[row] = column

    def _entering(self, allowed: int) -> int | None:
        # Bland: smallest eligible index with negative reduced cost
        in_basis = set(self.basis)
        for j in range(allowed):
            if j not in in_basis and self.M[-1, j] < -self.tol.feas:
                return j
        return None

    def _leaving(self, column: int) -> int | None:
        best_row: int | None = None
        best_ratio = np.inf
        for i in range(self.n_rows):
            entry = self.M[i, column]
            if entry <= self.tol.pivot:
                continue
            ratio = self.M[i, -1] / entry
            tie = abs(ratio - best_ratio) <= 1e-12 * (1.0 + abs(best_ratio))
            if best_row is None or (ratio < best_ratio and not tie):
                best_row, best_ratio = i, ratio
            elif tie and self.basis[i] < self.basis[best_row]:
                best_row, best_ratio = i, min(ratio, best_ratio)
        return best_row

    def run(self, allowed: int) -> LpStatus:
        """Pivot until optimal or unbounded, considering columns < `allowed`."""
        while (column := self._entering(allowed)) is not None:
            row = self._leaving(column)
            if row is None:
                return LpStatus.UNBOUNDED
            self.pivot(row, column)
            self.iterations += 1
            if self.iterations > self.tol.max_pivots:
                raise NumericalBreakdownError(
                    f"Simplex exceeded {self.tol.max_pivots} pivots without terminating"
                )
        return LpStatus.OPTIMAL


def _phase_one(form: _StandardForm, tol: Tolerances) -> tuple[_Tableau, list[int]] | None:
    """
    Find a feasible basis with artificial variables.

    Returns the tableau restricted to non-redundant rows together with
    the indices of the kept rows, or None if the problem is infeasible.
    """
    m, N = form.A.shape
    M = np.zeros((m + 1, N + m + 1))
    M[:m, :N] = form.A
    M[:m, N : N + m] = np.eye(m)
    M[:m, -1] = form.b
    M[-1, :N] = -form.A.sum(axis=0)
    M[-1, -1] = -form.b.sum()
    tableau = _Tableau(M, [N + i for i in range(m)], tol)
    tableau.run(N + m)

    scale = max(1.0, float(np.max(form.b))) if m else 1.0
    if tableau.value > tol.feas * scale:
        logger.debug("Phase one ended with infeasibility %.3e", tableau.value)
        return None

    # Drive remaining artificials out of the basis; rows where that fails are redundant.
    redundant: list[int] = []
    for row in range(m):
        if tableau.basis[row] < N:
            continue
        candidates = np.nonzero(np.abs(tableau.M[row, :N]) > tol.pivot)[0]
        free = [int(j) for j in candidates if int(j) not in tableau.basis]
        if free:
            tableau.pivot(row, free[0])
        else:
            redundant.append(row)

    kept = [i for i in range(m) if i not in redundant]
    basis = [tableau.basis[i] for i in kept]
    body = tableau.M[kept][:, list(range(N)) + [N + m]]
    M2 = np.zeros((len(kept) + 1, N + 1))
    M2[:-1] = body
    c_B = form.c[basis]
    M2[-1, :N] = form.c - c_B @ body[:, :N]
    M2[-1, -1] = -float(c_B @ body[:, -1])
    phase_two = _Tableau(M2, basis, tol)
    phase_two.iterations = tableau.iterations
    # Original row indices of the kept tableau rows (pivoting never reorders rows).
    return phase_two, kept


def solve_lp(problem: LpProblem, tol: Tolerances = DEFAULT_TOLERANCES) -> LpOutcome:
    """
    Solve a dense LP with the two-phase primal simplex method.

    Bland's rule is used for both the entering and the leaving variable,
    which guarantees termination. On optimality the primal point and the
    constraint multipliers are recomputed from the final basis by direct
    solves, which keeps residuals at the level of the basis conditioning.

    Args:
        problem: The LP to solve.
        tol: Tolerances (feasibility, pivot threshold, pivot cap).

    Returns:
        LpOutcome with status, value, and on optimality the primal point,
        duals and the standard-form basis.

    Raises:
        NumericalBreakdownError: If the pivot cap is exceeded or the final
            basis matrix is singular.
    """
    region = problem.feasible_region
    unbounded_value = -np.inf if problem.sense == Sense.MIN else np.inf

    if region.n_vars == 0:
        feasible = region.contains(np.zeros(0), tol.feas)
        return LpOutcome(
            status=LpStatus.OPTIMAL if feasible else LpStatus.INFEASIBLE,
            value=0.0 if feasible else -unbounded_value,
            primal_point=np.zeros(0) if feasible else None,
            duals=np.zeros(region.n_eq + region.n_ineq) if feasible else None,
            n_eq=region.n_eq,
        )

    form = _standard_form(problem)
    found = _phase_one(form, tol)
    if found is None:
        return LpOutcome(status=LpStatus.INFEASIBLE, value=-unbounded_value, n_eq=region.n_eq)
    tableau, kept = found

    status = tableau.run(form.A.shape[1])
    if status == LpStatus.UNBOUNDED:
        logger.debug("LP unbounded after %d pivots", tableau.iterations)
        return LpOutcome(
            status=LpStatus.UNBOUNDED,
            value=unbounded_value,
            n_eq=region.n_eq,
            iterations=tableau.iterations,
        )

    basis = list(tableau.basis)
    x_std = np.zeros(form.A.shape[1])
    y_flipped = np.zeros(form.A.shape[0])
    if basis:
        B = form.A[kept][:, basis]
        try:
            x_std[basis] = np.linalg.solve(B, form.b[kept])
            y_flipped[kept] = np.linalg.solve(B.T, form.c[basis])
        except np.linalg.LinAlgError as e:
            raise NumericalBreakdownError("Final simplex basis is singular") from e

    point = np.zeros(region.n_vars)
    for k, (j, mult) in enumerate(form.columns):
        point[j] += mult * x_std[k]

    duals = form.row_flip * y_flipped
    if problem.sense == Sense.MAX:
        duals = -duals

    value = float(problem.objective @ point)
    logger.debug("LP optimal after %d pivots, value %.12g", tableau.iterations, value)
    return LpOutcome(
        status=LpStatus.OPTIMAL,
        value=value,
        primal_point=point,
        duals=duals,
        basis=tuple(sorted(basis)),
        n_eq=region.n_eq,
        iterations=tableau.iterations,
    )
