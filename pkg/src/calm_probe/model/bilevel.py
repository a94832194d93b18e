"""Bilevel model with a parametric linear lower level."""

import logging
from collections.abc import Sequence
from dataclasses import dataclass, field
from enum import Enum
from typing import Any

import numpy as np
from numpy.typing import ArrayLike

from calm_probe.core.config import DEFAULT_TOLERANCES, Tolerances
from calm_probe.core.exceptions import DimensionError, FormNotSupportedError
from calm_probe.core.models import FloatArray
from calm_probe.model.poly import Poly

logger = logging.getLogger(__name__)


def x_names(n: int) -> list[str]:
    return [f"x{i + 1}" for i in range(n)]


def y_names(m: int) -> list[str]:
    return [f"y{i + 1}" for i in range(m)]


class FormTag(Enum):
    """Structural class of the lower level, most specific last."""

    LINEAR_IN_Y = "linear-in-y"  # c(x), A(x), B(x) arbitrary polynomials
    OBJECTIVE_PERTURBED = "objective-perturbed"  # A, B constant, c affine
    RHS_PERTURBED = "rhs-perturbed"  # c, B constant
    FULLY_LINEAR = "fully-linear"  # c, B constant, A affine

    @property
    def fixed_coefficients(self) -> bool:
        """True when c and B do not depend on x."""
        return self in (FormTag.RHS_PERTURBED, FormTag.FULLY_LINEAR)

    def admits(self, c: Sequence[Poly], A: Sequence[Poly], B: Sequence[Sequence[Poly]]) -> bool:
        """Whether lower-level data with these entries belongs to this form."""
        b_const = all(p.is_constant for row in B for p in row)
        if self == FormTag.LINEAR_IN_Y:
            return True
        if self == FormTag.OBJECTIVE_PERTURBED:
            return b_const and all(p.is_constant for p in A) and all(p.is_affine() for p in c)
        if self == FormTag.RHS_PERTURBED:
            return b_const and all(p.is_constant for p in c)
        return b_const and all(p.is_constant for p in c) and all(p.is_affine() for p in A)


def infer_form(c: Sequence[Poly], A: Sequence[Poly], B: Sequence[Sequence[Poly]]) -> FormTag:
    """Most specific form that admits the data."""
    for tag in (FormTag.FULLY_LINEAR, FormTag.RHS_PERTURBED, FormTag.OBJECTIVE_PERTURBED):
        if tag.admits(c, A, B):
            return tag
    return FormTag.LINEAR_IN_Y


class Relation(Enum):
    LE = "<="
    EQ = "="


@dataclass(frozen=True)
class UpperConstraint:
    """One defining constraint of X: poly(x) <= 0 or poly(x) = 0."""

    poly: Poly
    relation: Relation

    def violation(self, env: dict[str, float]) -> float:
        value = self.poly.evaluate(env)
        return abs(value) if self.relation == Relation.EQ else max(0.0, value)


@dataclass(frozen=True, eq=False)
class Point:
    """A pair (x, y) of upper- and lower-level variables."""

    x: FloatArray
    y: FloatArray

    @classmethod
    def of(cls, x: ArrayLike, y: ArrayLike) -> "Point":
        return cls(
            np.atleast_1d(np.asarray(x, dtype=float)).ravel(),
            np.atleast_1d(np.asarray(y, dtype=float)).ravel(),
        )

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Point):
            return NotImplemented
        return bool(np.array_equal(self.x, other.x) and np.array_equal(self.y, other.y))

    def __hash__(self) -> int:
        return hash((tuple(self.x.tolist()), tuple(self.y.tolist())))

    def to_dict(self) -> dict[str, list[float]]:
        return {"x": [float(v) for v in self.x], "y": [float(v) for v in self.y]}

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "Point":
        return cls.of(data["x"], data["y"])


@dataclass(frozen=True)
class ParametricPath:
    """A curve t -> (x(t), y(t)) with the decreasing t values it is evaluated at."""

    x_path: tuple[Poly, ...]
    y_path: tuple[Poly, ...]
    t_schedule: tuple[float, ...]

    def __post_init__(self) -> None:
        for p in (*self.x_path, *self.y_path):
            if p.variables - {"t"}:
                raise DimensionError("Path components may only depend on t")
        ts = self.t_schedule
        if not ts or any(t <= 0 for t in ts):
            raise DimensionError("Path schedule must be a nonempty list of positive t values")
        if any(b >= a for a, b in zip(ts, ts[1:], strict=False)):
            raise DimensionError("Path schedule must be strictly decreasing")

    @classmethod
    def create(
        cls, x_path: Sequence[Poly], y_path: Sequence[Poly], t_schedule: Sequence[float]
    ) -> "ParametricPath":
        return cls(tuple(x_path), tuple(y_path), tuple(float(t) for t in t_schedule))


@dataclass(frozen=True)
class BilevelModel:
    """
    min F(x, y) over x in X, y in S(x), where
    S(x) = argmin_y { c(x).y | A(x) + B(x) y <= 0 }.

    Use `BilevelModel.create`, which checks shapes and resolves the form tag.
    """

    n: int
    m: int
    q: int
    upper_objective: Poly
    upper_constraints: tuple[UpperConstraint, ...]
    ll_objective: tuple[Poly, ...]
    ll_A: tuple[Poly, ...]
    ll_B: tuple[tuple[Poly, ...], ...]
    form_tag: FormTag
    candidate: Point | None = None
    paths: tuple[ParametricPath, ...] = ()
    name: str = field(default="", compare=False)

    @classmethod
    def create(
        cls,
        n: int,
        m: int,
        q: int,
        upper_objective: Poly,
        upper_constraints: Sequence[UpperConstraint],
        ll_objective: Sequence[Poly],
        ll_A: Sequence[Poly],
        ll_B: Sequence[Sequence[Poly]],
        form_tag: FormTag | None = None,
        candidate: Point | None = None,
        paths: Sequence[ParametricPath] = (),
        name: str = "",
    ) -> "BilevelModel":
        """
        Build a validated model.

        Raises:
            DimensionError: For inconsistent shapes or variables outside
                the allowed set of an entry.
            FormNotSupportedError: If `form_tag` is given but the data does
                not have that structure.
        """
        if q < 1:
            raise DimensionError("The lower level needs at least one constraint (q = 0)")
        if len(ll_objective) != m or len(ll_A) != q:
            raise DimensionError(f"Expected {m} objective and {q} constraint entries")
        if len(ll_B) != q or any(len(row) != m for row in ll_B):
            raise DimensionError(f"B must be {q} x {m}")

        xs, ys = set(x_names(n)), set(y_names(m))
        lower = [*ll_objective, *ll_A, *(p for row in ll_B for p in row)]
        if any(p.variables - xs for p in lower):
            raise DimensionError("Lower-level coefficients may only depend on x")
        if any(c.poly.variables - xs for c in upper_constraints):
            raise DimensionError("Upper-level constraints may only depend on x")
        if upper_objective.variables - xs - ys:
            raise DimensionError("F may only depend on x and y")
        if candidate is not None and (candidate.x.size != n or candidate.y.size != m):
            raise DimensionError("Candidate dimensions do not match the model")
        for path in paths:
            if len(path.x_path) != n or len(path.y_path) != m:
                raise DimensionError("Path dimensions do not match the model")

        inferred = infer_form(ll_objective, ll_A, ll_B)
        if form_tag is not None and not form_tag.admits(ll_objective, ll_A, ll_B):
            raise FormNotSupportedError(
                f"Model declares form {form_tag.value} but its data is {inferred.value}"
            )
        return cls(
            n=n,
            m=m,
            q=q,
            upper_objective=upper_objective,
            upper_constraints=tuple(upper_constraints),
            ll_objective=tuple(ll_objective),
            ll_A=tuple(ll_A),
            ll_B=tuple(tuple(row) for row in ll_B),
            form_tag=form_tag or inferred,
            candidate=candidate,
            paths=tuple(paths),
            name=name,
        )

    def with_candidate(self, candidate: Point) -> "BilevelModel":
        if candidate.x.size != self.n or candidate.y.size != self.m:
            raise DimensionError("Candidate dimensions do not match the model")
        return BilevelModel(
            n=self.n,
            m=self.m,
            q=self.q,
            upper_objective=self.upper_objective,
            upper_constraints=self.upper_constraints,
            ll_objective=self.ll_objective,
            ll_A=self.ll_A,
            ll_B=self.ll_B,
            form_tag=self.form_tag,
            candidate=candidate,
            paths=self.paths,
            name=self.name,
        )

    def summary(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "n": self.n,
            "m": self.m,
            "q": self.q,
            "form": self.form_tag.value,
            "F": self.upper_objective.to_str(),
            "c": [p.to_str() for p in self.ll_objective],
            "A": [p.to_str() for p in self.ll_A],
            "B": [[p.to_str() for p in row] for row in self.ll_B],
        }


def _env(model: BilevelModel, x: ArrayLike, y: ArrayLike | None = None) -> dict[str, float]:
    xv = np.atleast_1d(np.asarray(x, dtype=float)).ravel()
    if xv.size != model.n:
        raise DimensionError(f"x has length {xv.size}, expected {model.n}")
    env = dict(zip(x_names(model.n), (float(v) for v in xv), strict=True))
    if y is not None:
        yv = np.atleast_1d(np.asarray(y, dtype=float)).ravel()
        if yv.size != model.m:
            raise DimensionError(f"y has length {yv.size}, expected {model.m}")
        env.update(zip(y_names(model.m), (float(v) for v in yv), strict=True))
    return env


def instantiate(model: BilevelModel, x: ArrayLike) -> tuple[FloatArray, FloatArray, FloatArray]:
    """Evaluate (c(x), A(x), B(x))."""
    env = _env(model, x)
    c = np.array([p.evaluate(env) for p in model.ll_objective])
    A = np.array([p.evaluate(env) for p in model.ll_A])
    B = np.array([[p.evaluate(env) for p in row] for row in model.ll_B]).reshape(model.q, model.m)
    return c, A, B


def lower_constraints(model: BilevelModel, x: ArrayLike, y: ArrayLike) -> FloatArray:
    """g(x, y) = A(x) + B(x) y."""
    _, A, B = instantiate(model, x)
    return A + B @ np.atleast_1d(np.asarray(y, dtype=float))


def lower_feasible(
    model: BilevelModel, x: ArrayLike, y: ArrayLike, tol: Tolerances = DEFAULT_TOLERANCES
) -> bool:
    return bool(np.max(lower_constraints(model, x, y)) <= tol.feas)


def upper_violation(model: BilevelModel, x: ArrayLike) -> float:
    env = _env(model, x)
    return max((c.violation(env) for c in model.upper_constraints), default=0.0)


def upper_feasible(model: BilevelModel, x: ArrayLike, tol: Tolerances = DEFAULT_TOLERANCES) -> bool:
    """Whether x lies in X at tolerance tol.feas."""
    return upper_violation(model, x) <= tol.feas


def eval_F(model: BilevelModel, point: Point) -> float:
    """Upper-level objective F(x, y)."""
    return model.upper_objective.evaluate(_env(model, point.x, point.y))


def upper_y_slope(model: BilevelModel, point: Point) -> float:
    """Sum of |dF/dy_j| at the point."""
    env = _env(model, point.x, point.y)
    return sum(abs(model.upper_objective.derivative(v).evaluate(env)) for v in y_names(model.m))


def eval_f(model: BilevelModel, point: Point) -> float:
    """Lower-level objective f(x, y) = c(x).y."""
    c, _, _ = instantiate(model, point.x)
    return float(c @ point.y)


def eval_path(path: ParametricPath, t: float) -> Point:
    """Point on the path at parameter t."""
    env = {"t": float(t)}
    return Point.of(
        [p.evaluate(env) for p in path.x_path],
        [p.evaluate(env) for p in path.y_path],
    )


def project_to_upper(
    model: BilevelModel,
    x: ArrayLike,
    tol: Tolerances = DEFAULT_TOLERANCES,
    max_iterations: int = 50,
) -> FloatArray | None:
    """
    Move x onto the equality constraints of X with Gauss-Newton steps.

    The polynomial Jacobian is exact. Returns None when the iteration
    does not reach tol.feas or the result violates an inequality of X.
    """
    point = np.atleast_1d(np.asarray(x, dtype=float)).ravel().copy()
    names = x_names(model.n)
    equalities = [c.poly for c in model.upper_constraints if c.relation == Relation.EQ]
    if equalities:
        jacobian = [[p.derivative(v) for v in names] for p in equalities]
        for _ in range(max_iterations):
            env = _env(model, point)
            residual = np.array([p.evaluate(env) for p in equalities])
            if float(np.max(np.abs(residual))) <= tol.feas:
                break
            J = np.array([[d.evaluate(env) for d in row] for row in jacobian])
            step, *_ = np.linalg.lstsq(J, -residual, rcond=None)
            point = point + step
        else:
            env = _env(model, point)
            if max(abs(p.evaluate(env)) for p in equalities) > tol.feas:
                logger.debug("Projection onto X did not converge from %s", x)
                return None
    if not upper_feasible(model, point, tol):
        return None
    return point
