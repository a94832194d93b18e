"""Lower-level value function, solution faces and max-norm distances."""

import logging

import numpy as np
from numpy.typing import ArrayLike

from calm_probe.analysis.results import (
    DistanceCertificate,
    DomainReport,
    PhiStatus,
    PhiValue,
    SolutionFace,
)
from calm_probe.core.config import DEFAULT_SEED, DEFAULT_TOLERANCES, Tolerances
from calm_probe.core.exceptions import NumericalBreakdownError, PhiNotFiniteError
from calm_probe.core.models import (
    FloatArray,
    LpProblem,
    LpStatus,
    Polyhedron,
    Sense,
    Sign,
)
from calm_probe.core.simplex import solve_lp
from calm_probe.model.bilevel import BilevelModel, instantiate

logger = logging.getLogger(__name__)

_STATUS_TO_PHI = {
    LpStatus.OPTIMAL: PhiStatus.FINITE,
    LpStatus.INFEASIBLE: PhiStatus.PLUS_INFINITY,
    LpStatus.UNBOUNDED: PhiStatus.MINUS_INFINITY,
}


def _vector(values: ArrayLike) -> FloatArray:
    return np.atleast_1d(np.asarray(values, dtype=float)).ravel()


def lower_level_lp(c: FloatArray, A: FloatArray, B: FloatArray) -> LpProblem:
    """min c.y subject to B y <= -A, y free."""
    return LpProblem(c, Polyhedron.build(c.size, ineq_matrix=B, ineq_rhs=-A))


def phi_from_data(
    c: FloatArray, A: FloatArray, B: FloatArray, tol: Tolerances = DEFAULT_TOLERANCES
) -> PhiValue:
    outcome = solve_lp(lower_level_lp(c, A, B), tol)
    status = _STATUS_TO_PHI[outcome.status]
    return PhiValue(status, outcome.value if status == PhiStatus.FINITE else None)


def phi(model: BilevelModel, x: ArrayLike, tol: Tolerances = DEFAULT_TOLERANCES) -> PhiValue:
    """
    Optimal value of the lower level at x.

    Returns PlusInfinity when the lower-level feasible set is empty and
    MinusInfinity when the lower level is unbounded.
    """
    c, A, B = instantiate(model, x)
    return phi_from_data(c, A, B, tol)


def _finite_phi(model: BilevelModel, x: ArrayLike, tol: Tolerances) -> float:
    value = phi(model, x, tol)
    if not value.is_finite:
        raise PhiNotFiniteError(f"phi({list(_vector(x))}) = {value.status.value}")
    assert value.value is not None
    return value.value


def solution_face(
    model: BilevelModel, x: ArrayLike, tol: Tolerances = DEFAULT_TOLERANCES
) -> SolutionFace:
    """
    S(x) as a polyhedron over y.

    Raises:
        PhiNotFiniteError: If phi(x) is not finite.
    """
    xv = _vector(x)
    value = _finite_phi(model, xv, tol)
    c, A, B = instantiate(model, xv)
    face = Polyhedron.build(
        model.m, eq_matrix=c.reshape(1, -1), eq_rhs=[value], ineq_matrix=B, ineq_rhs=-A
    )
    return SolutionFace(base_x=xv, phi=value, face=face)


def distance_dual_region(c: FloatArray, B: FloatArray) -> Polyhedron:
    """
    Feasible set of the distance dual, over (xi1, xi2, xi3, xi4):

        xi1 - xi2 + c xi3 + B^T xi4 = 0,  -e.xi1 - e.xi2 = 1,  xi <= 0.
    """
    m, q = c.size, B.shape[0]
    coupling = np.hstack([np.eye(m), -np.eye(m), c.reshape(-1, 1), B.T])
    normalization = np.concatenate([-np.ones(2 * m), np.zeros(1 + q)]).reshape(1, -1)
    return Polyhedron.build(
        2 * m + 1 + q,
        eq_matrix=np.vstack([coupling, normalization]),
        eq_rhs=np.concatenate([np.zeros(m), [1.0]]),
        signs=Sign.NONPOSITIVE,
    )


def _distance_primal(
    c: FloatArray, A: FloatArray, B: FloatArray, y: FloatArray, bound: float
) -> LpProblem:
    """min sigma over (sigma, z): |z - y| <= sigma e, c.z <= bound, B z <= -A."""
    m, q = c.size, B.shape[0]
    ones = np.ones((m, 1))
    rows = np.vstack(
        [
            np.hstack([-ones, np.eye(m)]),
            np.hstack([-ones, -np.eye(m)]),
            np.concatenate([[0.0], c]).reshape(1, -1),
            np.hstack([np.zeros((q, 1)), B]),
        ]
    )
    rhs = np.concatenate([y, -y, [bound], -A])
    objective = np.zeros(m + 1)
    objective[0] = 1.0
    return LpProblem(objective, Polyhedron.build(m + 1, ineq_matrix=rows, ineq_rhs=rhs))


def _distance_dual(
    c: FloatArray, A: FloatArray, B: FloatArray, y: FloatArray, bound: float
) -> LpProblem:
    """max y.(xi1 - xi2) + bound xi3 - A.xi4 over the distance dual region."""
    objective = np.concatenate([y, -y, [bound], -A])
    return LpProblem(objective, distance_dual_region(c, B), Sense.MAX)


def distance_from_data(
    c: FloatArray,
    A: FloatArray,
    B: FloatArray,
    phi_value: float,
    y: ArrayLike,
    tol: Tolerances = DEFAULT_TOLERANCES,
) -> DistanceCertificate:
    """
    Max-norm distance from y to argmin{c.z | A + B z <= 0}, given its optimal value.

    The objective row c.z <= phi is scaled to unit max-norm and then
    relaxed by tol.feas, so the face does not grow when c(x) is small.
    The primal and the dual LP are solved independently and must agree;
    xi3 is reported for the unscaled row.

    Raises:
        NumericalBreakdownError: If either LP fails or the two values disagree.
    """
    yv = _vector(y)
    m, q = c.size, B.shape[0]
    scale = float(np.max(np.abs(c))) if c.size else 0.0
    scale = scale if scale > 0.0 else 1.0
    bound = phi_value / scale + tol.feas
    primal = solve_lp(_distance_primal(c / scale, A, B, yv, bound), tol)
    dual = solve_lp(_distance_dual(c / scale, A, B, yv, bound), tol)
    if not primal.is_optimal or not dual.is_optimal:
        raise NumericalBreakdownError(
            f"Distance LPs ended {primal.status.name}/{dual.status.name}"
        )
    assert primal.primal_point is not None and dual.primal_point is not None

    sigma = max(0.0, primal.value)
    if abs(primal.value - dual.value) > tol.dual * max(1.0, abs(primal.value)):
        raise NumericalBreakdownError(
            f"Distance primal {primal.value:.12g} and dual {dual.value:.12g} disagree"
        )
    xi = dual.primal_point
    return DistanceCertificate(
        sigma=sigma,
        z=primal.primal_point[1:],
        primal_value=primal.value,
        dual_value=dual.value,
        xi1=xi[:m],
        xi2=xi[m : 2 * m],
        xi3=float(xi[2 * m]) / scale,
        xi4=xi[2 * m + 1 : 2 * m + 1 + q],
        slack_u=float(c @ yv) - phi_value,
        dual_basis=dual.basis,
    )


def dist_to_solutions(
    model: BilevelModel,
    x: ArrayLike,
    y: ArrayLike,
    tol: Tolerances = DEFAULT_TOLERANCES,
    phi_value: PhiValue | None = None,
) -> DistanceCertificate:
    """
    dist(y, S(x)) in the max-norm, with primal and dual certificates.

    y does not need to be lower-level feasible.

    Raises:
        PhiNotFiniteError: If phi(x) is not finite.
        NumericalBreakdownError: If the primal and dual LPs disagree.
    """
    xv = _vector(x)
    if phi_value is None:
        value = _finite_phi(model, xv, tol)
    elif not phi_value.is_finite or phi_value.value is None:
        raise PhiNotFiniteError(f"phi({list(xv)}) = {phi_value.status.value}")
    else:
        value = phi_value.value
    c, A, B = instantiate(model, xv)
    return distance_from_data(c, A, B, value, y, tol)


def domain_coincidence_probe(
    model: BilevelModel,
    center_x: ArrayLike,
    radius: float,
    samples: int = 200,
    seed: int = DEFAULT_SEED,
    tol: Tolerances = DEFAULT_TOLERANCES,
) -> DomainReport:
    """
    Compare where the lower level is feasible with where it has solutions.

    Parameters are drawn uniformly from the max-norm ball around center_x
    and classified by the lower-level LP status. The domains coincide on
    the sample when no parameter has an unbounded lower level.
    """
    xv = _vector(center_x)
    rng = np.random.default_rng(seed)
    report = DomainReport(center_x=xv, radius=radius)
    points = [xv, *(xv + radius * rng.uniform(-1.0, 1.0, size=(samples, model.n)))]
    for point in points:
        status = phi(model, point, tol).status
        if status == PhiStatus.FINITE:
            report.finite += 1
        elif status == PhiStatus.PLUS_INFINITY:
            report.infeasible += 1
        else:
            report.unbounded += 1
            if report.witness_x is None:
                report.witness_x = point
    logger.debug(
        "Domain probe: %d finite, %d infeasible, %d unbounded",
        report.finite,
        report.infeasible,
        report.unbounded,
    )
    return report
