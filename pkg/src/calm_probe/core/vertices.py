"""Vertex enumeration for small polyhedra by basis enumeration."""

import logging
import math
from itertools import combinations

import numpy as np

from calm_probe.core.config import DEFAULT_TOLERANCES, Tolerances
from calm_probe.core.exceptions import CombinatorialBlowupError
from calm_probe.core.models import FloatArray, Polyhedron, Sign, VertexSet
from calm_probe.core.rank import numerical_rank

logger = logging.getLogger(__name__)


def _bound_rows(poly: Polyhedron) -> tuple[FloatArray, FloatArray]:
    """Inequality rows followed by one row per sign restriction, all as G v <= h."""
    rows = [poly.ineq_matrix]
    rhs = [poly.ineq_rhs]
    for j, sign in enumerate(poly.signs):
        if sign == Sign.FREE:
            continue
        row = np.zeros((1, poly.n_vars))
        row[0, j] = -1.0 if sign == Sign.NONNEGATIVE else 1.0
        rows.append(row)
        rhs.append(np.zeros(1))
    return np.vstack(rows), np.concatenate(rhs)


def enumerate_vertices(poly: Polyhedron, tol: Tolerances = DEFAULT_TOLERANCES) -> VertexSet:
    """
    Enumerate the vertices (basic feasible solutions) of a polyhedron.

    Every equality row is kept tight; the remaining n - rank(E) tight
    rows are chosen from the inequality rows and the sign restrictions in
    lexicographic order. A choice defines a vertex when the stacked
    system has full column rank, is consistent, and its solution is
    feasible. Points closer than tol.vertex in max-norm are reported
    once, with the first basis found.

    An empty result means the polyhedron is empty or contains a line.

    Raises:
        CombinatorialBlowupError: If the number of candidate bases exceeds
            tol.vertex_cap.
    """
    n = poly.n_vars
    G, h = _bound_rows(poly)
    E, e = poly.eq_matrix, poly.eq_rhs
    k = n - numerical_rank(E, tol)
    if k > G.shape[0]:
        logger.debug("Polyhedron has fewer bound rows than free directions; no vertex")
        return VertexSet()

    count = math.comb(G.shape[0], k)
    if count > tol.vertex_cap:
        raise CombinatorialBlowupError(count, tol.vertex_cap)

    result = VertexSet(candidates_checked=count)
    for subset in combinations(range(G.shape[0]), k):
        system = np.vstack([E, G[list(subset)]])
        rhs = np.concatenate([e, h[list(subset)]])
        if numerical_rank(system, tol) < n:
            continue
        point, *_ = np.linalg.lstsq(system, rhs, rcond=None)
        scale = 1.0 + float(np.max(np.abs(point), initial=0.0))
        if float(np.max(np.abs(system @ point - rhs), initial=0.0)) > tol.feas * scale:
            continue
        if poly.violation(point) > tol.feas * scale:
            continue
        if any(np.max(np.abs(point - v), initial=0.0) <= tol.vertex for v in result.vertices):
            continue
        result.vertices.append(point)
        result.bases.append(tuple(subset))

    logger.debug("Checked %d bases, found %d vertices", count, len(result))
    return result
