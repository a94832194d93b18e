"""Tests for the dense LP kernel: simplex, vertex enumeration and numerical rank."""

import math

import numpy as np
import pytest

from calm_probe.core.config import RankPolicy, Tolerances
from calm_probe.core.exceptions import (
    CombinatorialBlowupError,
    DimensionMismatchError,
    NumericalBreakdownError,
)
from calm_probe.core.models import LpProblem, LpStatus, Polyhedron, Sense, Sign
from calm_probe.core.rank import numerical_rank
from calm_probe.core.simplex import solve_lp
from calm_probe.core.vertices import enumerate_vertices


def lp(objective, sense=Sense.MIN, **region):
    c = np.asarray(objective, dtype=float)
    return LpProblem(c, Polyhedron.build(c.size, **region), sense)


class TestPolyhedron:
    """Tests for Polyhedron construction and membership."""

    def test_build_normalizes_missing_blocks(self):
        poly = Polyhedron.build(3)
        assert poly.n_eq == 0
        assert poly.n_ineq == 0
        assert poly.signs == (Sign.FREE,) * 3

    def test_violation_and_contains(self):
        poly = Polyhedron.build(2, ineq_matrix=[[1, 1]], ineq_rhs=[1], signs=Sign.NONNEGATIVE)
        assert poly.contains([0.5, 0.5], 1e-12)
        assert poly.violation([1.0, 1.0]) == pytest.approx(1.0)
        assert poly.violation([-0.25, 0.0]) == pytest.approx(0.25)

    def test_column_mismatch_raises(self):
        with pytest.raises(DimensionMismatchError):
            Polyhedron.build(2, ineq_matrix=[[1, 1, 1]], ineq_rhs=[1])

    def test_objective_length_mismatch_raises(self):
        with pytest.raises(DimensionMismatchError):
            LpProblem(np.ones(3), Polyhedron.build(2))


class TestSolveLp:
    """Tests for the two-phase simplex."""

    def test_simple_minimum(self):
        outcome = solve_lp(
            lp([-1, -1], ineq_matrix=[[1, 1]], ineq_rhs=[1], signs=Sign.NONNEGATIVE)
        )
        assert outcome.status == LpStatus.OPTIMAL
        assert outcome.value == pytest.approx(-1.0)

    def test_maximization(self):
        problem = lp(
            [1, 2],
            Sense.MAX,
            ineq_matrix=[[1, 1], [0, 1]],
            ineq_rhs=[4, 3],
            signs=Sign.NONNEGATIVE,
        )
        outcome = solve_lp(problem)
        assert outcome.is_optimal
        assert outcome.value == pytest.approx(7.0)
        np.testing.assert_allclose(outcome.primal_point, [1.0, 3.0], atol=1e-10)

    def test_free_variables_with_equality(self):
        # min x1 subject to x1 + x2 = 2, x2 <= 1
        problem = lp([1, 0], eq_matrix=[[1, 1]], eq_rhs=[2], ineq_matrix=[[0, 1]], ineq_rhs=[1])
        outcome = solve_lp(problem)
        assert outcome.is_optimal
        assert outcome.value == pytest.approx(1.0)

    def test_nonpositive_variables(self):
        # min x subject to -x <= 2, x <= 0
        outcome = solve_lp(lp([1], ineq_matrix=[[-1]], ineq_rhs=[2], signs=Sign.NONPOSITIVE))
        assert outcome.value == pytest.approx(-2.0)

    def test_infeasible(self):
        outcome = solve_lp(lp([1], ineq_matrix=[[1]], ineq_rhs=[-1], signs=Sign.NONNEGATIVE))
        assert outcome.status == LpStatus.INFEASIBLE
        assert outcome.value == math.inf
        assert outcome.primal_point is None

    def test_unbounded(self):
        outcome = solve_lp(lp([-1], signs=Sign.NONNEGATIVE))
        assert outcome.status == LpStatus.UNBOUNDED
        assert outcome.value == -math.inf

    def test_unbounded_maximization(self):
        outcome = solve_lp(lp([1], Sense.MAX, signs=Sign.NONNEGATIVE))
        assert outcome.status == LpStatus.UNBOUNDED
        assert outcome.value == math.inf

    def test_degenerate_problem_terminates(self):
        # Cycles under the largest-coefficient rule; optimum -5/4 at x = (1, 0, 1, 0).
        problem = lp(
            [-0.75, 20, -0.5, 6],
            ineq_matrix=[[0.25, -8, -1, 9], [0.5, -12, -0.5, 3], [0, 0, 1, 0]],
            ineq_rhs=[0, 0, 1],
            signs=Sign.NONNEGATIVE,
        )
        outcome = solve_lp(problem)
        assert outcome.is_optimal
        assert outcome.value == pytest.approx(-1.25)

    def test_redundant_equalities(self):
        outcome = solve_lp(
            lp([1, 1], eq_matrix=[[1, 1], [2, 2]], eq_rhs=[1, 2], signs=Sign.NONNEGATIVE)
        )
        assert outcome.is_optimal
        assert outcome.value == pytest.approx(1.0)

    def test_duals_reproduce_the_optimal_value(self):
        problem = lp(
            [-1, -2],
            ineq_matrix=[[1, 1], [1, -1], [0, 1]],
            ineq_rhs=[4, 1, 3],
        )
        outcome = solve_lp(problem)
        assert outcome.is_optimal
        assert outcome.dual_value(problem) == pytest.approx(outcome.value)
        assert np.all(outcome.ineq_duals <= 1e-12)

    def test_max_duals_are_nonnegative(self):
        problem = lp([1, 1], Sense.MAX, ineq_matrix=[[1, 0], [0, 1]], ineq_rhs=[1, 2])
        outcome = solve_lp(problem)
        assert outcome.value == pytest.approx(3.0)
        assert outcome.dual_value(problem) == pytest.approx(3.0)
        assert np.all(outcome.ineq_duals >= -1e-12)

    def test_pivot_limit(self):
        problem = lp([-1, -1], ineq_matrix=np.eye(2), ineq_rhs=[1, 1], signs=Sign.NONNEGATIVE)
        with pytest.raises(NumericalBreakdownError):
            solve_lp(problem, Tolerances(max_pivots=1))


class TestEnumerateVertices:
    """Tests for basis-enumeration vertex listing."""

    def test_unit_square(self):
        square = Polyhedron.build(2, ineq_matrix=np.eye(2), ineq_rhs=[1, 1], signs=Sign.NONNEGATIVE)
        vertices = enumerate_vertices(square)
        found = {tuple(np.round(v, 9)) for v in vertices.vertices}
        assert found == {(0.0, 0.0), (1.0, 0.0), (0.0, 1.0), (1.0, 1.0)}
        assert len(vertices.bases) == 4

    def test_empty_polyhedron(self):
        poly = Polyhedron.build(1, ineq_matrix=[[1]], ineq_rhs=[-1], signs=Sign.NONNEGATIVE)
        assert enumerate_vertices(poly).is_empty

    def test_polyhedron_with_a_line_has_no_vertex(self):
        poly = Polyhedron.build(2, ineq_matrix=[[1, 0]], ineq_rhs=[1])
        assert enumerate_vertices(poly).is_empty

    def test_simplex_with_equality(self):
        poly = Polyhedron.build(3, eq_matrix=[[1, 1, 1]], eq_rhs=[1], signs=Sign.NONNEGATIVE)
        vertices = enumerate_vertices(poly)
        assert len(vertices) == 3
        for v in vertices.vertices:
            assert sorted(np.round(v, 9)) == [0.0, 0.0, 1.0]

    def test_cap_raises(self):
        square = Polyhedron.build(2, ineq_matrix=np.eye(2), ineq_rhs=[1, 1], signs=Sign.NONNEGATIVE)
        with pytest.raises(CombinatorialBlowupError) as exc:
            enumerate_vertices(square, Tolerances(vertex_cap=2))
        assert exc.value.count == 6
        assert exc.value.cap == 2


class TestOracleEquivalence:
    """solve_lp against brute-force vertex enumeration on seeded random LPs."""

    def test_random_bounded_lps(self):
        rng = np.random.default_rng(8)
        for _ in range(200):
            n = int(rng.integers(1, 5))
            k = int(rng.integers(1, 7))
            A = rng.uniform(0.1, 1.0, size=(k, n))
            b = rng.uniform(0.5, 2.0, size=k)
            c = rng.uniform(-1.0, 1.0, size=n)
            sense = Sense.MIN if rng.random() < 0.5 else Sense.MAX
            region = Polyhedron.build(n, ineq_matrix=A, ineq_rhs=b, signs=Sign.NONNEGATIVE)
            problem = LpProblem(c, region, sense)
            outcome = solve_lp(problem)
            assert outcome.is_optimal

            values = [float(c @ v) for v in enumerate_vertices(problem.feasible_region).vertices]
            best = min(values) if sense == Sense.MIN else max(values)
            assert abs(outcome.value - best) <= 1e-8 * max(1.0, abs(best))
            assert abs(outcome.dual_value(problem) - outcome.value) <= 1e-8 * max(1.0, abs(best))

    def test_free_variables_and_equalities(self):
        rng = np.random.default_rng(11)
        for _ in range(100):
            n = int(rng.integers(2, 5))
            n_eq = int(rng.integers(1, n))
            k = int(rng.integers(1, 4))
            # box rows keep the region bounded, x0 keeps it nonempty
            x0 = rng.uniform(-1.0, 1.0, size=n)
            E = rng.normal(size=(n_eq, n))
            G = np.vstack([np.eye(n), -np.eye(n), rng.normal(size=(k, n))])
            h = np.concatenate(
                [np.full(2 * n, 2.0), G[2 * n :] @ x0 + rng.uniform(0.1, 1.0, size=k)]
            )
            c = rng.normal(size=n)
            problem = lp(c, eq_matrix=E, eq_rhs=E @ x0, ineq_matrix=G, ineq_rhs=h)
            outcome = solve_lp(problem)
            assert outcome.is_optimal

            assert outcome.dual_value(problem) == pytest.approx(outcome.value, abs=1e-8)
            assert np.all(outcome.ineq_duals <= 1e-12)
            # free variables: c = E^T lambda + G^T mu
            np.testing.assert_allclose(
                E.T @ outcome.eq_duals + G.T @ outcome.ineq_duals, c, atol=1e-8
            )
            values = [float(c @ v) for v in enumerate_vertices(problem.feasible_region).vertices]
            assert outcome.value == pytest.approx(min(values), abs=1e-8)


class TestNumericalRank:
    """Tests for the numerical rank helper."""

    def test_identity(self):
        assert numerical_rank(np.eye(3)) == 3

    def test_zero_and_empty(self):
        assert numerical_rank(np.zeros((2, 3))) == 0
        assert numerical_rank(np.zeros((0, 3))) == 0

    def test_outer_product(self):
        u = np.array([[1.0], [2.0], [3.0]])
        assert numerical_rank(u @ u.T) == 1

    def test_perturbation_below_threshold(self):
        mat = np.array([[1.0, 2.0], [2.0, 4.0 + 1e-13]])
        assert numerical_rank(mat) == 1

    def test_svd_policy_agrees(self):
        rng = np.random.default_rng(3)
        mat = rng.normal(size=(4, 2)) @ rng.normal(size=(2, 5))
        assert numerical_rank(mat, policy=RankPolicy.SVD) == 2
        assert numerical_rank(mat, policy=RankPolicy.ECHELON) == 2

    @pytest.mark.parametrize("factor", [1e-6, 1e-3, 7.0, 1e6])
    def test_scale_invariant(self, factor):
        rng = np.random.default_rng(12)
        for rank in range(4):
            mat = rng.normal(size=(4, rank)) @ rng.normal(size=(rank, 5))
            for policy in RankPolicy:
                assert numerical_rank(factor * mat, policy=policy) == rank
                assert numerical_rank(mat, policy=policy) == rank
