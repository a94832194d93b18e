"""Tests for the lower-level value function, distances, trends and sampling."""

import math
from itertools import islice

import numpy as np
import pytest

from calm_probe.analysis.results import DomainVerdict, PhiStatus, Trend
from calm_probe.analysis.sampling import BoundaryMode, UnitDraws, ball_points
from calm_probe.analysis.trend import classify_trend, is_nondecreasing
from calm_probe.analysis.value_function import (
    dist_to_solutions,
    distance_dual_region,
    distance_from_data,
    domain_coincidence_probe,
    phi,
    solution_face,
)
from calm_probe.core.exceptions import PhiNotFiniteError
from calm_probe.core.models import LpProblem, Polyhedron, Sign
from calm_probe.core.simplex import solve_lp
from calm_probe.model.bilevel import (
    BilevelModel,
    Point,
    instantiate,
    lower_feasible,
    upper_feasible,
)
from calm_probe.model.builtins import random_fully_linear
from calm_probe.model.parser import parse_model
from calm_probe.model.poly import ZERO, Poly
from tests.conftest import UNBOUNDED_MODEL


@pytest.fixture
def half_line_model() -> BilevelModel:
    """min y over y >= 0 subject to x <= 0: phi = 0 for x <= 0 and +inf otherwise."""
    one = Poly.constant(1.0)
    return BilevelModel.create(
        n=1,
        m=1,
        q=2,
        upper_objective=ZERO,
        upper_constraints=[],
        ll_objective=[one],
        ll_A=[Poly.variable("x1"), ZERO],
        ll_B=[[ZERO], [-one]],
    )


def interval_distance(y: float, lo: float, hi: float) -> float:
    return max(lo - y, 0.0, y - hi)


def split_distance(c, A, B, bound: float, y) -> float:
    """
    Max-norm distance with z = y + p - n, p, n >= 0 and p_i + n_i <= s.

    Variables are (p, n, s); the face row is c.z <= bound.
    """
    m, q = c.size, B.shape[0]
    eye, ones = np.eye(m), np.ones((m, 1))
    rows = np.vstack(
        [
            np.hstack([eye, eye, -ones]),
            np.hstack([B, -B, np.zeros((q, 1))]),
            np.concatenate([c, -c, [0.0]]).reshape(1, -1),
        ]
    )
    rhs = np.concatenate([np.zeros(m), -A - B @ y, [bound - float(c @ y)]])
    objective = np.concatenate([np.zeros(2 * m), [1.0]])
    region = Polyhedron.build(2 * m + 1, ineq_matrix=rows, ineq_rhs=rhs, signs=Sign.NONNEGATIVE)
    outcome = solve_lp(LpProblem(objective, region))
    assert outcome.is_optimal
    return outcome.value


def face_scale(c) -> float:
    return float(np.max(np.abs(c))) or 1.0


def in_solution_map_4_4(x: float, y) -> bool:
    if x == 0.0:
        return y[1] <= 0.0
    return y[1] == 0.0 and x * y[0] >= 0.0


def in_solution_map_4_5(x1: float, y: float) -> bool:
    if x1 == 0.0:
        return -1.0 <= y <= 1.0
    return y == (-1.0 if x1 > 0.0 else 1.0)


class TestPhi:
    """Tests for phi against closed forms."""

    def test_example_4_2(self, example_4_2):
        for x in np.linspace(-2.0, 2.0, 101):
            value = phi(example_4_2, [x])
            assert value.status == PhiStatus.FINITE
            assert value.value == pytest.approx(-(x**2), abs=1e-12)

    def test_example_4_4(self, example_4_4):
        for x in np.linspace(-2.0, 2.0, 101):
            assert phi(example_4_4, [x]).value == pytest.approx(0.0, abs=1e-12)

    def test_example_4_5(self, example_4_5):
        rng = np.random.default_rng(5)
        for x in rng.uniform(-2.0, 2.0, size=(101, 2)):
            assert phi(example_4_5, x).value == pytest.approx(-abs(x[0]), abs=1e-12)

    def test_unbounded(self):
        value = phi(parse_model(UNBOUNDED_MODEL), [0.3])
        assert value.status == PhiStatus.MINUS_INFINITY
        assert value.value is None
        assert value.as_float() == -math.inf

    def test_infeasible(self, half_line_model):
        assert phi(half_line_model, [-1.0]).value == pytest.approx(0.0)
        value = phi(half_line_model, [1.0])
        assert value.status == PhiStatus.PLUS_INFINITY
        assert value.as_float() == math.inf
        assert value.to_dict() == {"status": "+inf", "value": None}

    @pytest.mark.parametrize("fixture", ["example_4_2", "example_4_4", "example_4_5"])
    def test_lower_bound_on_feasible_points(self, fixture, request, tol):
        model = request.getfixturevalue(fixture)
        draws = UnitDraws.draw(model.n, model.m, model.q, 200, seed=16, boundary_fraction=0.5)
        stream = ball_points(model, model.candidate, 1.0, draws, BoundaryMode.FEASIBLE)
        points = [point for _, point in stream]
        assert points
        for point in points:
            c, _, _ = instantiate(model, point.x)
            assert phi(model, point.x).as_float() <= float(c @ point.y) + tol.feas


class TestSolutionFace:
    """Tests for solution_face."""

    def test_face_at_switching_point(self, example_4_2):
        face = solution_face(example_4_2, [0.0])
        assert face.phi == pytest.approx(0.0)
        assert face.contains(np.array([0.0]), 1e-9)
        assert face.contains(np.array([0.5]), 1e-9)
        assert not face.contains(np.array([1.5]), 1e-9)

    def test_face_is_a_point_elsewhere(self, example_4_2):
        face = solution_face(example_4_2, [0.5])
        assert face.contains(np.array([1.0]), 1e-9)
        assert not face.contains(np.array([0.5]), 1e-9)

    def test_non_finite_phi(self):
        with pytest.raises(PhiNotFiniteError):
            solution_face(parse_model(UNBOUNDED_MODEL), [0.0])


class TestDistance:
    """Tests for the max-norm distance to S(x)."""

    def test_closed_form_example_4_2(self, example_4_2):
        for x in (-1.0, -0.5, 0.5, 1.5):
            for y in np.linspace(-1.0, 2.0, 13):
                cert = dist_to_solutions(example_4_2, [x], [y])
                assert cert.sigma == pytest.approx(abs(y - 1.0), abs=1e-8)
                assert cert.gap <= 1e-8 * max(1.0, cert.sigma)

    def test_switching_point_interval(self, example_4_2):
        for y in np.linspace(-1.0, 2.0, 13):
            cert = dist_to_solutions(example_4_2, [0.0], [y])
            assert cert.sigma == pytest.approx(interval_distance(y, 0.0, 1.0), abs=1e-8)

    def test_slack_and_multiplier_signs(self, example_4_2):
        cert = dist_to_solutions(example_4_2, [0.5], [0.0])
        assert cert.sigma == pytest.approx(1.0)
        assert cert.slack_u == pytest.approx(0.25)
        assert cert.xi3 <= 1e-12
        assert np.all(cert.xi4 <= 1e-12)
        assert cert.primal_value == pytest.approx(cert.dual_value, abs=1e-8)

    def test_infeasible_y(self, example_4_5):
        cert = dist_to_solutions(example_4_5, [0.25, 0.5], [0.5])
        assert cert.sigma == pytest.approx(1.5)
        np.testing.assert_allclose(cert.z, [-1.0], atol=1e-8)

    def test_two_dimensional(self, example_4_4):
        # S(1) = {(y1, 0) | y1 >= 0}
        cert = dist_to_solutions(example_4_4, [1.0], [-0.5, -0.25])
        assert cert.sigma == pytest.approx(0.5)

    def test_from_data(self):
        c, A, B = np.array([1.0]), np.array([0.0]), np.array([[-1.0]])
        cert = distance_from_data(c, A, B, 0.0, [3.0])
        assert cert.sigma == pytest.approx(3.0)
        assert cert.slack_u == pytest.approx(3.0)

    def test_given_phi_must_be_finite(self, example_4_2):
        infinite = phi(parse_model(UNBOUNDED_MODEL), [0.0])
        with pytest.raises(PhiNotFiniteError):
            dist_to_solutions(example_4_2, [0.0], [0.0], phi_value=infinite)

    def test_random_fully_linear_oracle(self, tol):
        model = next(
            draw for draw in map(random_fully_linear, range(200)) if (draw.m, draw.q) == (2, 3)
        )
        rng = np.random.default_rng(13)
        checked = 0
        for _ in range(500):
            x = rng.uniform(-2.0, 2.0, size=model.n)
            y = rng.uniform(-3.0, 3.0, size=model.m)
            value = phi(model, x)
            if not value.is_finite:
                continue
            cert = dist_to_solutions(model, x, y, phi_value=value)
            c, A, B = instantiate(model, x)
            bound = value.as_float() + tol.feas * face_scale(c)
            assert cert.sigma == pytest.approx(split_distance(c, A, B, bound, y), abs=1e-8)
            checked += 1
            if checked == 50:
                break
        assert checked == 50

    @pytest.mark.parametrize("fixture", ["example_4_2", "example_4_4", "example_4_5"])
    def test_reconstruction(self, fixture, request, tol):
        model = request.getfixturevalue(fixture)
        rng = np.random.default_rng(17)
        for _ in range(30):
            x = model.candidate.x + rng.uniform(-1.0, 1.0, size=model.n)
            y = model.candidate.y + rng.uniform(-2.0, 2.0, size=model.m)
            value = phi(model, x)
            cert = dist_to_solutions(model, x, y, phi_value=value)
            c, A, B = instantiate(model, x)
            # z is a lower-level solution up to the relaxed face
            assert float(c @ cert.z) - value.as_float() <= tol.feas * face_scale(c) + 1e-12
            assert float(np.max(A + B @ cert.z)) <= tol.feas
            assert float(np.max(np.abs(cert.z - y))) == pytest.approx(cert.sigma, abs=1e-9)

    def test_dual_region_dimensions(self):
        region = distance_dual_region(np.array([1.0, 2.0]), np.ones((3, 2)))
        assert region.n_vars == 2 * 2 + 1 + 3
        assert region.n_eq == 3


class TestSolutionMap:
    """dist_to_solutions vanishes exactly on the closed-form S(x)."""

    def test_example_4_4(self, example_4_4):
        rng = np.random.default_rng(14)
        for i in range(50):
            x = 0.0 if i % 5 == 0 else float(rng.uniform(-1.0, 1.0))
            y = rng.uniform(-1.0, 1.0, size=2)
            if i % 2:
                y[1] = 0.0
            sigma = dist_to_solutions(example_4_4, [x], y).sigma
            assert (sigma <= 1e-8) == in_solution_map_4_4(x, y), (x, list(y), sigma)

    def test_example_4_5(self, example_4_5):
        rng = np.random.default_rng(15)
        for i in range(50):
            x1 = 0.0 if i % 5 == 0 else float(rng.uniform(-1.0, 1.0))
            x = [x1, float(rng.uniform(-1.0, 1.0))]
            y = float(rng.choice([-1.0, 1.0])) if i % 2 else float(rng.uniform(-1.5, 1.5))
            sigma = dist_to_solutions(example_4_5, x, [y]).sigma
            assert (sigma <= 1e-8) == in_solution_map_4_5(x1, y), (x, y, sigma)


class TestDomainProbe:
    """Tests for domain_coincidence_probe."""

    def test_coincide(self, example_4_2):
        report = domain_coincidence_probe(example_4_2, [0.0], 1.0, samples=50)
        assert report.verdict == DomainVerdict.COINCIDE
        assert report.finite == 51
        assert report.witness_x is None

    def test_infeasible_parameters_still_coincide(self, half_line_model):
        report = domain_coincidence_probe(half_line_model, [0.0], 1.0, samples=50)
        assert report.verdict == DomainVerdict.COINCIDE
        assert report.infeasible > 0
        assert report.to_dict()["verdict"] == "coincide"

    def test_not_coincide(self):
        report = domain_coincidence_probe(parse_model(UNBOUNDED_MODEL), [0.0], 1.0, samples=10)
        assert report.verdict == DomainVerdict.NOT_COINCIDE
        assert report.unbounded == 11
        np.testing.assert_allclose(report.witness_x, [0.0])

    def test_seeded(self, example_4_5):
        a = domain_coincidence_probe(example_4_5, [0.0, 0.0], 0.5, samples=20, seed=3)
        b = domain_coincidence_probe(example_4_5, [0.0, 0.0], 0.5, samples=20, seed=3)
        assert a.to_dict() == b.to_dict()


class TestTrend:
    """Tests for the shared trend rule."""

    def test_diverging(self):
        assert classify_trend([1.0, 10.0, 100.0, 2000.0]) == Trend.DIVERGING

    def test_growth_below_floor_is_not_diverging(self):
        assert classify_trend([2.0, 5.0, 10.0, 20.0]) == Trend.INCONCLUSIVE

    def test_last_must_be_largest(self):
        assert classify_trend([1.0, 5000.0, 2000.0]) == Trend.INCONCLUSIVE

    def test_bounded(self):
        assert classify_trend([1.0, 1.5, 1.9]) == Trend.BOUNDED
        assert classify_trend([0.0, 0.0, 1e-12]) == Trend.BOUNDED

    def test_infinite_last_value(self):
        assert classify_trend([1.0, math.inf]) == Trend.DIVERGING

    def test_empty(self):
        assert classify_trend([]) == Trend.INCONCLUSIVE

    def test_nondecreasing(self):
        assert is_nondecreasing([1.0, 1.0, 2.0])
        assert is_nondecreasing([1.0, 1.0 - 1e-12])
        assert not is_nondecreasing([2.0, 1.0])


class TestSampling:
    """Tests for ball sampling with common random numbers."""

    def test_draws_are_seeded(self):
        a = UnitDraws.draw(2, 3, 4, 50, seed=1, boundary_fraction=0.25)
        b = UnitDraws.draw(2, 3, 4, 50, seed=1, boundary_fraction=0.25)
        np.testing.assert_array_equal(a.x, b.x)
        np.testing.assert_array_equal(a.rows, b.rows)
        assert len(a) == 50
        np.testing.assert_allclose(np.max(np.abs(a.directions), axis=1), 1.0)

    def test_points_stay_in_ball_and_feasible(self, example_4_2, tol):
        center = Point.of([0.0], [0.5])
        draws = UnitDraws.draw(1, 1, 2, 200, seed=2, boundary_fraction=0.5)
        points = list(ball_points(example_4_2, center, 0.25, draws, BoundaryMode.FEASIBLE))
        assert points
        for _, point in points:
            assert abs(point.x[0]) <= 0.25 + 1e-12
            assert abs(point.y[0] - 0.5) <= 0.25 + 1e-12
            assert lower_feasible(example_4_2, point.x, point.y, tol)

    def test_common_random_numbers(self, example_4_2):
        center = Point.of([0.0], [0.5])
        draws = UnitDraws.draw(1, 1, 2, 40, seed=4, boundary_fraction=0.0)
        wide = dict(ball_points(example_4_2, center, 0.4, draws, lower_feasible=False))
        narrow = dict(ball_points(example_4_2, center, 0.1, draws, lower_feasible=False))
        assert wide.keys() == narrow.keys()
        for i, point in wide.items():
            np.testing.assert_allclose(narrow[i].x * 4.0, point.x)

    def test_plane_mode_hits_constraints(self, example_4_2):
        center = Point.of([0.0], [0.5])
        draws = UnitDraws.draw(1, 1, 2, 100, seed=6, boundary_fraction=1.0)
        stream = ball_points(
            example_4_2, center, 0.6, draws, BoundaryMode.PLANE, lower_feasible=False
        )
        points = [point for _, point in stream]
        on_plane = [p for p in points if min(abs(p.y[0]), abs(p.y[0] - 1.0)) <= 1e-12]
        assert on_plane

    def test_upper_projection(self, example_4_5):
        center = Point.of([0.0, 0.0], [-1.0])
        draws = UnitDraws.draw(2, 1, 2, 100, seed=7, boundary_fraction=0.0)
        stream = ball_points(example_4_5, center, 0.5, draws, upper_feasible=True)
        points = [point for _, point in islice(stream, 20)]
        assert points
        for point in points:
            assert upper_feasible(example_4_5, point.x)
