"""Tests for weak-sharp moduli, ratio probes, the rank check and the condition summary."""

import math

import numpy as np
import pytest

from calm_probe.analysis.certificates import (
    ConstantRankProbe,
    Omega,
    condition_summary,
    constant_rank_check,
    inner_semicontinuity_probe,
    luwsmc_probe,
    model_uwsm_modulus,
    r_regularity_probe,
    rank_matrix,
    relaxed_dual_bound,
    uwsm_inequality_check,
    uwsm_modulus,
    uwsm_modulus_sweep,
)
from calm_probe.analysis.falsifier import combine_verdicts, path_falsify, required_kappa_sweep
from calm_probe.analysis.results import (
    CalmnessOutcome,
    DomainReport,
    Evidence,
    IscReport,
    IscVerdict,
    RankProfile,
    RankVerdict,
    RatioProbeReport,
    Trend,
    UwsmCheck,
    WsmCertificate,
)
from calm_probe.core.config import Tolerances
from calm_probe.core.exceptions import (
    CenterNotOptimalError,
    FormNotSupportedError,
    PhiNotFiniteError,
)
from calm_probe.core.models import LpStatus, VertexSet
from calm_probe.core.rank import numerical_rank
from calm_probe.model.bilevel import Point
from calm_probe.model.builtins import random_fully_linear
from calm_probe.model.parser import parse_model
from tests.conftest import UNBOUNDED_MODEL

ORIGIN = Point.of([0.0], [0.0])


def ratio_report(trend: Trend, kind: str = "luwsmc") -> RatioProbeReport:
    return RatioProbeReport(kind, ORIGIN, [], [], trend)


def rank_profile(verdict: RankVerdict) -> RankProfile:
    return RankProfile(ORIGIN, (), [], [], verdict)


def isc_report(verdict: IscVerdict) -> IscReport:
    return IscReport(ORIGIN, [], [], [], [], verdict)


def domains(unbounded: int = 0) -> DomainReport:
    return DomainReport(center_x=np.zeros(1), radius=1.0, finite=10, unbounded=unbounded)


def certificate(modulus: float = 1.0) -> WsmCertificate:
    return WsmCertificate(modulus_M=modulus, witness_vertices=VertexSet())


class TestUwsmModulus:
    """Tests for the weak-sharp modulus from dual vertices."""

    def test_half_line(self):
        # min y over y >= 0: dist(y, S) = y = c.y - phi
        cert = uwsm_modulus([1.0], [[-1.0]])
        assert cert.modulus_M == pytest.approx(1.0)
        assert len(cert.witness_vertices) == 3
        assert not cert.is_parametric

    def test_scaled_objective(self):
        cert = uwsm_modulus([4.0], [[-1.0]])
        assert cert.modulus_M == pytest.approx(0.25)

    def test_zero_objective(self):
        # c = 0 makes S the whole feasible set, so no positive xi3 is needed
        assert uwsm_modulus([0.0], [[-1.0]]).modulus_M == pytest.approx(0.0)

    def test_parametric_model_needs_sweep(self, example_4_2):
        with pytest.raises(FormNotSupportedError):
            model_uwsm_modulus(example_4_2)

    def test_sweep_grows_like_inverse_square(self, example_4_2):
        cert = uwsm_modulus_sweep(example_4_2, [[0.5], [0.25], [0.125]])
        moduli = [m for _, m in cert.per_x_moduli]
        assert moduli == pytest.approx([4.0, 16.0, 64.0])
        assert cert.modulus_M == pytest.approx(64.0)
        assert cert.growth_ratios == pytest.approx([4.0, 4.0])
        assert cert.grows
        assert cert.is_parametric

    def test_sweep_rejects_infinite_phi(self):
        with pytest.raises(PhiNotFiniteError):
            uwsm_modulus_sweep(parse_model(UNBOUNDED_MODEL), [[0.0]])

    def test_sweep_needs_samples(self, example_4_2):
        with pytest.raises(PhiNotFiniteError):
            uwsm_modulus_sweep(example_4_2, [])

    def test_to_dict(self, example_4_2):
        data = uwsm_modulus_sweep(example_4_2, [[0.5], [0.25]]).to_dict()
        assert data["modulus_M"] == pytest.approx(16.0)
        assert data["grows"] is True
        assert len(data["per_x_moduli"]) == 2


class TestUwsmInequality:
    """The certified modulus bounds every sampled distance."""

    def test_random_fully_linear_instances(self):
        total = 0
        for seed in range(25):
            model = random_fully_linear(seed)
            cert = model_uwsm_modulus(model)
            check = uwsm_inequality_check(model, cert, samples=1000, seed=seed)
            assert check.violations == 0
            assert check.max_dual_xi3 <= cert.modulus_M * (1 + 1e-9) + 1e-9
            assert check.max_primal_dual_gap <= 1e-8
            total += check.samples
        assert total > 0

    def test_check_serializes(self):
        model = random_fully_linear(1)
        check = uwsm_inequality_check(model, model_uwsm_modulus(model), samples=10)
        data = check.to_dict()
        assert data["violations"] == 0
        assert data["holds"] == (check.samples > 0)

    def test_too_small_modulus_is_caught(self):
        model = random_fully_linear(2)
        cert = model_uwsm_modulus(model)
        check = uwsm_inequality_check(model, certificate(0.0), samples=200)
        if cert.modulus_M > 0 and check.worst_excess > 1e-6:
            assert check.violations > 0
            assert not check.holds


class TestRelaxedDual:
    """Dropping the coupling row destroys the bound."""

    def test_unbounded_off_the_solution_set(self, example_4_2):
        outcome = relaxed_dual_bound(example_4_2, [0.5], [0.0])
        assert outcome.status == LpStatus.UNBOUNDED
        assert outcome.value == math.inf

    def test_zero_on_the_solution_set(self, example_4_2):
        outcome = relaxed_dual_bound(example_4_2, [0.5], [1.0])
        assert outcome.is_optimal
        assert outcome.value == pytest.approx(0.0, abs=1e-12)

    def test_non_finite_phi(self):
        with pytest.raises(PhiNotFiniteError):
            relaxed_dual_bound(parse_model(UNBOUNDED_MODEL), [0.0], [0.0])


class TestLuwsmcProbe:
    """Tests for the local weak-sharp ratio probe."""

    def test_example_4_2_diverges(self, example_4_2, fast_settings):
        report = luwsmc_probe(
            example_4_2,
            example_4_2.candidate,
            radii=[0.5, 0.1, 0.05],
            tol=Tolerances(feas=1e-12),
            settings=fast_settings,
        )
        assert report.kind == "luwsmc"
        assert report.trend == Trend.DIVERGING
        assert report.radius_schedule == [0.5, 0.1, 0.05]
        ratios = report.worst_ratios
        assert ratios[-1] > 10 * ratios[0]
        for stats in report.per_radius:
            assert stats.sample_count == fast_settings.samples_per_radius

    def test_global_minimizer_is_bounded(self, example_4_3, fast_settings):
        report = luwsmc_probe(example_4_3, example_4_3.candidate, settings=fast_settings)
        assert report.trend == Trend.BOUNDED
        assert max(report.worst_ratios) <= 1 / 1.5**2 + 1e-6

    def test_seeded(self, example_4_3, fast_settings):
        a = luwsmc_probe(example_4_3, example_4_3.candidate, seed=9, settings=fast_settings)
        b = luwsmc_probe(example_4_3, example_4_3.candidate, seed=9, settings=fast_settings)
        assert a.to_dict() == b.to_dict()

    def test_radii_are_sorted(self, example_4_3, fast_settings):
        report = luwsmc_probe(
            example_4_3, example_4_3.candidate, radii=[0.01, 0.1], settings=fast_settings
        )
        assert report.radius_schedule == [0.1, 0.01]

    def test_center_off_the_graph(self, example_4_2):
        with pytest.raises(CenterNotOptimalError):
            luwsmc_probe(example_4_2, Point.of([0.5], [0.0]))

    def test_center_dimensions(self, example_4_2):
        with pytest.raises(CenterNotOptimalError):
            luwsmc_probe(example_4_2, Point.of([0.0, 0.0], [0.0]))


class TestRRegularityProbe:
    """Tests for the R-regularity probe."""

    def test_global_minimizer_is_bounded(self, example_4_3, fast_settings):
        report = r_regularity_probe(example_4_3, example_4_3.candidate, settings=fast_settings)
        assert report.kind == "rrcq-dom-phi"
        assert report.trend == Trend.BOUNDED

    def test_example_4_4_ratios_blow_up(self, example_4_4, fast_settings):
        report = r_regularity_probe(example_4_4, example_4_4.candidate, settings=fast_settings)
        assert max(report.worst_ratios) > 1e3

    def test_full_space_kind(self, example_4_3, fast_settings):
        report = r_regularity_probe(
            example_4_3, example_4_3.candidate, omega=Omega.FULL_SPACE, settings=fast_settings
        )
        assert report.kind == "rrcq-full-space"
        assert report.to_dict()["kind"] == "rrcq-full-space"


class TestConstantRank:
    """Tests for the constant-rank check."""

    def test_rank_matrix(self, example_4_4):
        mat = rank_matrix(example_4_4, [2.0], (1, 2))
        np.testing.assert_allclose(mat, [[0.0, -4.0], [0.0, 1.0], [-2.0, 1.0]])

    def test_holds_at_global_minimizer(self, example_4_3):
        profile = constant_rank_check(example_4_3, example_4_3.candidate)
        assert profile.active_set == (2,)
        assert profile.verdict == RankVerdict.CONSTANT_RANK_HOLDS
        assert [s.subset for s in profile.subset_results] == [(1,), (2,), (1, 2)]
        assert profile.violated_subset is None

    def test_objective_row_vanishes(self, example_4_4):
        profile = constant_rank_check(example_4_4, example_4_4.candidate, x_samples=10)
        assert profile.active_set == (1, 2)
        assert profile.verdict == RankVerdict.VIOLATED
        assert profile.violated_subset == (1,)
        assert profile.witness_ranks == (0, 1)
        assert profile.witness is not None
        np.testing.assert_allclose(profile.witness[0], [0.0])
        assert profile.to_dict()["violated_subset"] == [1]

    def test_holds_on_fully_linear_instances(self):
        for seed in range(25):
            model = random_fully_linear(seed)
            profile = constant_rank_check(model, model.candidate, x_samples=10)
            assert profile.verdict == RankVerdict.CONSTANT_RANK_HOLDS, seed

    @pytest.mark.parametrize("factor", [1e-4, 1e4])
    def test_subset_ranks_are_scale_invariant(self, example_4_4, factor):
        for x in (2.0, 0.5, 1e-3):
            mat = rank_matrix(example_4_4, [x], (1, 2))
            for rows in ([0], [1], [0, 1], [0, 1, 2]):
                assert numerical_rank(factor * mat[rows]) == numerical_rank(mat[rows])

    def test_subset_cap(self, example_4_4):
        profile = constant_rank_check(
            example_4_4, example_4_4.candidate, tol=Tolerances(subset_cap=2)
        )
        assert profile.verdict == RankVerdict.SUBSET_CAP_EXCEEDED
        assert profile.subset_results == []

    def test_infeasible_center(self, example_4_2):
        with pytest.raises(CenterNotOptimalError):
            constant_rank_check(example_4_2, Point.of([0.0], [2.0]))

    def test_feasible_non_solution_center_warns(self, example_4_2):
        probe = ConstantRankProbe(example_4_2, Point.of([0.5], [0.0]), x_samples=5)
        profile = probe.run()
        assert probe.warnings == ["center is not a lower-level solution"]
        assert profile.active_set == (1,)


class TestInnerSemicontinuity:
    """Tests for the inner-semicontinuity probe."""

    def test_solution_map_jumps(self, example_4_2):
        report = inner_semicontinuity_probe(example_4_2, example_4_2.candidate)
        assert report.verdict == IscVerdict.VIOLATED
        assert report.sup_dist[-1] == pytest.approx(1.0, abs=1e-6)
        assert report.violating_direction is not None
        assert abs(report.violating_direction[0]) == pytest.approx(1.0)

    def test_example_4_4_consistent(self, example_4_4):
        report = inner_semicontinuity_probe(example_4_4, example_4_4.candidate)
        assert report.verdict == IscVerdict.CONSISTENT
        assert report.violating_direction is None

    def test_global_minimizer_consistent(self, example_4_3):
        report = inner_semicontinuity_probe(example_4_3, example_4_3.candidate)
        assert report.verdict == IscVerdict.CONSISTENT
        assert report.t_schedule[0] > report.t_schedule[-1]

    def test_explicit_directions(self, example_4_2):
        report = inner_semicontinuity_probe(
            example_4_2, example_4_2.candidate, t_schedule=[0.01, 0.1], directions=[[1.0]]
        )
        assert report.t_schedule == [0.1, 0.01]
        assert len(report.directions) == 1
        assert report.non_finite == [0, 0]

    def test_random_directions_only_for_several_parameters(self, example_4_5):
        report = inner_semicontinuity_probe(example_4_5, example_4_5.candidate)
        assert len(report.directions) == 4 + 8

    def test_center_off_the_graph(self, example_4_2):
        with pytest.raises(CenterNotOptimalError):
            inner_semicontinuity_probe(example_4_2, Point.of([0.5], [0.0]))


class TestConditionSummary:
    """Tests for the implication chain."""

    def test_nothing_run(self):
        summary = condition_summary()
        assert summary.conditions["luwsmc"] == Evidence.NOT_RUN
        assert summary.conditions["partial-calmness"] == Evidence.UNKNOWN
        assert summary.implications == []
        assert not summary.partial_calmness_supported

    def test_bounded_luwsmc(self):
        summary = condition_summary(luwsmc=ratio_report(Trend.BOUNDED))
        assert summary.implications == ["luwsmc => partial-calmness"]
        assert summary.partial_calmness_supported

    def test_full_chain(self):
        summary = condition_summary(
            rank=rank_profile(RankVerdict.CONSTANT_RANK_HOLDS),
            isc=isc_report(IscVerdict.CONSISTENT),
            domains=domains(),
        )
        assert summary.implications == [
            "constant-rank + inner-semicontinuity => rrcq",
            "rrcq + domain-coincidence => luwsmc",
            "luwsmc => partial-calmness",
        ]
        assert summary.conditions["rrcq"] == Evidence.NOT_RUN
        assert summary.partial_calmness_supported

    def test_domains_must_coincide(self):
        summary = condition_summary(rrcq=ratio_report(Trend.BOUNDED, "rrcq"), domains=domains(3))
        assert summary.conditions["domain-coincidence"] == Evidence.REFUTED
        assert not summary.partial_calmness_supported

    def test_contradiction(self):
        summary = condition_summary(
            rrcq=ratio_report(Trend.DIVERGING, "rrcq"),
            rank=rank_profile(RankVerdict.CONSTANT_RANK_HOLDS),
            isc=isc_report(IscVerdict.CONSISTENT),
        )
        assert summary.contradictions == [
            "constant-rank + inner-semicontinuity => rrcq, but the rrcq probe refutes it"
        ]
        assert summary.implications == []
        assert summary.conditions["partial-calmness"] == Evidence.UNKNOWN

    def test_uwsm_certificate(self):
        check = UwsmCheck(modulus_M=1.0, samples=10)
        summary = condition_summary(uwsm=certificate(), uwsm_check=check)
        assert summary.conditions["uwsm"] == Evidence.SUPPORTED
        assert "uwsm => luwsmc" in summary.implications
        assert summary.partial_calmness_supported

    def test_uwsm_check_failure(self):
        check = UwsmCheck(modulus_M=1.0, samples=10, violations=2)
        summary = condition_summary(uwsm=certificate(), uwsm_check=check)
        assert summary.conditions["uwsm"] == Evidence.REFUTED

    def test_parametric_modulus_is_unknown(self, example_4_2):
        sweep = uwsm_modulus_sweep(example_4_2, [[0.5], [0.25]])
        assert condition_summary(uwsm=sweep).conditions["uwsm"] == Evidence.UNKNOWN

    def test_luwsmc_refuted_blocks_uwsm_rule(self):
        summary = condition_summary(
            luwsmc=ratio_report(Trend.DIVERGING), uwsm=certificate(), uwsm_check=None
        )
        assert summary.contradictions == ["uwsm => luwsmc, but the luwsmc probe refutes it"]
        assert not summary.partial_calmness_supported

    def test_to_dict_sorted(self):
        data = condition_summary(luwsmc=ratio_report(Trend.INCONCLUSIVE)).to_dict()
        assert list(data["conditions"]) == sorted(data["conditions"])
        assert data["conditions"]["luwsmc"] == "unknown"


class TestCrossConsistency:
    """Weak-sharp evidence for partial calmness never meets a falsified center."""

    @pytest.mark.parametrize(
        "fixture", ["example_4_2", "example_4_3", "example_4_4", "example_4_5"]
    )
    def test_bundled_examples(self, fixture, request, fast_settings):
        model = request.getfixturevalue(fixture)
        center = model.candidate
        luwsmc = luwsmc_probe(model, center, settings=fast_settings)
        parts = [required_kappa_sweep(model, center, settings=fast_settings)]
        parts += [path_falsify(model, center, path, settings=fast_settings) for path in model.paths]
        verdict = combine_verdicts(center, parts)
        summary = condition_summary(luwsmc=luwsmc)

        assert not (luwsmc.trend == Trend.BOUNDED and verdict.is_falsified)
        assert not (summary.partial_calmness_supported and verdict.is_falsified)
        if model.paths:
            assert verdict.is_falsified
            assert verdict.witness is not None
        else:
            assert summary.partial_calmness_supported
            assert verdict.verdict == CalmnessOutcome.NOT_FALSIFIED
