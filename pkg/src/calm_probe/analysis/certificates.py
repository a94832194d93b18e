"""
Positive evidence for calmness-type conditions.

The weak-sharp modulus is a genuine certificate for fixed lower-level
coefficients. The ratio probes, the rank check and the
inner-semicontinuity check are sampling evidence with declared rules.
"""

import logging
import math
from abc import abstractmethod
from collections.abc import Sequence
from enum import Enum
from itertools import combinations

import numpy as np
from numpy.typing import ArrayLike

from calm_probe.analysis.base import BaseProbe
from calm_probe.analysis.results import (
    ConditionSummary,
    DomainReport,
    DomainVerdict,
    Evidence,
    IscReport,
    IscVerdict,
    PhiValue,
    RadiusStats,
    RankProfile,
    RankVerdict,
    RatioProbeReport,
    SubsetRank,
    Trend,
    UwsmCheck,
    WsmCertificate,
)
from calm_probe.analysis.sampling import BoundaryMode, UnitDraws, ball_points
from calm_probe.analysis.trend import classify_trend
from calm_probe.analysis.value_function import (
    dist_to_solutions,
    distance_dual_region,
    phi,
)
from calm_probe.core.config import (
    DEFAULT_SEED,
    DEFAULT_SETTINGS,
    DEFAULT_TOLERANCES,
    ProbeSettings,
    Tolerances,
)
from calm_probe.core.exceptions import (
    AllSamplesSkippedError,
    CenterNotOptimalError,
    FormNotSupportedError,
    PhiNotFiniteError,
)
from calm_probe.core.models import FloatArray, LpOutcome, LpProblem, Polyhedron, Sense, Sign
from calm_probe.core.rank import numerical_rank
from calm_probe.core.simplex import solve_lp
from calm_probe.core.vertices import enumerate_vertices
from calm_probe.model.bilevel import BilevelModel, Point, instantiate, lower_constraints

logger = logging.getLogger(__name__)


# Weak-sharp modulus


def uwsm_modulus(
    c: ArrayLike, B: ArrayLike, tol: Tolerances = DEFAULT_TOLERANCES
) -> WsmCertificate:
    """
    Weak-sharp modulus of min{c.y | A + B y <= 0} for fixed c and B.

    M is the largest |xi3| over the vertices of the distance-dual
    polyhedron. Since the dual optimum is attained at a vertex,
    dist(y, S) <= M (c.y - phi) for every feasible y and every A.

    Raises:
        CombinatorialBlowupError: If vertex enumeration exceeds its cap.
    """
    cv = np.atleast_1d(np.asarray(c, dtype=float)).ravel()
    Bm = np.asarray(B, dtype=float).reshape(-1, cv.size)
    vertices = enumerate_vertices(distance_dual_region(cv, Bm), tol)
    xi3 = 2 * cv.size
    modulus = max((abs(float(v[xi3])) for v in vertices.vertices), default=0.0)
    logger.debug("Modulus %.6g from %d vertices", modulus, len(vertices))
    return WsmCertificate(modulus_M=modulus, witness_vertices=vertices)


def model_uwsm_modulus(
    model: BilevelModel, tol: Tolerances = DEFAULT_TOLERANCES
) -> WsmCertificate:
    """
    Modulus of a model whose c and B do not depend on x.

    Raises:
        FormNotSupportedError: For models with x-dependent c or B.
    """
    if not model.form_tag.fixed_coefficients:
        raise FormNotSupportedError(
            f"Form {model.form_tag.value} has x-dependent coefficients; use the modulus sweep"
        )
    c, _, B = instantiate(model, np.zeros(model.n))
    return uwsm_modulus(c, B, tol)


def uwsm_modulus_sweep(
    model: BilevelModel, x_samples: Sequence[ArrayLike], tol: Tolerances = DEFAULT_TOLERANCES
) -> WsmCertificate:
    """
    M(x) from the parameter-dependent dual polyhedron at each sample.

    The certificate's modulus is the largest M(x); `growth_ratios` and
    `grows` expose how M(x) changes along the given sample order.

    Raises:
        PhiNotFiniteError: If phi is not finite at a sample.
        CombinatorialBlowupError: If vertex enumeration exceeds its cap.
    """
    per_x: list[tuple[FloatArray, float]] = []
    best: WsmCertificate | None = None
    for raw in x_samples:
        x = np.atleast_1d(np.asarray(raw, dtype=float)).ravel()
        value = phi(model, x, tol)
        if not value.is_finite:
            raise PhiNotFiniteError(f"phi({list(x)}) = {value.status.value}")
        c, _, B = instantiate(model, x)
        cert = uwsm_modulus(c, B, tol)
        per_x.append((x, cert.modulus_M))
        if best is None or cert.modulus_M > best.modulus_M:
            best = cert
    if best is None:
        raise PhiNotFiniteError("No parameter samples given")
    return WsmCertificate(
        modulus_M=best.modulus_M, witness_vertices=best.witness_vertices, per_x_moduli=per_x
    )


def uwsm_inequality_check(
    model: BilevelModel,
    certificate: WsmCertificate,
    samples: int = 1000,
    seed: int = DEFAULT_SEED,
    radius: float = 1.0,
    tol: Tolerances = DEFAULT_TOLERANCES,
    settings: ProbeSettings = DEFAULT_SETTINGS,
) -> UwsmCheck:
    """
    Check dist(y, S(x)) <= M (c.y - phi(x)) + tol.feas (1 + M) on samples.

    Lower-level feasible pairs are drawn from the box of the given radius
    around the model candidate (or the origin). The largest |xi3| of the
    distance certificates is recorded alongside, since it may not exceed M.
    """
    center = model.candidate or Point.of(np.zeros(model.n), np.zeros(model.m))
    M = certificate.modulus_M
    draws = UnitDraws.draw(
        model.n,
        model.m,
        model.q,
        samples * settings.max_attempts_factor,
        seed,
        settings.boundary_fraction,
    )
    check = UwsmCheck(modulus_M=M)
    for _, point in ball_points(model, center, radius, draws, BoundaryMode.FEASIBLE, tol=tol):
        value = phi(model, point.x, tol)
        if not value.is_finite:
            continue
        cert = dist_to_solutions(model, point.x, point.y, tol, value)
        excess = cert.sigma - (M * cert.slack_u + tol.feas * (1.0 + M))
        check.samples += 1
        check.worst_excess = max(check.worst_excess, excess)
        check.max_dual_xi3 = max(check.max_dual_xi3, abs(cert.xi3))
        check.max_primal_dual_gap = max(check.max_primal_dual_gap, cert.gap)
        if excess > 0:
            check.violations += 1
            logger.warning("Weak-sharp inequality violated at x=%s y=%s", point.x, point.y)
        if check.samples >= samples:
            break
    return check


def relaxed_dual_bound(
    model: BilevelModel, x: ArrayLike, y: ArrayLike, tol: Tolerances = DEFAULT_TOLERANCES
) -> LpOutcome:
    """
    The distance dual with the coupling equality deleted.

    maximize (phi - c.y) xi3 + (-A - B y).xi4 subject to -e.xi1 - e.xi2 = 1, xi <= 0.

    Without the coupling row the bound is unbounded as soon as a feasible
    y is not optimal, and is 0 when y is optimal.

    Raises:
        PhiNotFiniteError: If phi(x) is not finite.
    """
    xv = np.atleast_1d(np.asarray(x, dtype=float)).ravel()
    yv = np.atleast_1d(np.asarray(y, dtype=float)).ravel()
    value = phi(model, xv, tol)
    if not value.is_finite or value.value is None:
        raise PhiNotFiniteError(f"phi({list(xv)}) = {value.status.value}")
    c, A, B = instantiate(model, xv)
    m, q = model.m, model.q
    objective = np.concatenate([np.zeros(2 * m), [value.value - float(c @ yv)], -A - B @ yv])
    normalization = np.concatenate([-np.ones(2 * m), np.zeros(1 + q)]).reshape(1, -1)
    region = Polyhedron.build(
        2 * m + 1 + q, eq_matrix=normalization, eq_rhs=[1.0], signs=Sign.NONPOSITIVE
    )
    return solve_lp(LpProblem(objective, region, Sense.MAX), tol)


# Ratio probes


def center_errors(model: BilevelModel, center: Point, tol: Tolerances) -> list[str]:
    """Reasons why `center` is not a point of the graph of S (empty if it is)."""
    if center.x.size != model.n or center.y.size != model.m:
        return [f"center has dimensions ({center.x.size}, {center.y.size}), "
                f"expected ({model.n}, {model.m})"]
    value = phi(model, center.x, tol)
    if not value.is_finite:
        return [f"phi at the center is {value.status.value}"]
    sigma = dist_to_solutions(model, center.x, center.y, tol, value).sigma
    if sigma > tol.feas:
        return [f"center y is at distance {sigma:.3g} from S(x)"]
    return []


class Omega(Enum):
    """Where the R-regularity error bound is required to hold."""

    FULL_SPACE = "full-space"
    DOM_PHI = "dom-phi"


class RatioProbe(BaseProbe[RatioProbeReport]):
    """
    Shared sampling loop: worst ratio of a distance to a violation measure, per radius.
    """

    error_type = CenterNotOptimalError
    kind = "ratio"
    mode = BoundaryMode.FEASIBLE
    lower_feasible = True

    def __init__(
        self,
        model: BilevelModel,
        center: Point,
        radii: Sequence[float] | None = None,
        samples_per_radius: int | None = None,
        seed: int = DEFAULT_SEED,
        tol: Tolerances = DEFAULT_TOLERANCES,
        settings: ProbeSettings = DEFAULT_SETTINGS,
    ):
        super().__init__(model, tol, settings)
        self.center = center
        self.radii = sorted(radii or settings.radii, reverse=True)
        self.samples_per_radius = samples_per_radius or settings.samples_per_radius
        self.seed = seed

    def validate(self) -> tuple[list[str], list[str]]:
        errors = center_errors(self.model, self.center, self.tol)
        warnings: list[str] = []
        if any(r <= 0 for r in self.radii):
            errors.append("radii must be positive")
        return errors, warnings

    @abstractmethod
    def _measure(self, point: Point, value: PhiValue, stats: RadiusStats) -> float | None:
        """Ratio for one sample, or None if the sample is skipped (counted in stats)."""
        pass

    def analyze(self) -> RatioProbeReport:
        draws = UnitDraws.draw(
            self.model.n,
            self.model.m,
            self.model.q,
            self.samples_per_radius * self.settings.max_attempts_factor,
            self.seed,
            self.settings.boundary_fraction,
        )
        per_radius: list[RadiusStats] = []
        for radius in self.radii:
            stats = RadiusStats(radius=radius)
            points = ball_points(
                self.model,
                self.center,
                radius,
                draws,
                self.mode,
                lower_feasible=self.lower_feasible,
                tol=self.tol,
            )
            for _, point in points:
                stats.sample_count += 1
                ratio = self._measure(point, phi(self.model, point.x, self.tol), stats)
                if ratio is not None and (stats.worst_point is None or ratio > stats.worst_ratio):
                    stats.worst_ratio = ratio
                    stats.worst_point = point
                if stats.sample_count >= self.samples_per_radius:
                    break
            logger.debug(
                "%s radius %g: %d samples, worst ratio %.6g",
                self.kind,
                radius,
                stats.sample_count,
                stats.worst_ratio,
            )
            per_radius.append(stats)

        evaluated = [s for s in per_radius if s.sample_count > s.skipped_phi]
        if not evaluated:
            raise AllSamplesSkippedError(f"{self.kind}: no usable sample at any radius")
        trend = classify_trend([s.worst_ratio for s in evaluated], self.settings)
        if evaluated[-1].hard_violations:
            # Zero violation with a positive distance: the ratio is unbounded there.
            trend = Trend.DIVERGING
        logger.info("%s trend: %s", self.kind, trend.value)
        return RatioProbeReport(
            kind=self.kind,
            center=self.center,
            radius_schedule=list(self.radii),
            per_radius=per_radius,
            trend=trend,
        )

    def _ratio(
        self, distance: float, denominator: float, point: Point, stats: RadiusStats
    ) -> float | None:
        if denominator <= self.tol.feas:
            if distance <= self.tol.feas:
                stats.skipped_zero += 1
            else:
                stats.hard_violations += 1
                logger.warning(
                    "%s: zero violation but distance %.3g at x=%s y=%s",
                    self.kind,
                    distance,
                    point.x,
                    point.y,
                )
            return None
        return distance / denominator


class LuwsmcProbe(RatioProbe):
    """Sampled dist(y, S(x)) / (f(x, y) - phi(x)) over lower-level feasible pairs."""

    kind = "luwsmc"

    def _measure(self, point: Point, value: PhiValue, stats: RadiusStats) -> float | None:
        if not value.is_finite:
            stats.skipped_phi += 1
            return None
        cert = dist_to_solutions(self.model, point.x, point.y, self.tol, value)
        return self._ratio(cert.sigma, cert.slack_u, point, stats)


class RRegularityProbe(RatioProbe):
    """
    Sampled dist(y, Phi(x)) / max(0, f - phi, g_1, ..., g_q) over arbitrary pairs.

    With Omega.DOM_PHI parameters with non-finite phi are skipped; with
    Omega.FULL_SPACE they count as hard violations, since Phi(x) is empty there.
    """

    kind = "rrcq"
    mode = BoundaryMode.PLANE
    lower_feasible = False

    def __init__(
        self,
        model: BilevelModel,
        center: Point,
        radii: Sequence[float] | None = None,
        samples_per_radius: int | None = None,
        seed: int = DEFAULT_SEED,
        tol: Tolerances = DEFAULT_TOLERANCES,
        settings: ProbeSettings = DEFAULT_SETTINGS,
        omega: Omega = Omega.DOM_PHI,
    ):
        super().__init__(model, center, radii, samples_per_radius, seed, tol, settings)
        self.omega = omega
        self.kind = f"rrcq-{omega.value}"

    def _measure(self, point: Point, value: PhiValue, stats: RadiusStats) -> float | None:
        if not value.is_finite:
            if self.omega == Omega.DOM_PHI:
                stats.skipped_phi += 1
            else:
                stats.hard_violations += 1
            return None
        cert = dist_to_solutions(self.model, point.x, point.y, self.tol, value)
        g = lower_constraints(self.model, point.x, point.y)
        violation = max(0.0, cert.slack_u, float(np.max(g)))
        return self._ratio(cert.sigma, violation, point, stats)


def luwsmc_probe(
    model: BilevelModel,
    center: Point,
    radii: Sequence[float] | None = None,
    samples_per_radius: int | None = None,
    seed: int = DEFAULT_SEED,
    tol: Tolerances = DEFAULT_TOLERANCES,
    settings: ProbeSettings = DEFAULT_SETTINGS,
) -> RatioProbeReport:
    """
    Local uniform weak-sharp-minimum probe around `center`.

    Raises:
        CenterNotOptimalError: If the center is not in the graph of S.
        AllSamplesSkippedError: If no sample survives filtering.
    """
    return LuwsmcProbe(model, center, radii, samples_per_radius, seed, tol, settings).run()


def r_regularity_probe(
    model: BilevelModel,
    center: Point,
    radii: Sequence[float] | None = None,
    samples_per_radius: int | None = None,
    omega: Omega = Omega.DOM_PHI,
    seed: int = DEFAULT_SEED,
    tol: Tolerances = DEFAULT_TOLERANCES,
    settings: ProbeSettings = DEFAULT_SETTINGS,
) -> RatioProbeReport:
    """
    R-regularity probe of Phi(x) = {y | f - phi <= 0, g <= 0} around `center`.

    Raises:
        CenterNotOptimalError: If the center is not in the graph of S.
        AllSamplesSkippedError: If no sample survives filtering.
    """
    return RRegularityProbe(
        model, center, radii, samples_per_radius, seed, tol, settings, omega=omega
    ).run()


# Constant rank


def rank_matrix(model: BilevelModel, x: ArrayLike, active: Sequence[int]) -> FloatArray:
    """[c(x)^T; rows of B(x) in `active` (1-based)]."""
    c, _, B = instantiate(model, x)
    rows = [B[i - 1] for i in active]
    return np.vstack([c.reshape(1, -1), *[r.reshape(1, -1) for r in rows]])


class ConstantRankProbe(BaseProbe[RankProfile]):
    """Rank of every row subset of the rank matrix at the center and at sampled x."""

    error_type = CenterNotOptimalError

    def __init__(
        self,
        model: BilevelModel,
        center: Point,
        radius: float | None = None,
        x_samples: int = 50,
        seed: int = DEFAULT_SEED,
        tol: Tolerances = DEFAULT_TOLERANCES,
        settings: ProbeSettings = DEFAULT_SETTINGS,
    ):
        super().__init__(model, tol, settings)
        self.center = center
        self.radius = radius if radius is not None else max(settings.radii)
        self.x_samples = x_samples
        self.seed = seed

    def validate(self) -> tuple[list[str], list[str]]:
        if self.center.x.size != self.model.n or self.center.y.size != self.model.m:
            return ["center dimensions do not match the model"], []
        g = lower_constraints(self.model, self.center.x, self.center.y)
        if float(np.max(g)) > self.tol.feas:
            return ["center is not lower-level feasible"], []
        warnings = []
        if center_errors(self.model, self.center, self.tol):
            warnings.append("center is not a lower-level solution")
        return [], warnings

    def active_set(self) -> tuple[int, ...]:
        g = lower_constraints(self.model, self.center.x, self.center.y)
        return tuple(i + 1 for i, gi in enumerate(g) if abs(gi) <= self.tol.feas)

    def analyze(self) -> RankProfile:
        active = self.active_set()
        rng = np.random.default_rng(self.seed)
        offsets = rng.uniform(-1.0, 1.0, size=(self.x_samples, self.model.n))
        xs = [self.center.x, *(self.center.x + self.radius * u for u in offsets)]
        profile = RankProfile(
            center=self.center,
            active_set=active,
            sample_xs=xs,
            subset_results=[],
            verdict=RankVerdict.CONSTANT_RANK_HOLDS,
        )
        n_rows = len(active) + 1
        if n_rows > self.tol.subset_cap:
            logger.info("Rank check skipped: %d rows exceed cap %d", n_rows, self.tol.subset_cap)
            profile.verdict = RankVerdict.SUBSET_CAP_EXCEEDED
            return profile

        matrices = [rank_matrix(self.model, x, active) for x in xs]
        for size in range(1, n_rows + 1):
            for subset in combinations(range(1, n_rows + 1), size):
                rows = [r - 1 for r in subset]
                ranks = [numerical_rank(mat[rows], self.tol) for mat in matrices]
                result = SubsetRank(subset=subset, ranks=ranks)
                profile.subset_results.append(result)
                if not result.constant and profile.violated_subset is None:
                    k = next(i for i, r in enumerate(ranks) if r != ranks[0])
                    profile.verdict = RankVerdict.VIOLATED
                    profile.violated_subset = subset
                    profile.witness = (xs[0], xs[k])
                    profile.witness_ranks = (ranks[0], ranks[k])
        logger.info("Constant rank: %s", profile.verdict.value)
        return profile


def constant_rank_check(
    model: BilevelModel,
    center: Point,
    radius: float | None = None,
    x_samples: int = 50,
    seed: int = DEFAULT_SEED,
    tol: Tolerances = DEFAULT_TOLERANCES,
    settings: ProbeSettings = DEFAULT_SETTINGS,
) -> RankProfile:
    """
    Check that every row subset J of [c(x)^T; B(x)_I] keeps its rank near the center.

    I is the active set at the center. Subsets are listed by size, then
    lexicographically; the first subset whose rank changes is reported
    with the center and the sampled x where it differs. More than
    tol.subset_cap rows gives the SubsetCapExceeded verdict.

    Raises:
        CenterNotOptimalError: If the center is not lower-level feasible.
    """
    return ConstantRankProbe(model, center, radius, x_samples, seed, tol, settings).run()


# Inner semicontinuity


def _default_directions(n: int, count: int, seed: int) -> list[FloatArray]:
    directions: list[FloatArray] = []
    for i in range(n):
        for sign in (1.0, -1.0):
            d = np.zeros(n)
            d[i] = sign
            directions.append(d)
    if n > 1 and count > 0:
        rng = np.random.default_rng(seed)
        for raw in rng.normal(size=(count, n)):
            directions.append(raw / max(float(np.max(np.abs(raw))), 1e-300))
    return directions


def inner_semicontinuity_probe(
    model: BilevelModel,
    center: Point,
    t_schedule: Sequence[float] | None = None,
    directions: Sequence[ArrayLike] | None = None,
    seed: int = DEFAULT_SEED,
    random_directions: int = 8,
    tol: Tolerances = DEFAULT_TOLERANCES,
    settings: ProbeSettings = DEFAULT_SETTINGS,
) -> IscReport:
    """
    Track dist(y_center, S(x_center + t d)) as t decreases.

    Default directions are the coordinate directions in both signs, plus
    `random_directions` seeded ones when n > 1. Consistent iff the sup
    over directions at the smallest t is below
    max(10 tol.feas, sup at the largest t / 10). Rays where phi is not
    finite are counted, not fatal.

    Raises:
        CenterNotOptimalError: If the center is not in the graph of S.
    """
    errors = center_errors(model, center, tol)
    if errors:
        raise CenterNotOptimalError(f"Validation failed: {'; '.join(errors)}")
    ts = sorted(t_schedule or settings.t_schedule, reverse=True)
    dirs = (
        [np.atleast_1d(np.asarray(d, dtype=float)).ravel() for d in directions]
        if directions is not None
        else _default_directions(model.n, random_directions, seed)
    )

    sup_dist: list[float | None] = []
    non_finite: list[int] = []
    argmax: list[int | None] = []
    for t in ts:
        best: float | None = None
        best_dir: int | None = None
        missing = 0
        for k, d in enumerate(dirs):
            x = center.x + t * d
            value = phi(model, x, tol)
            if not value.is_finite:
                missing += 1
                continue
            sigma = dist_to_solutions(model, x, center.y, tol, value).sigma
            if best is None or sigma > best:
                best, best_dir = sigma, k
        sup_dist.append(best)
        non_finite.append(missing)
        argmax.append(best_dir)

    finite = [(i, v) for i, v in enumerate(sup_dist) if v is not None]
    verdict = IscVerdict.VIOLATED
    violating: FloatArray | None = None
    if finite:
        first, last = finite[0][1], finite[-1][1]
        if last < max(10.0 * tol.feas, first / 10.0):
            verdict = IscVerdict.CONSISTENT
        else:
            k = argmax[finite[-1][0]]
            violating = None if k is None else dirs[k]
    logger.info("Inner semicontinuity: %s", verdict.value)
    return IscReport(
        center=center,
        t_schedule=ts,
        directions=dirs,
        sup_dist=sup_dist,
        non_finite=non_finite,
        verdict=verdict,
        violating_direction=violating,
    )


# Summary


def _trend_evidence(report: RatioProbeReport | None) -> Evidence:
    if report is None:
        return Evidence.NOT_RUN
    return {
        Trend.BOUNDED: Evidence.SUPPORTED,
        Trend.DIVERGING: Evidence.REFUTED,
        Trend.INCONCLUSIVE: Evidence.UNKNOWN,
    }[report.trend]


def condition_summary(
    luwsmc: RatioProbeReport | None = None,
    rrcq: RatioProbeReport | None = None,
    rank: RankProfile | None = None,
    isc: IscReport | None = None,
    domains: DomainReport | None = None,
    uwsm: WsmCertificate | None = None,
    uwsm_check: UwsmCheck | None = None,
) -> ConditionSummary:
    """
    Combine probe results along the chain of sufficient conditions.

    constant rank + inner semicontinuity => RRCQ,
    RRCQ + coinciding domains => LUWSMC, UWSM => LUWSMC,
    LUWSMC => partial calmness. A chain whose premises are supported
    while its conclusion was observed refuted is reported as a contradiction.
    """
    conditions: dict[str, Evidence] = {
        "luwsmc": _trend_evidence(luwsmc),
        "rrcq": _trend_evidence(rrcq),
    }
    if uwsm is None:
        conditions["uwsm"] = Evidence.NOT_RUN
    elif uwsm_check is not None and uwsm_check.samples and not uwsm_check.holds:
        conditions["uwsm"] = Evidence.REFUTED
    elif uwsm.is_parametric or not math.isfinite(uwsm.modulus_M):
        conditions["uwsm"] = Evidence.UNKNOWN
    else:
        conditions["uwsm"] = Evidence.SUPPORTED

    if rank is None:
        conditions["constant-rank"] = Evidence.NOT_RUN
    else:
        conditions["constant-rank"] = {
            RankVerdict.CONSTANT_RANK_HOLDS: Evidence.SUPPORTED,
            RankVerdict.VIOLATED: Evidence.REFUTED,
            RankVerdict.SUBSET_CAP_EXCEEDED: Evidence.UNKNOWN,
        }[rank.verdict]
    if isc is None:
        conditions["inner-semicontinuity"] = Evidence.NOT_RUN
    else:
        conditions["inner-semicontinuity"] = (
            Evidence.SUPPORTED if isc.verdict == IscVerdict.CONSISTENT else Evidence.REFUTED
        )
    if domains is None:
        conditions["domain-coincidence"] = Evidence.NOT_RUN
    else:
        conditions["domain-coincidence"] = (
            Evidence.SUPPORTED if domains.verdict == DomainVerdict.COINCIDE else Evidence.REFUTED
        )

    summary = ConditionSummary(conditions=conditions)
    supported = Evidence.SUPPORTED

    def conclude(premises: list[str], conclusion: str, effective: dict[str, Evidence]) -> None:
        if not all(effective.get(p) == supported for p in premises):
            return
        rule = f"{' + '.join(premises)} => {conclusion}"
        if conditions.get(conclusion) == Evidence.REFUTED:
            summary.contradictions.append(f"{rule}, but the {conclusion} probe refutes it")
        else:
            summary.implications.append(rule)
            effective[conclusion] = supported

    effective = dict(conditions)
    conclude(["constant-rank", "inner-semicontinuity"], "rrcq", effective)
    conclude(["rrcq", "domain-coincidence"], "luwsmc", effective)
    conclude(["uwsm"], "luwsmc", effective)
    conclude(["luwsmc"], "partial-calmness", effective)
    conditions["partial-calmness"] = effective.get("partial-calmness", Evidence.UNKNOWN)
    return summary


__all__ = [
    "ConstantRankProbe",
    "LuwsmcProbe",
    "Omega",
    "RRegularityProbe",
    "condition_summary",
    "constant_rank_check",
    "inner_semicontinuity_probe",
    "luwsmc_probe",
    "model_uwsm_modulus",
    "r_regularity_probe",
    "rank_matrix",
    "relaxed_dual_bound",
    "uwsm_inequality_check",
    "uwsm_modulus",
    "uwsm_modulus_sweep",
]

