"""
Negative evidence for partial calmness.

For a sample (x, y) the free variable u is taken as f(x, y) - phi(x),
its smallest admissible value. The penalty needed to keep the center
optimal for F + kappa u is then max(0, (F(center) - F(x, y)) / u).
Falsified means this required penalty diverges as the samples approach
the center; NotFalsified is sampling evidence only.
"""

import logging
import math
from collections.abc import Sequence

import numpy as np

from calm_probe.analysis.base import BaseProbe
from calm_probe.analysis.results import (
    CalmnessOutcome,
    CalmnessVerdict,
    CenterCheck,
    KappaRadiusStats,
    PathTraceRow,
    PenalizedSample,
    PhiValue,
    Trend,
)
from calm_probe.analysis.sampling import BoundaryMode, UnitDraws, ball_points
from calm_probe.analysis.trend import classify_trend, is_nondecreasing
from calm_probe.analysis.value_function import dist_to_solutions, phi
from calm_probe.core.config import (
    DEFAULT_SEED,
    DEFAULT_SETTINGS,
    DEFAULT_TOLERANCES,
    ProbeSettings,
    Tolerances,
)
from calm_probe.core.exceptions import (
    AllSamplesSkippedError,
    AnalysisError,
    PathInfeasibleEverywhereError,
    PhiNotFiniteError,
)
from calm_probe.model.bilevel import (
    BilevelModel,
    ParametricPath,
    Point,
    eval_F,
    eval_f,
    eval_path,
    lower_feasible,
    project_to_upper,
    upper_feasible,
    upper_y_slope,
)

logger = logging.getLogger(__name__)


def penalized_objective(
    model: BilevelModel, point: Point, kappa: float, tol: Tolerances = DEFAULT_TOLERANCES
) -> float:
    """
    F(x, y) + kappa (f(x, y) - phi(x)).

    Raises:
        PhiNotFiniteError: If phi(x) is not finite.
    """
    value = phi(model, point.x, tol)
    if not value.is_finite:
        raise PhiNotFiniteError(f"phi({list(point.x)}) = {value.status.value}")
    return eval_F(model, point) + kappa * (eval_f(model, point) - value.as_float())


def zero_floor(tol: Tolerances, scale: float = 0.0) -> float:
    """Largest u treated as zero when u was computed from terms of size `scale`."""
    return min(tol.feas, tol.zero * (1.0 + scale))


def required_kappa(
    u: float, F_gap: float, tol: Tolerances = DEFAULT_TOLERANCES, scale: float = 0.0
) -> float:
    """
    Smallest kappa >= 0 with F_gap <= kappa u; inf if no finite kappa works.

    u counts as zero at or below `zero_floor(tol, scale)`, where scale is
    the magnitude of the terms u was computed from.
    """
    if u > zero_floor(tol, scale):
        return max(0.0, F_gap / u)
    if F_gap > tol.feas:
        return math.inf
    return 0.0


def penalized_sample(
    model: BilevelModel,
    point: Point,
    F_center: float,
    value: PhiValue,
    tol: Tolerances = DEFAULT_TOLERANCES,
) -> PenalizedSample:
    f_value, phi_value = eval_f(model, point), value.as_float()
    u = f_value - phi_value
    F_gap = F_center - eval_F(model, point)
    scale = abs(f_value) + abs(phi_value)
    return PenalizedSample(
        point=point,
        u=u,
        F_gap=F_gap,
        required_kappa=required_kappa(u, F_gap, tol, scale),
        F_center=F_center,
        resolved=u > zero_floor(tol, scale),
    )


def verify_center(
    model: BilevelModel,
    center: Point,
    radius: float | None = None,
    samples: int | None = None,
    seed: int = DEFAULT_SEED,
    tol: Tolerances = DEFAULT_TOLERANCES,
    settings: ProbeSettings = DEFAULT_SETTINGS,
) -> CenterCheck:
    """
    Check that the center is feasible for the bilevel problem and locally
    not beaten by a sampled feasible point.

    Half of the samples stay on the fiber x = center.x; the others move x
    and project it onto X. Each y is replaced by its nearest point of S(x),
    and the pair is used only if that point stays in the ball. A sample
    beats the center when F drops by more than tol.feas scaled by
    1 + |F(center)| plus the y-slope of F there. Rejection is a verdict,
    not an error.
    """
    radius = settings.center_radius if radius is None else radius
    samples = settings.center_samples if samples is None else samples
    if center.x.size != model.n or center.y.size != model.m:
        return CenterCheck(ok=False, reason="center dimensions do not match the model")
    if not upper_feasible(model, center.x, tol):
        return CenterCheck(ok=False, reason="center x is not in X")
    value = phi(model, center.x, tol)
    if not value.is_finite:
        return CenterCheck(ok=False, reason=f"phi at the center is {value.status.value}")
    sigma = dist_to_solutions(model, center.x, center.y, tol, value).sigma
    if sigma > tol.feas:
        return CenterCheck(ok=False, reason=f"center y is at distance {sigma:.3g} from S(x)")

    F_center = eval_F(model, center)
    check = CenterCheck(ok=True, F_center=F_center)
    rng = np.random.default_rng(seed)
    unit_x = rng.uniform(-1.0, 1.0, size=(samples, model.n))
    unit_y = rng.uniform(-1.0, 1.0, size=(samples, model.m))
    for i in range(samples):
        x = center.x
        if i % 2:
            projected = project_to_upper(model, center.x + radius * unit_x[i], tol)
            if projected is None or float(np.max(np.abs(projected - center.x))) > radius:
                continue
            x = projected
        value = phi(model, x, tol)
        if not value.is_finite:
            continue
        y = center.y + radius * unit_y[i]
        z = dist_to_solutions(model, x, y, tol, value).z
        if float(np.max(np.abs(z - center.y))) > radius:
            continue
        point = Point(x=x, y=z)
        check.samples_checked += 1
        # z may sit up to a tolerance outside S(x); F moves by at most its slope times that.
        slack = tol.feas * (1.0 + abs(F_center) + upper_y_slope(model, point))
        if eval_F(model, point) < F_center - slack:
            check.ok = False
            check.better_point = point
            check.reason = (
                f"feasible point with F = {eval_F(model, point):.6g} < {F_center:.6g} nearby"
            )
            logger.debug("Center rejected: %s", check.reason)
            return check
    logger.debug("Center accepted after %d samples", check.samples_checked)
    return check


def rejected(center: Point, check: CenterCheck) -> CalmnessVerdict:
    return CalmnessVerdict(
        center=center, verdict=CalmnessOutcome.CENTER_REJECTED, reason=check.reason
    )


class RequiredKappaSweep(BaseProbe[CalmnessVerdict]):
    """Per-radius sup of the required penalty over feasible samples of the bilevel problem."""

    error_type: type[AnalysisError] = AllSamplesSkippedError

    def __init__(
        self,
        model: BilevelModel,
        center: Point,
        radii: Sequence[float] | None = None,
        samples_per_radius: int | None = None,
        seed: int = DEFAULT_SEED,
        tol: Tolerances = DEFAULT_TOLERANCES,
        settings: ProbeSettings = DEFAULT_SETTINGS,
        center_check: CenterCheck | None = None,
    ):
        super().__init__(model, tol, settings)
        self.center = center
        self.radii = sorted(radii or settings.radii, reverse=True)
        self.samples_per_radius = samples_per_radius or settings.samples_per_radius
        self.seed = seed
        self.center_check = center_check

    def validate(self) -> tuple[list[str], list[str]]:
        errors = []
        if any(r <= 0 for r in self.radii):
            errors.append("radii must be positive")
        return errors, []

    def run(self) -> CalmnessVerdict:
        check = self.center_check or verify_center(
            self.model, self.center, seed=self.seed, tol=self.tol, settings=self.settings
        )
        if not check.ok:
            return rejected(self.center, check)
        return super().run()

    def analyze(self) -> CalmnessVerdict:
        F_center = eval_F(self.model, self.center)
        draws = UnitDraws.draw(
            self.model.n,
            self.model.m,
            self.model.q,
            self.samples_per_radius * self.settings.max_attempts_factor,
            self.seed,
            self.settings.boundary_fraction,
        )
        per_radius: list[KappaRadiusStats] = []
        for radius in self.radii:
            stats = KappaRadiusStats(radius=radius)
            points = ball_points(
                self.model,
                self.center,
                radius,
                draws,
                BoundaryMode.FEASIBLE,
                upper_feasible=True,
                tol=self.tol,
            )
            for _, point in points:
                value = phi(self.model, point.x, self.tol)
                if not value.is_finite:
                    continue
                sample = penalized_sample(self.model, point, F_center, value, self.tol)
                stats.sample_count += 1
                if math.isinf(sample.required_kappa):
                    stats.infinite_flags += 1
                    logger.warning(
                        "No finite penalty works at x=%s y=%s", point.x, point.y
                    )
                elif stats.worst is None or sample.required_kappa > stats.sup_kappa:
                    stats.sup_kappa = sample.required_kappa
                    stats.worst = sample
                if stats.sample_count >= self.samples_per_radius:
                    break
            logger.debug(
                "Radius %g: %d samples, sup required kappa %.6g",
                radius,
                stats.sample_count,
                stats.sup_kappa,
            )
            per_radius.append(stats)

        used = [s for s in per_radius if s.sample_count]
        if not used:
            raise AllSamplesSkippedError("No feasible sample at any radius")
        trend = classify_trend([s.sup_kappa for s in used], self.settings)
        falsified = trend == Trend.DIVERGING
        verdict = CalmnessVerdict(
            center=self.center,
            verdict=CalmnessOutcome.FALSIFIED if falsified else CalmnessOutcome.NOT_FALSIFIED,
            kappa_hat=max(s.sup_kappa for s in used),
            source="sweep",
            radius_schedule=list(self.radii),
            per_radius=per_radius,
            sample_count=sum(s.sample_count for s in per_radius),
            infinite_flags=sum(s.infinite_flags for s in per_radius),
            reason=f"required kappa trend is {trend.value}",
        )
        logger.info("Required-kappa sweep: %s", verdict.verdict.value)
        return verdict


def required_kappa_sweep(
    model: BilevelModel,
    center: Point,
    radii: Sequence[float] | None = None,
    samples_per_radius: int | None = None,
    seed: int = DEFAULT_SEED,
    tol: Tolerances = DEFAULT_TOLERANCES,
    settings: ProbeSettings = DEFAULT_SETTINGS,
    center_check: CenterCheck | None = None,
) -> CalmnessVerdict:
    """
    Sample feasible pairs of the bilevel problem in shrinking balls around
    the center and track the sup of the required penalty per radius.

    x is projected onto X and y is lower-level feasible. A share of the
    samples is pushed to the boundary of the lower-level feasible set,
    where the required penalty is largest. Falsified iff the per-radius
    sups of the finite requirements diverge by the shared trend rule;
    samples no finite penalty covers are counted in infinite_flags.
    Returns CenterRejected without sampling if `verify_center` fails.

    Raises:
        AllSamplesSkippedError: If no radius yields a feasible sample.
    """
    return RequiredKappaSweep(
        model, center, radii, samples_per_radius, seed, tol, settings, center_check
    ).run()


class PathFalsifier(BaseProbe[CalmnessVerdict]):
    """Required penalty and penalized objective along a witness path."""

    error_type: type[AnalysisError] = PathInfeasibleEverywhereError

    def __init__(
        self,
        model: BilevelModel,
        center: Point,
        path: ParametricPath,
        kappa_grid: Sequence[float] | None = None,
        tol: Tolerances = DEFAULT_TOLERANCES,
        settings: ProbeSettings = DEFAULT_SETTINGS,
        center_check: CenterCheck | None = None,
    ):
        super().__init__(model, tol, settings)
        self.center = center
        self.path = path
        self.kappa_grid = list(kappa_grid or settings.kappa_grid)
        self.center_check = center_check

    def validate(self) -> tuple[list[str], list[str]]:
        if len(self.path.x_path) != self.model.n or len(self.path.y_path) != self.model.m:
            return ["path dimensions do not match the model"], []
        return [], []

    def run(self) -> CalmnessVerdict:
        check = self.center_check or verify_center(
            self.model, self.center, tol=self.tol, settings=self.settings
        )
        if not check.ok:
            return rejected(self.center, check)
        return super().run()

    def trace_row(self, t: float, F_center: float) -> PathTraceRow:
        point = eval_path(self.path, t)
        row = PathTraceRow(t=t, point=point, feasible=False)
        if not upper_feasible(self.model, point.x, self.tol):
            return row
        if not lower_feasible(self.model, point.x, point.y, self.tol):
            return row
        value = phi(self.model, point.x, self.tol)
        if not value.is_finite:
            return row
        sample = penalized_sample(self.model, point, F_center, value, self.tol)
        row.feasible = True
        row.F = F_center - sample.F_gap
        row.u = sample.u
        row.required_kappa = sample.required_kappa
        row.resolved = sample.resolved
        row.penalized = {kappa: sample.penalized(kappa) for kappa in self.kappa_grid}
        return row

    def analyze(self) -> CalmnessVerdict:
        F_center = eval_F(self.model, self.center)
        trace = [self.trace_row(t, F_center) for t in self.path.t_schedule]
        skipped = sum(not row.feasible for row in trace)
        if skipped == len(trace):
            raise PathInfeasibleEverywhereError("Path is infeasible at every scheduled t")
        if skipped:
            logger.warning("Path infeasible at %d of %d scheduled t", skipped, len(trace))

        kappas = [r.required_kappa for r in trace if r.required_kappa is not None]
        # Rows where u is numerically zero carry no information about the trend.
        resolved = [r.required_kappa for r in trace if r.resolved and r.required_kappa is not None]
        unresolved = len(kappas) - len(resolved)
        if unresolved:
            logger.debug("%d path rows have u below the zero floor", unresolved)
        trend = classify_trend(resolved, self.settings)
        falsified = trend == Trend.DIVERGING and is_nondecreasing(resolved)
        verdict = CalmnessVerdict(
            center=self.center,
            verdict=CalmnessOutcome.FALSIFIED if falsified else CalmnessOutcome.NOT_FALSIFIED,
            kappa_hat=max(resolved, default=0.0),
            source="path",
            witness=self.path,
            trace=trace,
            kappa_grid=self.kappa_grid,
            sample_count=len(trace) - skipped,
            infinite_flags=sum(math.isinf(k) for k in kappas),
            reason=f"required kappa trend along the path is {trend.value}",
        )
        logger.info("Path falsifier: %s", verdict.verdict.value)
        return verdict


def path_falsify(
    model: BilevelModel,
    center: Point,
    path: ParametricPath,
    kappa_grid: Sequence[float] | None = None,
    tol: Tolerances = DEFAULT_TOLERANCES,
    settings: ProbeSettings = DEFAULT_SETTINGS,
    center_check: CenterCheck | None = None,
) -> CalmnessVerdict:
    """
    Evaluate F + kappa (f - phi) and the required penalty along a path.

    Scheduled t where the path leaves the feasible set of the bilevel
    problem are kept in the trace with feasible=False. Falsified iff the
    required penalty is nondecreasing and diverges by the shared trend rule,
    judged on the rows where u is above the numerical zero floor.

    Raises:
        PathInfeasibleEverywhereError: If no scheduled t is feasible.
    """
    return PathFalsifier(model, center, path, kappa_grid, tol, settings, center_check).run()


def combine_verdicts(center: Point, verdicts: Sequence[CalmnessVerdict]) -> CalmnessVerdict:
    """
    Overall verdict of a sweep and any number of paths.

    Falsified if any part is; the falsifying part is returned, preferring
    one that carries a witness path. Otherwise the part with the largest
    kappa_hat is returned, with the sample counts of all parts.
    """
    if not verdicts:
        raise AnalysisError("No verdicts to combine")
    for verdict in verdicts:
        if verdict.verdict == CalmnessOutcome.CENTER_REJECTED:
            return verdict
    falsified = [v for v in verdicts if v.is_falsified]
    if falsified:
        with_path = [v for v in falsified if v.witness is not None]
        return (with_path or falsified)[0]
    best = max(verdicts, key=lambda v: v.kappa_hat)
    return CalmnessVerdict(
        center=center,
        verdict=CalmnessOutcome.NOT_FALSIFIED,
        kappa_hat=best.kappa_hat,
        source="+".join(v.source for v in verdicts),
        radius_schedule=best.radius_schedule,
        per_radius=best.per_radius,
        witness=best.witness,
        trace=best.trace,
        kappa_grid=best.kappa_grid,
        sample_count=sum(v.sample_count for v in verdicts),
        infinite_flags=sum(v.infinite_flags for v in verdicts),
        reason=best.reason,
    )
