"""Result types produced by the value-function, certificate and falsifier analyses."""

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any

from calm_probe.core.models import FloatArray, Polyhedron, VertexSet
from calm_probe.model.bilevel import ParametricPath, Point


def _vec(values: FloatArray | None) -> list[float] | None:
    return None if values is None else [float(v) for v in values]


def _num(value: float | None) -> float | str | None:
    """JSON-safe number: non-finite values become strings."""
    if value is None:
        return None
    if math.isnan(value):
        return "nan"
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return float(value)


class PhiStatus(Enum):
    FINITE = "finite"
    PLUS_INFINITY = "+inf"  # lower-level feasible set empty
    MINUS_INFINITY = "-inf"  # lower level unbounded


@dataclass(frozen=True)
class PhiValue:
    """Optimal value of the lower level at one parameter."""

    status: PhiStatus
    value: float | None = None

    @property
    def is_finite(self) -> bool:
        return self.status == PhiStatus.FINITE

    def as_float(self) -> float:
        if self.status == PhiStatus.FINITE:
            assert self.value is not None
            return self.value
        return math.inf if self.status == PhiStatus.PLUS_INFINITY else -math.inf

    def to_dict(self) -> dict[str, Any]:
        return {"status": self.status.value, "value": self.value}


@dataclass(frozen=True, eq=False)
class SolutionFace:
    """S(x) = {y | B(x) y <= -A(x), c(x).y = phi(x)} at a fixed parameter."""

    base_x: FloatArray
    phi: float
    face: Polyhedron

    def contains(self, y: FloatArray, tol: float) -> bool:
        return self.face.contains(y, tol)


@dataclass(eq=False)
class DistanceCertificate:
    """
    Max-norm distance from y to S(x) with the primal and dual solutions that prove it.

    The dual multipliers are split into xi1, xi2 (one per y component),
    xi3 (objective row) and xi4 (one per lower-level constraint); all are <= 0.
    """

    sigma: float
    z: FloatArray
    primal_value: float
    dual_value: float
    xi1: FloatArray
    xi2: FloatArray
    xi3: float
    xi4: FloatArray
    slack_u: float
    dual_basis: tuple[int, ...] = ()

    @property
    def gap(self) -> float:
        return abs(self.primal_value - self.dual_value)

    def to_dict(self) -> dict[str, Any]:
        return {
            "sigma": self.sigma,
            "z": _vec(self.z),
            "primal_value": self.primal_value,
            "dual_value": self.dual_value,
            "xi1": _vec(self.xi1),
            "xi2": _vec(self.xi2),
            "xi3": self.xi3,
            "xi4": _vec(self.xi4),
            "slack_u": self.slack_u,
            "dual_basis": list(self.dual_basis),
        }


class DomainVerdict(Enum):
    COINCIDE = "coincide"
    NOT_COINCIDE = "not-coincide"


@dataclass
class DomainReport:
    """Classification of sampled parameters by lower-level status."""

    center_x: FloatArray
    radius: float
    finite: int = 0
    infeasible: int = 0  # phi = +inf
    unbounded: int = 0  # phi = -inf, S(x) empty while Gamma(x) is not
    witness_x: FloatArray | None = None

    @property
    def verdict(self) -> DomainVerdict:
        return DomainVerdict.COINCIDE if self.unbounded == 0 else DomainVerdict.NOT_COINCIDE

    def to_dict(self) -> dict[str, Any]:
        return {
            "center_x": _vec(self.center_x),
            "radius": self.radius,
            "finite": self.finite,
            "infeasible": self.infeasible,
            "unbounded": self.unbounded,
            "witness_x": _vec(self.witness_x),
            "verdict": self.verdict.value,
        }


@dataclass(eq=False)
class WsmCertificate:
    """
    Weak-sharp modulus M from the vertices of the distance-dual polyhedron.

    For fixed coefficients M is a genuine certificate:
    dist(y, S(x)) <= M (c.y - phi(x)) for every feasible (x, y).
    In the parameter-dependent case `per_x_moduli` holds M(x) per sample.
    """

    modulus_M: float
    witness_vertices: VertexSet
    per_x_moduli: list[tuple[FloatArray, float]] = field(default_factory=list)

    @property
    def is_parametric(self) -> bool:
        return bool(self.per_x_moduli)

    @property
    def growth_ratios(self) -> list[float]:
        """M(x_{k+1}) / M(x_k) between consecutive samples (inf when M(x_k) = 0)."""
        ratios = []
        for (_, a), (_, b) in zip(self.per_x_moduli, self.per_x_moduli[1:], strict=False):
            ratios.append(b / a if a > 0 else (math.inf if b > 0 else 1.0))
        return ratios

    @property
    def grows(self) -> bool:
        ratios = self.growth_ratios
        return bool(ratios) and all(r > 1.0 + 1e-9 for r in ratios)

    def to_dict(self) -> dict[str, Any]:
        return {
            "modulus_M": _num(self.modulus_M),
            "vertex_count": len(self.witness_vertices),
            "vertices": [_vec(v) for v in self.witness_vertices.vertices],
            "per_x_moduli": [{"x": _vec(x), "M": _num(m)} for x, m in self.per_x_moduli],
            "growth_ratios": [_num(r) for r in self.growth_ratios],
            "grows": self.grows,
        }


class Trend(Enum):
    BOUNDED = "bounded"
    DIVERGING = "diverging"
    INCONCLUSIVE = "inconclusive"


@dataclass
class RadiusStats:
    """Per-radius aggregate of a ratio probe."""

    radius: float
    sample_count: int = 0
    worst_ratio: float = 0.0
    skipped_phi: int = 0  # parameters with non-finite phi
    skipped_zero: int = 0  # 0/0 samples
    hard_violations: int = 0  # zero denominator but positive distance
    worst_point: Point | None = None

    @property
    def alpha_estimate(self) -> float:
        return math.inf if self.worst_ratio == 0 else 1.0 / self.worst_ratio

    def to_dict(self) -> dict[str, Any]:
        return {
            "radius": self.radius,
            "sample_count": self.sample_count,
            "worst_ratio": _num(self.worst_ratio),
            "alpha_estimate": _num(self.alpha_estimate),
            "skipped_phi": self.skipped_phi,
            "skipped_zero": self.skipped_zero,
            "hard_violations": self.hard_violations,
            "worst_point": None if self.worst_point is None else self.worst_point.to_dict(),
        }


@dataclass
class RatioProbeReport:
    """Sampled distance-to-violation ratios around a center, per radius."""

    kind: str
    center: Point
    radius_schedule: list[float]
    per_radius: list[RadiusStats]
    trend: Trend

    @property
    def worst_ratios(self) -> list[float]:
        return [r.worst_ratio for r in self.per_radius]

    def to_dict(self) -> dict[str, Any]:
        return {
            "kind": self.kind,
            "center": self.center.to_dict(),
            "radius_schedule": self.radius_schedule,
            "per_radius": [r.to_dict() for r in self.per_radius],
            "trend": self.trend.value,
        }


class RankVerdict(Enum):
    CONSTANT_RANK_HOLDS = "constant-rank-holds"
    VIOLATED = "violated"
    SUBSET_CAP_EXCEEDED = "subset-cap-exceeded"


@dataclass
class SubsetRank:
    """Ranks of one row subset J (1-based, row 1 = objective row) over sampled x."""

    subset: tuple[int, ...]
    ranks: list[int]

    @property
    def constant(self) -> bool:
        return len(set(self.ranks)) <= 1


@dataclass
class RankProfile:
    """Constant-rank check of the matrix [c(x)^T; B(x) rows in the active set]."""

    center: Point
    active_set: tuple[int, ...]  # 1-based lower-level constraint indices
    sample_xs: list[FloatArray]
    subset_results: list[SubsetRank]
    verdict: RankVerdict
    violated_subset: tuple[int, ...] | None = None
    witness: tuple[FloatArray, FloatArray] | None = None
    witness_ranks: tuple[int, int] | None = None

    def to_dict(self) -> dict[str, Any]:
        return {
            "center": self.center.to_dict(),
            "active_set": list(self.active_set),
            "sample_count": len(self.sample_xs),
            "subsets": [
                {"J": list(s.subset), "ranks": sorted(set(s.ranks)), "constant": s.constant}
                for s in self.subset_results
            ],
            "verdict": self.verdict.value,
            "violated_subset": None if self.violated_subset is None else list(self.violated_subset),
            "witness": None if self.witness is None else [_vec(w) for w in self.witness],
            "witness_ranks": None if self.witness_ranks is None else list(self.witness_ranks),
        }


class IscVerdict(Enum):
    CONSISTENT = "consistent"
    VIOLATED = "violated"


@dataclass
class IscReport:
    """dist(y_center, S(x_center + t d)) over rays, reduced to a sup per t."""

    center: Point
    t_schedule: list[float]
    directions: list[FloatArray]
    sup_dist: list[float | None]
    non_finite: list[int]
    verdict: IscVerdict
    violating_direction: FloatArray | None = None

    def to_dict(self) -> dict[str, Any]:
        return {
            "center": self.center.to_dict(),
            "t_schedule": self.t_schedule,
            "directions": [_vec(d) for d in self.directions],
            "sup_dist": [_num(v) for v in self.sup_dist],
            "non_finite": self.non_finite,
            "verdict": self.verdict.value,
            "violating_direction": _vec(self.violating_direction),
        }


@dataclass
class UwsmCheck:
    """Sampled verification of dist(y, S(x)) <= M (c.y - phi(x))."""

    modulus_M: float
    samples: int = 0
    violations: int = 0
    worst_excess: float = -math.inf
    max_dual_xi3: float = 0.0  # largest |xi3| seen in distance certificates
    max_primal_dual_gap: float = 0.0

    @property
    def holds(self) -> bool:
        return self.samples > 0 and self.violations == 0

    def to_dict(self) -> dict[str, Any]:
        return {
            "modulus_M": _num(self.modulus_M),
            "samples": self.samples,
            "violations": self.violations,
            "worst_excess": _num(self.worst_excess),
            "max_dual_xi3": self.max_dual_xi3,
            "max_primal_dual_gap": self.max_primal_dual_gap,
            "holds": self.holds,
        }


class Evidence(Enum):
    SUPPORTED = "supported"
    REFUTED = "refuted"
    UNKNOWN = "unknown"
    NOT_RUN = "not-run"


@dataclass
class ConditionSummary:
    """Probe verdicts and what the implication chain makes of them."""

    conditions: dict[str, Evidence]
    implications: list[str] = field(default_factory=list)
    contradictions: list[str] = field(default_factory=list)

    @property
    def partial_calmness_supported(self) -> bool:
        return self.conditions.get("partial-calmness") == Evidence.SUPPORTED

    def to_dict(self) -> dict[str, Any]:
        return {
            "conditions": {k: v.value for k, v in sorted(self.conditions.items())},
            "implications": self.implications,
            "contradictions": self.contradictions,
        }


class CalmnessOutcome(Enum):
    FALSIFIED = "falsified"
    NOT_FALSIFIED = "not-falsified"
    CENTER_REJECTED = "center-rejected"


@dataclass(eq=False)
class PenalizedSample:
    """A sample (x, y) with u = f - phi and F_gap = F(center) - F(x, y)."""

    point: Point
    u: float
    F_gap: float
    required_kappa: float
    F_center: float = 0.0
    resolved: bool = True  # u above the numerical zero floor

    def penalized(self, kappa: float) -> float:
        """F + kappa u rebuilt from the gap bookkeeping."""
        return self.F_center - self.F_gap + kappa * self.u

    def to_dict(self) -> dict[str, Any]:
        return {
            "point": self.point.to_dict(),
            "u": self.u,
            "F_gap": self.F_gap,
            "required_kappa": _num(self.required_kappa),
            "resolved": self.resolved,
        }


@dataclass
class CenterCheck:
    """Outcome of verify_center."""

    ok: bool
    reason: str = ""
    F_center: float | None = None
    samples_checked: int = 0
    better_point: Point | None = None

    def to_dict(self) -> dict[str, Any]:
        return {
            "ok": self.ok,
            "reason": self.reason,
            "F_center": self.F_center,
            "samples_checked": self.samples_checked,
            "better_point": None if self.better_point is None else self.better_point.to_dict(),
        }


@dataclass
class KappaRadiusStats:
    """Per-radius sup of the required penalty."""

    radius: float
    sample_count: int = 0
    sup_kappa: float = 0.0
    infinite_flags: int = 0
    worst: PenalizedSample | None = None

    def to_dict(self) -> dict[str, Any]:
        return {
            "radius": self.radius,
            "sample_count": self.sample_count,
            "sup_kappa": _num(self.sup_kappa),
            "infinite_flags": self.infinite_flags,
            "worst": None if self.worst is None else self.worst.to_dict(),
        }


@dataclass
class PathTraceRow:
    """One scheduled t along a witness path."""

    t: float
    point: Point
    feasible: bool
    F: float | None = None
    u: float | None = None
    required_kappa: float | None = None
    resolved: bool = False
    penalized: dict[float, float] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        return {
            "t": self.t,
            "point": self.point.to_dict(),
            "feasible": self.feasible,
            "F": self.F,
            "u": self.u,
            "required_kappa": _num(self.required_kappa),
            "resolved": self.resolved,
            "penalized": {repr(k): v for k, v in sorted(self.penalized.items())},
        }


@dataclass
class CalmnessVerdict:
    """
    Falsified, NotFalsified or CenterRejected, with the evidence behind it.

    NotFalsified is sampling evidence only; `kappa_hat` is the largest
    finite required penalty seen, not a proven calmness constant.
    """

    center: Point
    verdict: CalmnessOutcome
    kappa_hat: float = 0.0
    source: str = "sweep"
    radius_schedule: list[float] = field(default_factory=list)
    per_radius: list[KappaRadiusStats] = field(default_factory=list)
    witness: ParametricPath | None = None
    trace: list[PathTraceRow] = field(default_factory=list)
    kappa_grid: list[float] = field(default_factory=list)
    sample_count: int = 0
    infinite_flags: int = 0
    reason: str = ""

    @property
    def is_falsified(self) -> bool:
        return self.verdict == CalmnessOutcome.FALSIFIED

    def required_kappa_trace(self) -> list[float]:
        if self.trace:
            return [r.required_kappa for r in self.trace if r.required_kappa is not None]
        return [r.sup_kappa for r in self.per_radius if r.sample_count]

    def to_dict(self) -> dict[str, Any]:
        witness = None
        if self.witness is not None:
            witness = {
                "x": [p.to_str() for p in self.witness.x_path],
                "y": [p.to_str() for p in self.witness.y_path],
            }
        return {
            "center": self.center.to_dict(),
            "verdict": self.verdict.value,
            "kappa_hat": _num(self.kappa_hat),
            "source": self.source,
            "radius_schedule": self.radius_schedule,
            "per_radius": [r.to_dict() for r in self.per_radius],
            "witness": witness,
            "trace": [r.to_dict() for r in self.trace],
            "kappa_grid": self.kappa_grid,
            "sample_count": self.sample_count,
            "infinite_flags": self.infinite_flags,
            "reason": self.reason,
        }
