"""Finite-sample trend rule shared by the ratio probes and the falsifier."""

import math
from collections.abc import Sequence

from calm_probe.analysis.results import Trend
from calm_probe.core.config import DEFAULT_SETTINGS, ProbeSettings

# Traces whose values all stay below this are treated as identically zero.
NEGLIGIBLE = 1e-9


def classify_trend(values: Sequence[float], settings: ProbeSettings = DEFAULT_SETTINGS) -> Trend:
    """
    Classify a trace ordered from the largest radius (or t) to the smallest.

    Diverging: the last value exceeds growth_factor times the first,
    exceeds divergence_floor, and is the largest value of the trace.
    Bounded: max <= bounded_spread * min, or every value is negligible.
    Anything else is Inconclusive.
    """
    trace = [v for v in values if not math.isnan(v)]
    if not trace:
        return Trend.INCONCLUSIVE
    first, last = trace[0], trace[-1]
    top, bottom = max(trace), min(trace)
    if (
        last > settings.growth_factor * first
        and last > settings.divergence_floor
        and last >= top
    ):
        return Trend.DIVERGING
    if top <= NEGLIGIBLE or (math.isfinite(top) and top <= settings.bounded_spread * bottom):
        return Trend.BOUNDED
    return Trend.INCONCLUSIVE


def is_nondecreasing(values: Sequence[float], rel: float = 1e-9) -> bool:
    """Whether each value is at least the previous one, up to a relative slack."""
    return all(b >= a - rel * max(1.0, abs(a)) for a, b in zip(values, values[1:], strict=False))
