"""Value function, certificates, falsifier and the command dispatcher."""

from calm_probe.analysis.certificates import (
    Omega,
    condition_summary,
    constant_rank_check,
    inner_semicontinuity_probe,
    luwsmc_probe,
    model_uwsm_modulus,
    r_regularity_probe,
    relaxed_dual_bound,
    uwsm_inequality_check,
    uwsm_modulus,
    uwsm_modulus_sweep,
)
from calm_probe.analysis.dispatcher import AnalysisDispatcher, run_command
from calm_probe.analysis.falsifier import (
    path_falsify,
    penalized_objective,
    required_kappa_sweep,
    verify_center,
)
from calm_probe.analysis.results import CalmnessOutcome, CalmnessVerdict, PhiStatus, PhiValue, Trend
from calm_probe.analysis.value_function import (
    dist_to_solutions,
    domain_coincidence_probe,
    phi,
    solution_face,
)

__all__ = [
    "AnalysisDispatcher",
    "CalmnessOutcome",
    "CalmnessVerdict",
    "Omega",
    "PhiStatus",
    "PhiValue",
    "Trend",
    "condition_summary",
    "constant_rank_check",
    "dist_to_solutions",
    "domain_coincidence_probe",
    "inner_semicontinuity_probe",
    "luwsmc_probe",
    "model_uwsm_modulus",
    "path_falsify",
    "penalized_objective",
    "phi",
    "r_regularity_probe",
    "relaxed_dual_bound",
    "required_kappa_sweep",
    "run_command",
    "solution_face",
    "uwsm_inequality_check",
    "uwsm_modulus",
    "uwsm_modulus_sweep",
    "verify_center",
]
