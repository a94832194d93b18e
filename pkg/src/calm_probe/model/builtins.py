"""Bundled models and the seeded random fully-linear generator."""

import logging
from importlib import resources

import numpy as np

from calm_probe.core.exceptions import ModelError, UnknownBuiltinError
from calm_probe.core.models import LpProblem, Polyhedron
from calm_probe.core.simplex import solve_lp
from calm_probe.model.bilevel import (
    BilevelModel,
    FormTag,
    Point,
    Relation,
    UpperConstraint,
    x_names,
    y_names,
)
from calm_probe.model.parser import parse_model
from calm_probe.model.poly import Poly

logger = logging.getLogger(__name__)

BUNDLED_MODELS = ("example-4-2", "example-4-3-center", "example-4-4", "example-4-5")
RANDOM_MODEL = "fully-linear-random"
BUILTIN_NAMES = (*BUNDLED_MODELS, RANDOM_MODEL)

_MAX_DRAWS = 1000


def builtin_text(name: str) -> str:
    """Raw model-file text of a bundled model."""
    if name not in BUNDLED_MODELS:
        raise UnknownBuiltinError(name)
    return (resources.files("calm_probe.model") / "data" / f"{name}.model").read_text(
        encoding="utf-8"
    )


def load_builtin(name: str, seed: int | None = None) -> BilevelModel:
    """
    Load a builtin model by name.

    Args:
        name: One of BUILTIN_NAMES.
        seed: Generator seed, used only by the random model.

    Raises:
        UnknownBuiltinError: If the name is not known.
    """
    if name == RANDOM_MODEL:
        return random_fully_linear(0 if seed is None else seed)
    return parse_model(builtin_text(name), name=name)


def _affine(constant: float, slopes: np.ndarray) -> Poly:
    poly = Poly.constant(float(constant))
    for name, slope in zip(x_names(slopes.size), slopes, strict=True):
        poly = poly + float(slope) * Poly.variable(name)
    return poly


def random_fully_linear(seed: int) -> BilevelModel:
    """
    Draw a fully-linear model with integer coefficients in [-3, 3].

    Sizes satisfy n <= 2, m <= 3, q <= 4. Draws whose lower level at
    x = 0 is empty or unbounded are rejected. X is the box [-2, 2]^n and
    the candidate is x = 0 together with the simplex solution at x = 0.

    Raises:
        ModelError: If no acceptable draw is found.
    """
    rng = np.random.default_rng(seed)
    for draw in range(_MAX_DRAWS):
        n = int(rng.integers(1, 3))
        m = int(rng.integers(1, 4))
        q = int(rng.integers(m, 5))
        c = rng.integers(-3, 4, size=m).astype(float)
        B = rng.integers(-3, 4, size=(q, m)).astype(float)
        A0 = rng.integers(-3, 4, size=q).astype(float)
        A1 = rng.integers(-3, 4, size=(q, n)).astype(float)
        F_x = rng.integers(-3, 4, size=n).astype(float)
        F_y = rng.integers(-3, 4, size=m).astype(float)

        outcome = solve_lp(LpProblem(c, Polyhedron.build(m, ineq_matrix=B, ineq_rhs=-A0)))
        if not outcome.is_optimal or outcome.primal_point is None:
            continue

        upper_objective = _affine(0.0, F_x)
        for name, coef in zip(y_names(m), F_y, strict=True):
            upper_objective = upper_objective + float(coef) * Poly.variable(name)
        box = [
            UpperConstraint(sign * Poly.variable(name) - 2.0, Relation.LE)
            for name in x_names(n)
            for sign in (1.0, -1.0)
        ]
        logger.debug("Random fully-linear model accepted after %d draws", draw + 1)
        return BilevelModel.create(
            n=n,
            m=m,
            q=q,
            upper_objective=upper_objective,
            upper_constraints=box,
            ll_objective=[Poly.constant(float(v)) for v in c],
            ll_A=[_affine(A0[j], A1[j]) for j in range(q)],
            ll_B=[[Poly.constant(float(v)) for v in row] for row in B],
            form_tag=FormTag.FULLY_LINEAR,
            candidate=Point.of(np.zeros(n), outcome.primal_point),
            name=f"{RANDOM_MODEL}[seed={seed}]",
        )
    raise ModelError(f"No bounded fully-linear instance found for seed {seed}")
