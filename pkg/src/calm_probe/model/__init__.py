"""Polynomial expressions and bilevel model data."""

from calm_probe.model.bilevel import (
    BilevelModel,
    FormTag,
    ParametricPath,
    Point,
    eval_F,
    eval_path,
    instantiate,
    project_to_upper,
    upper_feasible,
)
from calm_probe.model.builtins import BUILTIN_NAMES, load_builtin, random_fully_linear
from calm_probe.model.parser import parse_model, parse_poly, serialize_model
from calm_probe.model.poly import Poly

__all__ = [
    "BUILTIN_NAMES",
    "BilevelModel",
    "FormTag",
    "ParametricPath",
    "Point",
    "Poly",
    "eval_F",
    "eval_path",
    "instantiate",
    "load_builtin",
    "parse_model",
    "parse_poly",
    "project_to_upper",
    "random_fully_linear",
    "serialize_model",
    "upper_feasible",
]
