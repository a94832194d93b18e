"""Sparse multivariate polynomials with real coefficients."""

import re
from collections.abc import Iterable, Mapping
from typing import Union

from calm_probe.core.exceptions import DimensionError

# A monomial is a tuple of (variable, exponent) pairs sorted by variable, exponents > 0.
Monomial = tuple[tuple[str, int], ...]

_VAR_RE = re.compile(r"^([A-Za-z_]+)(\d*)$")

Operand = Union["Poly", int, float]


def variable_key(name: str) -> tuple[str, int]:
    """Sort key that orders x2 before x10."""
    match = _VAR_RE.match(name)
    if not match:
        return (name, 0)
    return (match.group(1), int(match.group(2) or 0))


def _mul_monomials(a: Monomial, b: Monomial) -> Monomial:
    exponents = dict(a)
    for var, exp in b:
        exponents[var] = exponents.get(var, 0) + exp
    return tuple(sorted(exponents.items(), key=lambda item: variable_key(item[0])))


def _format_coefficient(value: float) -> str:
    if float(value).is_integer() and abs(value) < 1e15:
        return str(int(value))
    return repr(float(value))


class Poly:
    """
    Immutable polynomial stored as a mapping monomial -> coefficient.

    Zero coefficients are dropped on construction, so two polynomials
    compare equal exactly when they have the same terms.
    """

    __slots__ = ("_terms",)

    def __init__(self, terms: Mapping[Monomial, float] | None = None):
        cleaned: dict[Monomial, float] = {}
        for mono, coef in (terms or {}).items():
            if coef != 0.0:
                cleaned[mono] = float(coef)
        self._terms = cleaned

    @classmethod
    def constant(cls, value: float) -> "Poly":
        return cls({(): value})

    @classmethod
    def variable(cls, name: str) -> "Poly":
        return cls({((name, 1),): 1.0})

    @classmethod
    def _coerce(cls, other: Operand) -> "Poly":
        if isinstance(other, Poly):
            return other
        return cls.constant(float(other))

    @property
    def terms(self) -> dict[Monomial, float]:
        return dict(self._terms)

    @property
    def variables(self) -> frozenset[str]:
        return frozenset(var for mono in self._terms for var, _ in mono)

    @property
    def is_zero(self) -> bool:
        return not self._terms

    @property
    def is_constant(self) -> bool:
        return all(mono == () for mono in self._terms)

    def constant_value(self) -> float:
        return self._terms.get((), 0.0)

    def degree(self, variables: Iterable[str] | None = None) -> int:
        """Total degree, optionally counting only the given variables."""
        wanted = None if variables is None else set(variables)
        best = 0
        for mono in self._terms:
            best = max(best, sum(e for v, e in mono if wanted is None or v in wanted))
        return best

    def is_affine(self, variables: Iterable[str] | None = None) -> bool:
        return self.degree(variables) <= 1

    def depends_on(self, variables: Iterable[str]) -> bool:
        return bool(self.variables & set(variables))

    def __add__(self, other: Operand) -> "Poly":
        rhs = Poly._coerce(other)
        out = dict(self._terms)
        for mono, coef in rhs._terms.items():
            out[mono] = out.get(mono, 0.0) + coef
        return Poly(out)

    __radd__ = __add__

    def __neg__(self) -> "Poly":
        return Poly({mono: -coef for mono, coef in self._terms.items()})

    def __sub__(self, other: Operand) -> "Poly":
        return self + (-Poly._coerce(other))

    def __rsub__(self, other: Operand) -> "Poly":
        return Poly._coerce(other) - self

    def __mul__(self, other: Operand) -> "Poly":
        rhs = Poly._coerce(other)
        out: dict[Monomial, float] = {}
        for m1, c1 in self._terms.items():
            for m2, c2 in rhs._terms.items():
                mono = _mul_monomials(m1, m2)
                out[mono] = out.get(mono, 0.0) + c1 * c2
        return Poly(out)

    __rmul__ = __mul__

    def __pow__(self, exponent: int) -> "Poly":
        if not isinstance(exponent, int) or exponent < 0:
            raise ValueError("Polynomial exponents must be nonnegative integers")
        result = Poly.constant(1.0)
        base = self
        while exponent:
            if exponent & 1:
                result = result * base
            base = base * base
            exponent >>= 1
        return result

    def __eq__(self, other: object) -> bool:
        if isinstance(other, (int, float)):
            other = Poly.constant(float(other))
        if not isinstance(other, Poly):
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self) -> int:
        return hash(frozenset(self._terms.items()))

    def evaluate(self, env: Mapping[str, float]) -> float:
        """
        Evaluate at the point given by `env` (variable name -> value).

        Raises:
            DimensionError: If a variable of the polynomial is not bound.
        """
        total = 0.0
        for mono, coef in self._terms.items():
            value = coef
            for var, exp in mono:
                try:
                    value *= float(env[var]) ** exp
                except KeyError as e:
                    raise DimensionError(f"No value for variable {var}") from e
            total += value
        return total

    def derivative(self, var: str) -> "Poly":
        """Exact partial derivative with respect to `var`."""
        out: dict[Monomial, float] = {}
        for mono, coef in self._terms.items():
            exponents = dict(mono)
            exp = exponents.get(var, 0)
            if exp == 0:
                continue
            if exp == 1:
                del exponents[var]
            else:
                exponents[var] = exp - 1
            new_mono = tuple(sorted(exponents.items(), key=lambda item: variable_key(item[0])))
            out[new_mono] = out.get(new_mono, 0.0) + coef * exp
        return Poly(out)

    def _sorted_terms(self) -> list[tuple[Monomial, float]]:
        def key(item: tuple[Monomial, float]) -> tuple[int, list[tuple[tuple[str, int], int]]]:
            mono = item[0]
            return (-sum(e for _, e in mono), [(variable_key(v), -e) for v, e in mono])

        return sorted(self._terms.items(), key=key)

    def to_str(self) -> str:
        """Canonical text form, parseable by `parse_poly`."""
        if not self._terms:
            return "0"
        pieces: list[str] = []
        for mono, coef in self._sorted_terms():
            factors = [v if e == 1 else f"{v}^{e}" for v, e in mono]
            magnitude = abs(coef)
            if factors and magnitude == 1.0:
                body = "*".join(factors)
            else:
                body = "*".join([_format_coefficient(magnitude), *factors])
            if not pieces:
                pieces.append(f"-{body}" if coef < 0 else body)
            else:
                pieces.append(f"- {body}" if coef < 0 else f"+ {body}")
        return " ".join(pieces)

    def __str__(self) -> str:
        return self.to_str()

    def __repr__(self) -> str:
        return f"Poly({self.to_str()!r})"


ZERO = Poly()
ONE = Poly.constant(1.0)
