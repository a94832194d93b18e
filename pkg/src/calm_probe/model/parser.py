"""
Parser and serializer for polynomial expressions and model files.

Grammar for expressions:

    expr   := term (("+" | "-") term)*
    term   := unary ("*" unary)*
    unary  := ("+" | "-") unary | power
    power  := atom ("^" INTEGER)?
    atom   := NUMBER | NAME | "(" expr ")"

Model files are split into bracketed sections; see `parse_model`.
"""

import re
from collections.abc import Callable, Collection
from dataclasses import dataclass

import numpy as np

from calm_probe.core.config import dyadic_schedule, harmonic_schedule, merge_schedules
from calm_probe.core.exceptions import (
    DimensionError,
    ModelSyntaxError,
    NonPolynomialExpressionError,
)
from calm_probe.model.bilevel import (
    BilevelModel,
    FormTag,
    ParametricPath,
    Point,
    Relation,
    UpperConstraint,
    x_names,
    y_names,
)
from calm_probe.model.poly import ZERO, Poly

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<number>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<op>\*\*|[-+*^()/,\[\]])"
    r"|(?P<bad>\S))"
)

_NON_POLYNOMIAL_OPS = {"/"}


@dataclass
class _Token:
    kind: str  # number | name | op | end
    text: str
    column: int


def _tokenize(text: str, line: int, offset: int) -> list[_Token]:
    tokens: list[_Token] = []
    pos = 0
    while pos < len(text):
        match = _TOKEN_RE.match(text, pos)
        if match is None or match.end() == pos:
            break
        pos = match.end()
        kind = match.lastgroup or "bad"
        value = match.group(kind)
        column = offset + match.start(kind) + 1
        if kind == "bad":
            raise ModelSyntaxError(f"Unexpected character {value!r}", line, column)
        tokens.append(_Token(kind, value, column))
    tokens.append(_Token("end", "", offset + len(text) + 1))
    return tokens


class _ExpressionParser:
    """Recursive-descent parser producing `Poly` values."""

    def __init__(
        self, text: str, allowed: Collection[str] | None, line: int = 0, offset: int = 0
    ):
        self.tokens = _tokenize(text, line, offset)
        self.pos = 0
        self.allowed = allowed
        self.line = line

    def _peek(self) -> _Token:
        return self.tokens[self.pos]

    def _next(self) -> _Token:
        token = self.tokens[self.pos]
        self.pos += 1
        return token

    def _error(self, message: str, token: _Token) -> ModelSyntaxError:
        return ModelSyntaxError(message, self.line, token.column)

    def parse(self) -> Poly:
        result = self._expr()
        token = self._peek()
        if token.kind != "end":
            if token.text in _NON_POLYNOMIAL_OPS:
                raise NonPolynomialExpressionError(
                    f"line {self.line}, column {token.column}: division is not polynomial"
                )
            raise self._error(f"Unexpected {token.text!r}", token)
        return result

    def _expr(self) -> Poly:
        result = self._term()
        while self._peek().text in ("+", "-") and self._peek().kind == "op":
            op = self._next().text
            rhs = self._term()
            result = result + rhs if op == "+" else result - rhs
        return result

    def _term(self) -> Poly:
        result = self._unary()
        while self._peek().kind == "op" and self._peek().text == "*":
            self._next()
            result = result * self._unary()
        token = self._peek()
        if token.kind == "op" and token.text in _NON_POLYNOMIAL_OPS:
            raise NonPolynomialExpressionError(
                f"line {self.line}, column {token.column}: division is not polynomial"
            )
        return result

    def _unary(self) -> Poly:
        token = self._peek()
        if token.kind == "op" and token.text in ("+", "-"):
            self._next()
            operand = self._unary()
            return -operand if token.text == "-" else operand
        return self._power()

    def _power(self) -> Poly:
        base = self._atom()
        token = self._peek()
        if token.kind == "op" and token.text in ("^", "**"):
            self._next()
            exp_token = self._next()
            if exp_token.kind == "op" and exp_token.text == "-":
                raise NonPolynomialExpressionError(
                    f"line {self.line}, column {exp_token.column}: negative exponent"
                )
            if exp_token.kind != "number":
                raise self._error("Exponent must be an integer literal", exp_token)
            if not re.fullmatch(r"\d+", exp_token.text):
                raise NonPolynomialExpressionError(
                    f"line {self.line}, column {exp_token.column}: "
                    f"non-integer exponent {exp_token.text}"
                )
            return base ** int(exp_token.text)
        return base

    def _atom(self) -> Poly:
        token = self._next()
        if token.kind == "number":
            return Poly.constant(float(token.text))
        if token.kind == "name":
            if self._peek().kind == "op" and self._peek().text == "(":
                raise NonPolynomialExpressionError(
                    f"line {self.line}, column {token.column}: function {token.text}() "
                    "is not polynomial"
                )
            if self.allowed is not None and token.text not in self.allowed:
                allowed = ", ".join(sorted(self.allowed)) or "none"
                raise self._error(
                    f"Unknown variable {token.text!r} (allowed: {allowed})", token
                )
            return Poly.variable(token.text)
        if token.kind == "op" and token.text == "(":
            inner = self._expr()
            closing = self._next()
            if closing.text != ")":
                raise self._error("Expected ')'", closing)
            return inner
        if token.kind == "end":
            raise self._error("Unexpected end of expression", token)
        raise self._error(f"Unexpected {token.text!r}", token)


def parse_poly(
    text: str, allowed: Collection[str] | None = None, line: int = 0, offset: int = 0
) -> Poly:
    """
    Parse a polynomial expression.

    Args:
        text: Expression text.
        allowed: Variable names that may appear; None allows any name.
        line: Line number used in error messages.
        offset: Column offset of `text` within its line.

    Raises:
        ModelSyntaxError: For malformed input or unknown variables.
        NonPolynomialExpressionError: For division, function calls or
            non-integer exponents.
    """
    return _ExpressionParser(text, allowed, line, offset).parse()


# Model files

_SECTION_RE = re.compile(r"^\[\s*([A-Za-z.]+)\s*\]$")
_ASSIGN_RE = re.compile(r"(\w+)\s*=\s*([\w.+-]+)")
_C_RE = re.compile(r"^c\[(\d+)\]\s*=\s*(.*)$")
_A_RE = re.compile(r"^A\[(\d+)\]\s*=\s*(.*)$")
_B_RE = re.compile(r"^B\[(\d+)\]\[(\d+)\]\s*=\s*(.*)$")
_PATH_RE = re.compile(r"^([xy])\[(\d+)\]\(t\)\s*=\s*(.*)$")
_VECTOR_RE = re.compile(r"([xy])\s*=\s*\(([^)]*)\)")
_SCHEDULE_RE = re.compile(r"^(dyadic|harmonic)\(\s*(\d+)\s*,\s*(\d+)\s*\)$")
_SCHEDULE_JOIN_RE = re.compile(r"(?<=\))\s*\+\s*")

_SECTIONS = {"dims", "upper", "lower.objective", "lower.constraints", "candidate", "path"}


@dataclass
class _Line:
    number: int
    text: str
    column: int  # 1-based column of the first non-blank character


@dataclass
class _PathDraft:
    line: int
    x: dict[int, Poly]
    y: dict[int, Poly]
    schedule: tuple[float, ...] | None = None


def _split_sections(text: str) -> list[tuple[str, _Line, list[_Line]]]:
    sections: list[tuple[str, _Line, list[_Line]]] = []
    for number, raw in enumerate(text.splitlines(), start=1):
        stripped = raw.split("#", 1)[0].rstrip()
        if not stripped.strip():
            continue
        column = len(stripped) - len(stripped.lstrip()) + 1
        line = _Line(number, stripped.strip(), column)
        header = _SECTION_RE.match(line.text)
        if header:
            name = header.group(1).lower()
            if name not in _SECTIONS:
                raise ModelSyntaxError(f"Unknown section [{name}]", number, column)
            sections.append((name, line, []))
        elif not sections:
            raise ModelSyntaxError("Content before the first section", number, column)
        else:
            sections[-1][2].append(line)
    return sections


def _parse_schedule(value: str, line: _Line) -> tuple[float, ...]:
    value = value.strip()
    parts = _SCHEDULE_JOIN_RE.split(value)
    if len(parts) > 1:
        return merge_schedules(*(_parse_schedule(part, line) for part in parts))
    match = _SCHEDULE_RE.match(value)
    if match:
        kind, first, last = match.group(1), int(match.group(2)), int(match.group(3))
        return dyadic_schedule(first, last) if kind == "dyadic" else harmonic_schedule(first, last)
    try:
        return tuple(float(v) for v in value.split(","))
    except ValueError as e:
        raise ModelSyntaxError(f"Bad schedule {value!r}", line.number, line.column) from e


def _expr_after(line: _Line, rest: str, allowed: Collection[str]) -> Poly:
    offset = line.column - 1 + line.text.rfind(rest) if rest else line.column - 1
    return parse_poly(rest, allowed, line.number, offset)


def _index(raw: str, size: int, what: str, line: _Line) -> int:
    idx = int(raw)
    if not 1 <= idx <= size:
        raise DimensionError(f"line {line.number}: {what} index {idx} outside 1..{size}")
    return idx - 1


def parse_model(text: str, name: str = "") -> BilevelModel:
    """
    Parse a model file.

    Sections (all indices 1-based, missing entries default to 0):

        [dims]              n = .., m = .., q = .. (one line or several), optional form = ..
        [upper]             F = <poly in x, y>; X: <poly> <= <poly>; X: <poly> = <poly>
        [lower.objective]   c[i] = <poly in x>
        [lower.constraints] A[j] = <poly in x>; B[j][i] = <poly in x>
        [candidate]         x = (..), y = (..)
        [path]              schedule = dyadic(a, b) | harmonic(a, b) | t1, t2, ..
                            (schedule parts may be joined with +)
                            x[i](t) = <poly in t>, y[i](t) = <poly in t>

    Raises:
        ModelSyntaxError: For malformed lines, with line and column.
        DimensionError: For missing or inconsistent dimensions (q = 0 included).
        NonPolynomialExpressionError: For non-polynomial expressions.
        FormNotSupportedError: If a declared form does not match the data.
    """
    sections = _split_sections(text)
    dims: dict[str, int] = {}
    declared_form: FormTag | None = None
    for section, _, lines in sections:
        if section != "dims":
            continue
        for line in lines:
            pairs = _ASSIGN_RE.findall(line.text)
            if not pairs:
                raise ModelSyntaxError("Expected key = value", line.number, line.column)
            for key, value in pairs:
                if key == "form":
                    try:
                        declared_form = FormTag(value.lower())
                    except ValueError as e:
                        raise ModelSyntaxError(
                            f"Unknown form {value!r}", line.number, line.column
                        ) from e
                elif key in ("n", "m", "q"):
                    try:
                        dims[key] = int(value)
                    except ValueError as e:
                        raise ModelSyntaxError(
                            f"Dimension {key} must be an integer", line.number, line.column
                        ) from e
                else:
                    raise ModelSyntaxError(f"Unknown key {key!r}", line.number, line.column)

    for key in ("n", "m", "q"):
        if key not in dims:
            raise DimensionError(f"Missing dimension {key} in [dims]")
    n, m, q = dims["n"], dims["m"], dims["q"]
    if n < 1 or m < 1:
        raise DimensionError("Dimensions n and m must be positive")
    if q < 1:
        raise DimensionError("The lower level needs at least one constraint (q = 0)")

    xs, ys = x_names(n), y_names(m)
    upper_objective = ZERO
    upper: list[UpperConstraint] = []
    c: list[Poly] = [ZERO] * m
    A: list[Poly] = [ZERO] * q
    B: list[list[Poly]] = [[ZERO] * m for _ in range(q)]
    candidate: Point | None = None
    paths: list[_PathDraft] = []

    for section, header, lines in sections:
        if section == "upper":
            for line in lines:
                if line.text.startswith("F"):
                    key, _, rest = line.text.partition("=")
                    if key.strip() != "F":
                        raise ModelSyntaxError("Expected F = <poly>", line.number, line.column)
                    upper_objective = _expr_after(line, rest, [*xs, *ys])
                elif line.text.startswith("X:"):
                    upper.append(_parse_upper_constraint(line, xs))
                else:
                    raise ModelSyntaxError(
                        "Expected 'F = ...' or 'X: ...'", line.number, line.column
                    )
        elif section == "lower.objective":
            for line in lines:
                match = _C_RE.match(line.text)
                if not match:
                    raise ModelSyntaxError("Expected c[i] = <poly>", line.number, line.column)
                c[_index(match.group(1), m, "c", line)] = _expr_after(line, match.group(2), xs)
        elif section == "lower.constraints":
            for line in lines:
                if match := _A_RE.match(line.text):
                    A[_index(match.group(1), q, "A", line)] = _expr_after(
                        line, match.group(2), xs
                    )
                elif match := _B_RE.match(line.text):
                    row = _index(match.group(1), q, "B row", line)
                    col = _index(match.group(2), m, "B column", line)
                    B[row][col] = _expr_after(line, match.group(3), xs)
                else:
                    raise ModelSyntaxError(
                        "Expected A[j] = <poly> or B[j][i] = <poly>", line.number, line.column
                    )
        elif section == "candidate":
            candidate = _parse_candidate(header, lines, n, m)
        elif section == "path":
            paths.append(_parse_path(header, lines, n, m))

    return BilevelModel.create(
        n=n,
        m=m,
        q=q,
        upper_objective=upper_objective,
        upper_constraints=upper,
        ll_objective=c,
        ll_A=A,
        ll_B=B,
        form_tag=declared_form,
        candidate=candidate,
        paths=[
            ParametricPath.create(
                [p.x.get(i, ZERO) for i in range(n)],
                [p.y.get(i, ZERO) for i in range(m)],
                p.schedule or dyadic_schedule(),
            )
            for p in paths
        ],
        name=name,
    )


def _parse_upper_constraint(line: _Line, xs: list[str]) -> UpperConstraint:
    body = line.text[2:]
    base = line.column + 1
    for symbol, relation in (("<=", Relation.LE), (">=", Relation.LE), ("=", Relation.EQ)):
        if symbol in body:
            break
    else:
        raise ModelSyntaxError("Expected '<=' or '=' in X constraint", line.number, line.column)
    lhs, _, rhs = body.partition(symbol)
    lhs_poly = parse_poly(lhs, xs, line.number, base)
    rhs_poly = parse_poly(rhs, xs, line.number, base + len(lhs) + len(symbol))
    # a >= b is stored as b - a <= 0
    poly = rhs_poly - lhs_poly if symbol == ">=" else lhs_poly - rhs_poly
    return UpperConstraint(poly, relation)


def _parse_vector(raw: str, line: _Line) -> list[float]:
    try:
        return [float(v) for v in raw.split(",") if v.strip()]
    except ValueError as e:
        raise ModelSyntaxError(f"Bad vector ({raw})", line.number, line.column) from e


def _parse_candidate(header: _Line, lines: list[_Line], n: int, m: int) -> Point:
    values: dict[str, list[float]] = {}
    for line in lines:
        found = _VECTOR_RE.findall(line.text)
        if not found:
            raise ModelSyntaxError("Expected x = (...) or y = (...)", line.number, line.column)
        for which, raw in found:
            values[which] = _parse_vector(raw, line)
    if "x" not in values or "y" not in values:
        raise ModelSyntaxError("Candidate needs both x and y", header.number, header.column)
    if len(values["x"]) != n or len(values["y"]) != m:
        raise DimensionError(
            f"Candidate has lengths ({len(values['x'])}, {len(values['y'])}), expected ({n}, {m})"
        )
    return Point.of(values["x"], values["y"])


def _parse_path(header: _Line, lines: list[_Line], n: int, m: int) -> _PathDraft:
    draft = _PathDraft(header.number, {}, {})
    for line in lines:
        if line.text.startswith("schedule"):
            _, _, value = line.text.partition("=")
            draft.schedule = _parse_schedule(value, line)
            continue
        for piece in line.text.split(","):
            piece = piece.strip()
            match = _PATH_RE.match(piece)
            if not match:
                raise ModelSyntaxError(
                    "Expected x[i](t) = <poly> or y[i](t) = <poly>", line.number, line.column
                )
            which, raw_idx, expr = match.groups()
            size = n if which == "x" else m
            idx = _index(raw_idx, size, f"path {which}", line)
            poly = parse_poly(expr, ["t"], line.number, line.column - 1 + line.text.find(piece))
            (draft.x if which == "x" else draft.y)[idx] = poly
    return draft


def _format_vector(values: np.ndarray) -> str:
    return ", ".join(repr(float(v)) if not float(v).is_integer() else str(int(v)) for v in values)


def _run(values: set[float], term: Callable[[int], float], starts: range) -> tuple[int, int] | None:
    """Longest run term(first), .., term(last) inside values, from the first start that hits."""
    for first in starts:
        if term(first) in values:
            last = first
            while term(last + 1) in values:
                last += 1
            return first, last
    return None


def _format_schedule(schedule: tuple[float, ...]) -> str:
    values = set(schedule)
    dyadic = _run(values, lambda k: 2.0**-k, range(0, 4))
    harmonic = _run(values, lambda k: 1.0 / k, range(1, 4))
    if dyadic and schedule == dyadic_schedule(*dyadic):
        return f"dyadic({dyadic[0]}, {dyadic[1]})"
    if harmonic and schedule == harmonic_schedule(*harmonic):
        return f"harmonic({harmonic[0]}, {harmonic[1]})"
    if (
        dyadic
        and harmonic
        and schedule == merge_schedules(harmonic_schedule(*harmonic), dyadic_schedule(*dyadic))
    ):
        return f"harmonic({harmonic[0]}, {harmonic[1]}) + dyadic({dyadic[0]}, {dyadic[1]})"
    return ", ".join(repr(t) for t in schedule)


def serialize_model(model: BilevelModel) -> str:
    """Canonical model-file text; `parse_model` of the result gives an equal model."""
    out: list[str] = []
    if model.name:
        out.append(f"# {model.name}")
    out += ["[dims]", f"n = {model.n}", f"m = {model.m}", f"q = {model.q}"]
    out.append(f"form = {model.form_tag.value}")
    out += ["", "[upper]", f"F = {model.upper_objective.to_str()}"]
    for constraint in model.upper_constraints:
        rel = "<=" if constraint.relation == Relation.LE else "="
        out.append(f"X: {constraint.poly.to_str()} {rel} 0")
    out += ["", "[lower.objective]"]
    out += [f"c[{i + 1}] = {p.to_str()}" for i, p in enumerate(model.ll_objective)]
    out += ["", "[lower.constraints]"]
    out += [f"A[{j + 1}] = {p.to_str()}" for j, p in enumerate(model.ll_A) if not p.is_zero]
    for j, row in enumerate(model.ll_B):
        out += [f"B[{j + 1}][{i + 1}] = {p.to_str()}" for i, p in enumerate(row) if not p.is_zero]
    if model.candidate is not None:
        out += [
            "",
            "[candidate]",
            f"x = ({_format_vector(model.candidate.x)})",
            f"y = ({_format_vector(model.candidate.y)})",
        ]
    for path in model.paths:
        out += ["", "[path]", f"schedule = {_format_schedule(path.t_schedule)}"]
        out += [f"x[{i + 1}](t) = {p.to_str()}" for i, p in enumerate(path.x_path)]
        out += [f"y[{i + 1}](t) = {p.to_str()}" for i, p in enumerate(path.y_path)]
    return "\n".join(out) + "\n"
