"""Expression trees for DAE right-hand sides.

A small recursive-descent parser turns strings such as ``"exp(-z1) + x2^2"``
into immutable trees.  Trees can be printed back, evaluated at a point and
differentiated symbolically; repeated differentiation gives exact mixed
partials of any order, which is what the Taylor coefficient extraction needs.

Grammar::

    expr   := term (("+"|"-") term)*
    term   := factor (("*"|"/") factor)*
    factor := "-" factor | base ("^" integer)?
    base   := number | ident | "(" expr ")" | func "(" expr ")"
    func   := "sin" | "cos" | "tan" | "exp"
"""
from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Mapping, Sequence, Union

from .errors import DomainError, ModelError, ParseError

FUNCTIONS = ("sin", "cos", "tan", "exp")

# |cos(u)| below this is treated as a tan pole
_TAN_POLE_TOL = 1e-15


class Expr:
    """Base class of all expression nodes.  Nodes are frozen dataclasses."""

    def __str__(self):
        return to_string(self)

    def __add__(self, other):
        return add(self, _coerce(other))

    def __radd__(self, other):
        return add(_coerce(other), self)

    def __sub__(self, other):
        return sub(self, _coerce(other))

    def __rsub__(self, other):
        return sub(_coerce(other), self)

    def __mul__(self, other):
        return mul(self, _coerce(other))

    def __rmul__(self, other):
        return mul(_coerce(other), self)

    def __truediv__(self, other):
        return div(self, _coerce(other))

    def __neg__(self):
        return neg(self)


@dataclass(frozen=True)
class Const(Expr):
    value: float


@dataclass(frozen=True)
class Var(Expr):
    name: str


@dataclass(frozen=True)
class Neg(Expr):
    arg: Expr


@dataclass(frozen=True)
class Func(Expr):
    name: str
    arg: Expr


@dataclass(frozen=True)
class BinOp(Expr):
    op: str  # one of + - * /
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Pow(Expr):
    base: Expr
    exponent: int


def _coerce(value) -> Expr:
    if isinstance(value, Expr):
        return value
    return Const(float(value))


# ---------------------------------------------------------------------------
# Tokenizer and parser

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<number>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<ident>[a-zA-Z][a-zA-Z0-9_]*)"
    r"|(?P<op>[-+*/^()]))"
)


@dataclass
class _Token:
    kind: str
    text: str
    pos: int


def _tokenize(text: str) -> list[_Token]:
    tokens = []
    pos = 0
    n = len(text)
    while pos < n:
        if text[pos].isspace():
            pos += 1
            continue
        m = _TOKEN_RE.match(text, pos)
        if m is None or m.end() == pos:
            raise ParseError(f"unexpected character {text[pos]!r}", pos, text)
        kind = m.lastgroup
        start = m.start(kind)
        tokens.append(_Token(kind, m.group(kind), start))
        pos = m.end()
    tokens.append(_Token("end", "", n))
    return tokens


class _Parser:
    def __init__(self, text: str, variables=None):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0
        self.variables = None if variables is None else set(variables)

    def peek(self) -> _Token:
        return self.tokens[self.i]

    def take(self) -> _Token:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, text: str) -> _Token:
        tok = self.take()
        if tok.text != text:
            found = tok.text or "end of input"
            raise ParseError(f"expected {text!r}, found {found!r}", tok.pos, self.text)
        return tok

    def parse(self) -> Expr:
        e = self.expr()
        tok = self.peek()
        if tok.kind != "end":
            raise ParseError(f"unexpected token {tok.text!r}", tok.pos, self.text)
        return e

    def expr(self) -> Expr:
        e = self.term()
        while self.peek().text in ("+", "-"):
            op = self.take().text
            e = BinOp(op, e, self.term())
        return e

    def term(self) -> Expr:
        e = self.factor()
        while self.peek().text in ("*", "/"):
            op = self.take().text
            e = BinOp(op, e, self.factor())
        return e

    def factor(self) -> Expr:
        # unary minus binds looser than "^", so -x^2 is -(x^2)
        if self.peek().text == "-":
            self.take()
            return Neg(self.factor())
        b = self.base()
        if self.peek().text == "^":
            self.take()
            tok = self.take()
            if tok.kind != "number" or not re.fullmatch(r"\d+", tok.text):
                raise ParseError(
                    "exponent must be a non-negative integer literal", tok.pos, self.text
                )
            b = Pow(b, int(tok.text))
        return b

    def base(self) -> Expr:
        tok = self.take()
        if tok.kind == "number":
            return Const(float(tok.text))
        if tok.text == "(":
            e = self.expr()
            self.expect(")")
            return e
        if tok.kind == "ident":
            if self.peek().text == "(":
                if tok.text not in FUNCTIONS:
                    raise ParseError(f"unknown function {tok.text!r}", tok.pos, self.text)
                self.take()
                arg = self.expr()
                self.expect(")")
                return Func(tok.text, arg)
            if tok.text in FUNCTIONS:
                raise ParseError(f"function {tok.text!r} needs an argument", tok.pos, self.text)
            if self.variables is not None and tok.text not in self.variables:
                raise ParseError(f"unknown variable {tok.text!r}", tok.pos, self.text)
            return Var(tok.text)
        found = tok.text or "end of input"
        raise ParseError(f"unexpected token {found!r}", tok.pos, self.text)


def parse_expr(text: str, variables: Sequence[str] | None = None) -> Expr:
    """Parse an expression string.

    If ``variables`` is given, identifiers outside it are rejected.
    """
    return _Parser(text, variables).parse()


# ---------------------------------------------------------------------------
# Printer

def _fmt_number(v: float) -> str:
    if v == int(v) and abs(v) < 1e15:
        s = str(int(v))
    else:
        s = repr(float(v))
    return f"({s})" if v < 0 else s


def _as_base(e: Expr) -> str:
    if isinstance(e, (Const, Var, Func)):
        return to_string(e)
    return f"({to_string(e)})"


def _as_factor(e: Expr) -> str:
    if isinstance(e, (Pow, Neg)):
        return to_string(e)
    return _as_base(e)


def _as_term(e: Expr) -> str:
    if isinstance(e, BinOp) and e.op in "+-":
        return f"({to_string(e)})"
    return to_string(e)


def to_string(e: Expr) -> str:
    """Print ``e`` in the input grammar; ``parse_expr(to_string(e))`` rebuilds it."""
    if isinstance(e, Const):
        return _fmt_number(e.value)
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Func):
        return f"{e.name}({to_string(e.arg)})"
    if isinstance(e, Neg):
        if isinstance(e.arg, (Var, Func, Pow)) or (isinstance(e.arg, Const) and e.arg.value >= 0):
            return "-" + to_string(e.arg)
        return f"-({to_string(e.arg)})"
    if isinstance(e, Pow):
        return f"{_as_base(e.base)}^{e.exponent}"
    if isinstance(e, BinOp):
        if e.op in "+-":
            return f"{to_string(e.left)} {e.op} {_as_term(e.right)}"
        return f"{_as_term(e.left)}{e.op}{_as_factor(e.right)}"
    raise TypeError(f"not an expression node: {e!r}")


def variables(e: Expr) -> set[str]:
    """Names of all variables referenced by ``e``."""
    if isinstance(e, Var):
        return {e.name}
    if isinstance(e, Const):
        return set()
    if isinstance(e, (Neg, Func)):
        return variables(e.arg)
    if isinstance(e, Pow):
        return variables(e.base)
    return variables(e.left) | variables(e.right)


# ---------------------------------------------------------------------------
# Evaluation

def _tan(u: float) -> float:
    if abs(math.cos(u)) < _TAN_POLE_TOL:
        raise DomainError(f"tan pole at {u!r}")
    return math.tan(u)


def _exp(u: float) -> float:
    try:
        return math.exp(u)
    except OverflowError:
        raise DomainError(f"exp overflow at {u!r}") from None


_FUNC_IMPL = {"sin": math.sin, "cos": math.cos, "tan": _tan, "exp": _exp}


def _checked(v: float) -> float:
    if not math.isfinite(v):
        raise DomainError("non-finite intermediate value")
    return v


def _div(a: float, b: float) -> float:
    if b == 0.0:
        raise DomainError("division by zero")
    return _checked(a / b)


def _pow(a: float, n: int) -> float:
    try:
        return _checked(a**n)
    except OverflowError:
        raise DomainError("overflow in power") from None


def evaluate(e: Expr, point: Mapping[str, float]) -> float:
    """Evaluate ``e`` in IEEE double precision at ``point`` (name -> value)."""
    if isinstance(e, Const):
        return e.value
    if isinstance(e, Var):
        try:
            return float(point[e.name])
        except KeyError:
            raise ModelError(f"unbound variable {e.name!r}") from None
    if isinstance(e, Neg):
        return -evaluate(e.arg, point)
    if isinstance(e, Func):
        return _FUNC_IMPL[e.name](evaluate(e.arg, point))
    if isinstance(e, Pow):
        return _pow(evaluate(e.base, point), e.exponent)
    a = evaluate(e.left, point)
    b = evaluate(e.right, point)
    if e.op == "+":
        return _checked(a + b)
    if e.op == "-":
        return _checked(a - b)
    if e.op == "*":
        return _checked(a * b)
    return _div(a, b)


# ``eval`` is the natural name but shadows the builtin inside this module
eval_expr = evaluate


def compile_expr(e: Expr, names: Sequence[str]) -> Callable[[Sequence[float]], float]:
    """Turn ``e`` into a closure over a positional value vector.

    Same semantics as :func:`evaluate` but avoids the per-call dict lookup,
    which matters inside the simulator's Newton loops.
    """
    index = {n: i for i, n in enumerate(names)}

    def build(node):
        if isinstance(node, Const):
            c = node.value
            return lambda v: c
        if isinstance(node, Var):
            if node.name not in index:
                raise ModelError(f"unbound variable {node.name!r}")
            k = index[node.name]
            return lambda v: v[k]
        if isinstance(node, Neg):
            f = build(node.arg)
            return lambda v: -f(v)
        if isinstance(node, Func):
            f = build(node.arg)
            impl = _FUNC_IMPL[node.name]
            return lambda v: impl(f(v))
        if isinstance(node, Pow):
            f = build(node.base)
            n = node.exponent
            return lambda v: _pow(f(v), n)
        fl, fr = build(node.left), build(node.right)
        if node.op == "+":
            return lambda v: _checked(fl(v) + fr(v))
        if node.op == "-":
            return lambda v: _checked(fl(v) - fr(v))
        if node.op == "*":
            return lambda v: _checked(fl(v) * fr(v))
        return lambda v: _div(fl(v), fr(v))

    return build(e)


# ---------------------------------------------------------------------------
# Light simplification and differentiation

ZERO = Const(0.0)
ONE = Const(1.0)


def _is_const(e, value=None):
    return isinstance(e, Const) and (value is None or e.value == value)


def neg(a: Expr) -> Expr:
    if isinstance(a, Const):
        return Const(-a.value)
    if isinstance(a, Neg):
        return a.arg
    return Neg(a)


def add(a: Expr, b: Expr) -> Expr:
    if _is_const(a) and _is_const(b):
        return Const(a.value + b.value)
    if _is_const(a, 0.0):
        return b
    if _is_const(b, 0.0):
        return a
    if isinstance(b, Neg):
        return BinOp("-", a, b.arg)
    return BinOp("+", a, b)


def sub(a: Expr, b: Expr) -> Expr:
    if _is_const(a) and _is_const(b):
        return Const(a.value - b.value)
    if _is_const(b, 0.0):
        return a
    if _is_const(a, 0.0):
        return neg(b)
    if isinstance(b, Neg):
        return BinOp("+", a, b.arg)
    return BinOp("-", a, b)


def mul(a: Expr, b: Expr) -> Expr:
    if _is_const(a) and _is_const(b):
        return Const(a.value * b.value)
    if _is_const(a, 0.0) or _is_const(b, 0.0):
        return ZERO
    if _is_const(a, 1.0):
        return b
    if _is_const(b, 1.0):
        return a
    if _is_const(a, -1.0):
        return neg(b)
    if _is_const(b, -1.0):
        return neg(a)
    if isinstance(a, Neg):
        return neg(mul(a.arg, b))
    if isinstance(b, Neg):
        return neg(mul(a, b.arg))
    return BinOp("*", a, b)


def div(a: Expr, b: Expr) -> Expr:
    if _is_const(b, 0.0):
        raise DomainError("division by constant zero")
    if _is_const(a, 0.0):
        return ZERO
    if _is_const(b, 1.0):
        return a
    if _is_const(a) and _is_const(b):
        return Const(a.value / b.value)
    return BinOp("/", a, b)


def power(a: Expr, n: int) -> Expr:
    if n == 0:
        return ONE
    if n == 1:
        return a
    if _is_const(a):
        return Const(a.value**n)
    return Pow(a, n)


def differentiate(e: Expr, v: str) -> Expr:
    """Exact symbolic derivative of ``e`` with respect to variable ``v``."""
    if isinstance(e, Const):
        return ZERO
    if isinstance(e, Var):
        return ONE if e.name == v else ZERO
    if isinstance(e, Neg):
        return neg(differentiate(e.arg, v))
    if isinstance(e, Func):
        du = differentiate(e.arg, v)
        if _is_const(du, 0.0):
            return ZERO
        u = e.arg
        if e.name == "sin":
            return mul(du, Func("cos", u))
        if e.name == "cos":
            return neg(mul(du, Func("sin", u)))
        if e.name == "tan":
            return mul(du, add(ONE, power(Func("tan", u), 2)))
        return mul(du, e)  # exp
    if isinstance(e, Pow):
        du = differentiate(e.base, v)
        if _is_const(du, 0.0) or e.exponent == 0:
            return ZERO
        n = e.exponent
        return mul(mul(Const(float(n)), power(e.base, n - 1)), du)
    da = differentiate(e.left, v)
    db = differentiate(e.right, v)
    if e.op == "+":
        return add(da, db)
    if e.op == "-":
        return sub(da, db)
    if e.op == "*":
        return add(mul(da, e.right), mul(e.left, db))
    # quotient rule, kept as du/v - u*dv/v^2 so constant denominators stay simple
    first = div(da, e.right)
    if _is_const(db, 0.0):
        return first
    return sub(first, div(mul(e.left, db), power(e.right, 2)))


def partial(e: Expr, names: Sequence[str]) -> Expr:
    """Mixed partial of ``e`` w.r.t. each variable in ``names`` in turn."""
    for n in names:
        e = differentiate(e, n)
    return e


# ---------------------------------------------------------------------------
# Model documents

_IDENT_RE = re.compile(r"[a-zA-Z][a-zA-Z0-9_]*\Z")


def _check_names(names: Sequence[str]):
    for n in names:
        if not isinstance(n, str) or not _IDENT_RE.match(n) or n in FUNCTIONS:
            raise ModelError(f"invalid identifier {n!r}")
    if len(set(names)) != len(names):
        raise ModelError("duplicate variable names across states and algebraics")


@dataclass(frozen=True)
class ModelSpec:
    """A semi-explicit DAE ``x' = g(x, z)``, ``0 = h(x, z)``."""

    name: str
    states: tuple[str, ...]
    algebraics: tuple[str, ...]
    odes: tuple[Expr, ...]
    constraints: tuple[Expr, ...]
    guess_x: tuple[float, ...]
    guess_z: tuple[float, ...]
    comment: str = field(default="", compare=False)

    @property
    def N(self) -> int:
        return len(self.states)

    @property
    def M(self) -> int:
        return len(self.algebraics)

    @property
    def names(self) -> tuple[str, ...]:
        return self.states + self.algebraics

    def __post_init__(self):
        if not self.states:
            raise ModelError("empty system: at least one state is required")
        if len(self.odes) != len(self.states):
            raise ModelError(
                f"{len(self.states)} states but {len(self.odes)} ode right-hand sides"
            )
        if len(self.constraints) != len(self.algebraics):
            raise ModelError(
                f"{len(self.algebraics)} algebraic variables but "
                f"{len(self.constraints)} constraints"
            )
        names = self.states + self.algebraics
        _check_names(names)
        if len(self.guess_x) != self.N or len(self.guess_z) != self.M:
            raise ModelError("guess dimensions do not match states/algebraics")
        known = set(names)
        for e in self.odes + self.constraints:
            unknown = variables(e) - known
            if unknown:
                raise ModelError(f"unknown variable(s) {sorted(unknown)}")

    def to_document(self) -> dict:
        doc = {
            "name": self.name,
            "states": list(self.states),
            "algebraics": list(self.algebraics),
            "odes": [to_string(e) for e in self.odes],
            "constraints": [to_string(e) for e in self.constraints],
            "guess": {"x": list(self.guess_x), "z": list(self.guess_z)},
        }
        if self.comment:
            doc["comment"] = self.comment
        return doc


def model_from_document(doc: Mapping) -> ModelSpec:
    """Build a :class:`ModelSpec` from an already-decoded JSON object."""
    if not isinstance(doc, Mapping):
        raise ModelError("model document must be a JSON object")
    for key in ("states", "odes"):
        if key not in doc:
            raise ModelError(f"missing key {key!r}")
    states = tuple(doc["states"])
    algebraics = tuple(doc.get("algebraics", ()))
    names = states + algebraics
    _check_names(names)
    odes = []
    for i, s in enumerate(doc["odes"]):
        try:
            odes.append(parse_expr(s, names))
        except ParseError as exc:
            raise ParseError(f"odes[{i}]: {exc}") from exc
    constraints = []
    for i, s in enumerate(doc.get("constraints", ())):
        try:
            constraints.append(parse_expr(s, names))
        except ParseError as exc:
            raise ParseError(f"constraints[{i}]: {exc}") from exc
    guess = doc.get("guess", {}) or {}
    gx = tuple(float(v) for v in guess.get("x", [0.0] * len(states)))
    gz = tuple(float(v) for v in guess.get("z", [0.0] * len(algebraics)))
    return ModelSpec(
        name=str(doc.get("name", "model")),
        states=states,
        algebraics=algebraics,
        odes=tuple(odes),
        constraints=tuple(constraints),
        guess_x=gx,
        guess_z=gz,
        comment=str(doc.get("comment", "")),
    )


def parse_model(text: str) -> ModelSpec:
    """Parse a JSON model document."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc.msg}", exc.pos, text) from None
    return model_from_document(doc)


def load_model(path: Union[str, Path]) -> ModelSpec:
    return parse_model(Path(path).read_text(encoding="utf-8"))
