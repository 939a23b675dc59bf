"""Bivariate expression language: parsing, evaluation, symbolic differentiation.

Grammar (whitespace-insensitive)::

    expr   := term (('+'|'-') term)*
    term   := factor (('*'|'/') factor)*
    factor := ('-')? power
    power  := atom ('^' power)?          # right-associative
    atom   := number | 'x' | 'y' | 'pi' | 'e' | func '(' expr ')' | '(' expr ')'
    func   := sin|cos|tan|exp|log|sqrt|abs|sgn|step

Numbers are decimal with an optional exponent.  step(t) is 1 for t >= 0 and 0
otherwise (closed on the right); sgn(0) = 0.  Expressions are immutable after
construction and evaluation is pure, so they can be shared freely across
threads.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Union

import numpy as np

FUNCTIONS = ("sin", "cos", "tan", "exp", "log", "sqrt", "abs", "sgn", "step")
NONSMOOTH_FUNCTIONS = ("abs", "sgn", "step")
CONSTANTS = {"pi": math.pi, "e": math.e}


class ParseError(ValueError):
    """Syntax or identifier error, with 0-based character position."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.position = position


class EvalDomainError(ArithmeticError):
    """Evaluation left the real domain (log of non-positive, division by zero, ...)."""


# ---------------------------------------------------------------------------
# AST nodes
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Const:
    name: str  # 'pi' | 'e'


@dataclass(frozen=True)
class Var:
    name: str  # 'x' | 'y'


@dataclass(frozen=True)
class Neg:
    arg: "Node"


@dataclass(frozen=True)
class Add:
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Sub:
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Mul:
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Div:
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Pow:
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Call:
    func: str
    arg: "Node"


Node = Union[Num, Const, Var, Neg, Add, Sub, Mul, Div, Pow, Call]


@dataclass(frozen=True)
class EvalPoint:
    x: float
    y: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError(f"evaluation point must be finite, got ({self.x}, {self.y})")


@dataclass(frozen=True)
class Expression:
    """Immutable parsed expression.

    ``smooth`` is False when an abs/sgn/step node is present, and stays False
    on derivatives of such expressions even after the non-smooth node is
    differentiated away (their derivative is taken to be 0 almost everywhere,
    so downstream L2 norms of mixed partials ignore distributional parts).
    """

    root: Node
    smooth: bool

    def __call__(self, x, y):
        """Evaluate at scalars or numpy arrays (broadcasting)."""
        return _eval(self.root, x, y)

    def __str__(self) -> str:
        return _format(self.root)

    def depends_on(self, var: str) -> bool:
        return _depends_on(self.root, var)


def from_root(root: Node) -> Expression:
    return Expression(root, smooth=not _has_nonsmooth(root))


# ---------------------------------------------------------------------------
# Tokenizer / parser
# ---------------------------------------------------------------------------

_NUMBER_RE = re.compile(r"(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?")
_IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z_0-9]*")


class _Tokens:
    def __init__(self, source: str):
        self.source = source
        self.tokens: list[tuple[str, str, int]] = []  # (kind, text, pos)
        i, n = 0, len(source)
        while i < n:
            ch = source[i]
            if ch.isspace():
                i += 1
                continue
            m = _NUMBER_RE.match(source, i)
            if m:
                self.tokens.append(("number", m.group(0), i))
                i = m.end()
                continue
            m = _IDENT_RE.match(source, i)
            if m:
                self.tokens.append(("ident", m.group(0), i))
                i = m.end()
                continue
            if ch in "+-*/^()," :
                self.tokens.append((ch, ch, i))
                i += 1
                continue
            raise ParseError(f"unexpected character {ch!r}", i)
        self.tokens.append(("end", "", n))
        self.index = 0

    def peek(self) -> tuple[str, str, int]:
        return self.tokens[self.index]

    def next(self) -> tuple[str, str, int]:
        tok = self.tokens[self.index]
        self.index += 1
        return tok

    def expect(self, kind: str) -> tuple[str, str, int]:
        tok = self.peek()
        if tok[0] != kind:
            shown = tok[1] if tok[0] != "end" else "end of input"
            raise ParseError(f"expected {kind!r}, found {shown!r}", tok[2])
        return self.next()


def parse(source: str) -> Expression:
    """Parse a source string into an immutable Expression."""
    toks = _Tokens(source)
    root = _parse_expr(toks)
    kind, text, pos = toks.peek()
    if kind != "end":
        raise ParseError(f"unexpected trailing input {text!r}", pos)
    return from_root(root)


def _parse_expr(toks: _Tokens) -> Node:
    node = _parse_term(toks)
    while toks.peek()[0] in ("+", "-"):
        op = toks.next()[0]
        rhs = _parse_term(toks)
        node = Add(node, rhs) if op == "+" else Sub(node, rhs)
    return node


def _parse_term(toks: _Tokens) -> Node:
    node = _parse_factor(toks)
    while toks.peek()[0] in ("*", "/"):
        op = toks.next()[0]
        rhs = _parse_factor(toks)
        node = Mul(node, rhs) if op == "*" else Div(node, rhs)
    return node


def _parse_factor(toks: _Tokens) -> Node:
    if toks.peek()[0] == "-":
        toks.next()
        return Neg(_parse_power(toks))
    return _parse_power(toks)


def _parse_power(toks: _Tokens) -> Node:
    base = _parse_atom(toks)
    if toks.peek()[0] == "^":
        toks.next()
        return Pow(base, _parse_power(toks))
    return base


def _parse_atom(toks: _Tokens) -> Node:
    kind, text, pos = toks.next()
    if kind == "number":
        return Num(float(text))
    if kind == "(":
        inner = _parse_expr(toks)
        toks.expect(")")
        return inner
    if kind == "ident":
        if text in ("x", "y"):
            return Var(text)
        if text in CONSTANTS:
            return Const(text)
        if text in FUNCTIONS:
            toks.expect("(")
            arg = _parse_expr(toks)
            if toks.peek()[0] == ",":
                raise ParseError(
                    f"function {text!r} takes exactly one argument", toks.peek()[2]
                )
            toks.expect(")")
            return Call(text, arg)
        raise ParseError(f"unknown identifier {text!r}", pos)
    shown = text if kind != "end" else "end of input"
    raise ParseError(f"unexpected {shown!r}", pos)


# ---------------------------------------------------------------------------
# Evaluation (scalars or numpy arrays, domain-checked)
# ---------------------------------------------------------------------------


def _eval(node: Node, x, y):
    match node:
        case Num(value=v):
            return v
        case Const(name=name):
            return CONSTANTS[name]
        case Var(name=name):
            return x if name == "x" else y
        case Neg(arg=a):
            return -_eval(a, x, y)
        case Add(left=l, right=r):
            return _eval(l, x, y) + _eval(r, x, y)
        case Sub(left=l, right=r):
            return _eval(l, x, y) - _eval(r, x, y)
        case Mul(left=l, right=r):
            return _eval(l, x, y) * _eval(r, x, y)
        case Div(left=l, right=r):
            num, den = _eval(l, x, y), _eval(r, x, y)
            if np.any(den == 0):
                raise EvalDomainError("division by zero")
            return num / den
        case Pow(left=l, right=r):
            base, expo = _eval(l, x, y), _eval(r, x, y)
            if np.any((base == 0) & (np.asarray(expo) < 0)):
                raise EvalDomainError("zero raised to a negative power")
            fractional = np.asarray(expo) != np.floor(expo)
            if np.any((base < 0) & fractional):
                raise EvalDomainError("negative base with non-integer exponent")
            with np.errstate(over="ignore"):
                return np.power(base, expo)
        case Call(func=f, arg=a):
            v = _eval(a, x, y)
            if f == "sin":
                return np.sin(v)
            if f == "cos":
                return np.cos(v)
            if f == "tan":
                return np.tan(v)
            if f == "exp":
                with np.errstate(over="ignore"):
                    return np.exp(v)
            if f == "log":
                if np.any(v <= 0):
                    raise EvalDomainError("log of non-positive argument")
                return np.log(v)
            if f == "sqrt":
                if np.any(v < 0):
                    raise EvalDomainError("sqrt of negative argument")
                return np.sqrt(v)
            if f == "abs":
                return np.abs(v)
            if f == "sgn":
                return np.sign(v)
            if f == "step":
                return np.where(v >= 0, 1.0, 0.0)
    raise TypeError(f"not an expression node: {node!r}")


def evaluate(e: Expression, p: EvalPoint) -> float:
    """Evaluate at a single point, returning a Python float."""
    return float(_eval(e.root, p.x, p.y))


# ---------------------------------------------------------------------------
# Differentiation
# ---------------------------------------------------------------------------


def _diff(node: Node, var: str) -> Node:
    match node:
        case Num() | Const():
            return Num(0.0)
        case Var(name=name):
            return Num(1.0 if name == var else 0.0)
        case Neg(arg=a):
            return Neg(_diff(a, var))
        case Add(left=l, right=r):
            return Add(_diff(l, var), _diff(r, var))
        case Sub(left=l, right=r):
            return Sub(_diff(l, var), _diff(r, var))
        case Mul(left=l, right=r):
            return Add(Mul(_diff(l, var), r), Mul(l, _diff(r, var)))
        case Div(left=l, right=r):
            num = Sub(Mul(_diff(l, var), r), Mul(l, _diff(r, var)))
            return Div(num, Pow(r, Num(2.0)))
        case Pow(left=l, right=r):
            if isinstance(r, Num):
                # power rule: d(u^n) = n u^(n-1) u'
                return Mul(Mul(r, Pow(l, Num(r.value - 1.0))), _diff(l, var))
            # general u^v via exp(v log u)
            du, dv = _diff(l, var), _diff(r, var)
            return Mul(
                Pow(l, r), Add(Mul(dv, Call("log", l)), Div(Mul(r, du), l))
            )
        case Call(func=f, arg=a):
            da = _diff(a, var)
            if f == "sin":
                return Mul(Call("cos", a), da)
            if f == "cos":
                return Neg(Mul(Call("sin", a), da))
            if f == "tan":
                return Div(da, Pow(Call("cos", a), Num(2.0)))
            if f == "exp":
                return Mul(Call("exp", a), da)
            if f == "log":
                return Div(da, a)
            if f == "sqrt":
                return Div(da, Mul(Num(2.0), Call("sqrt", a)))
            # abs/sgn/step: derivative almost everywhere is 0; the lost
            # smoothness is tracked by Expression.smooth instead.
            return Num(0.0)
    raise TypeError(f"not an expression node: {node!r}")


def differentiate(e: Expression, var: str) -> Expression:
    """Exact symbolic partial derivative with respect to 'x' or 'y', simplified."""
    if var not in ("x", "y"):
        raise ValueError(f"variable must be 'x' or 'y', got {var!r}")
    root = simplify(_diff(e.root, var))
    return Expression(root, smooth=e.smooth and not _has_nonsmooth(root))


def mixed_partial(e: Expression) -> Expression:
    """The cross second derivative d^2 e / dx dy, simplified."""
    return differentiate(differentiate(e, "x"), "y")


# ---------------------------------------------------------------------------
# Simplification: constant folding, 0/1 identities, double negation only
# ---------------------------------------------------------------------------


def _is_num(node: Node, value: float | None = None) -> bool:
    return isinstance(node, Num) and (value is None or node.value == value)


def simplify(node: Node) -> Node:
    match node:
        case Num() | Const() | Var():
            return node
        case Neg(arg=a):
            a = simplify(a)
            if isinstance(a, Neg):
                return a.arg
            if isinstance(a, Num):
                return Num(-a.value)
            return Neg(a)
        case Add(left=l, right=r):
            l, r = simplify(l), simplify(r)
            if _is_num(l, 0.0):
                return r
            if _is_num(r, 0.0):
                return l
            if isinstance(l, Num) and isinstance(r, Num):
                return Num(l.value + r.value)
            return Add(l, r)
        case Sub(left=l, right=r):
            l, r = simplify(l), simplify(r)
            if _is_num(r, 0.0):
                return l
            if _is_num(l, 0.0):
                return simplify(Neg(r))
            if isinstance(l, Num) and isinstance(r, Num):
                return Num(l.value - r.value)
            return Sub(l, r)
        case Mul(left=l, right=r):
            l, r = simplify(l), simplify(r)
            if _is_num(l, 0.0) or _is_num(r, 0.0):
                return Num(0.0)
            if _is_num(l, 1.0):
                return r
            if _is_num(r, 1.0):
                return l
            if isinstance(l, Num) and isinstance(r, Num):
                return Num(l.value * r.value)
            return Mul(l, r)
        case Div(left=l, right=r):
            l, r = simplify(l), simplify(r)
            if _is_num(l, 0.0):
                return Num(0.0)
            if _is_num(r, 1.0):
                return l
            if isinstance(l, Num) and isinstance(r, Num) and r.value != 0:
                return Num(l.value / r.value)
            return Div(l, r)
        case Pow(left=l, right=r):
            l, r = simplify(l), simplify(r)
            if _is_num(r, 1.0):
                return l
            if _is_num(r, 0.0):
                return Num(1.0)
            if isinstance(l, Num) and isinstance(r, Num):
                try:
                    return Num(float(l.value**r.value))
                except (ValueError, OverflowError, ZeroDivisionError):
                    return Pow(l, r)
            return Pow(l, r)
        case Call(func=f, arg=a):
            a = simplify(a)
            if isinstance(a, Num):
                try:
                    return Num(float(_eval(Call(f, a), 0.0, 0.0)))
                except (EvalDomainError, ValueError, OverflowError):
                    return Call(f, a)
            return Call(f, a)
    raise TypeError(f"not an expression node: {node!r}")


# ---------------------------------------------------------------------------
# Pretty printing (round-trips through parse)
# ---------------------------------------------------------------------------

_PREC_ADD = 10
_PREC_MUL = 20
_PREC_NEG = 25
_PREC_POW = 30
_PREC_ATOM = 100


def _prec(node: Node) -> int:
    match node:
        case Num(value=v):
            return _PREC_NEG if (v < 0 or math.copysign(1.0, v) < 0) else _PREC_ATOM
        case Const() | Var() | Call():
            return _PREC_ATOM
        case Neg():
            return _PREC_NEG
        case Add() | Sub():
            return _PREC_ADD
        case Mul() | Div():
            return _PREC_MUL
        case Pow():
            return _PREC_POW
    raise TypeError(f"not an expression node: {node!r}")


def _wrap(node: Node, parens: bool) -> str:
    s = _format(node)
    return f"({s})" if parens else s


def _format(node: Node) -> str:
    match node:
        case Num(value=v):
            return repr(v)
        case Const(name=name) | Var(name=name):
            return name
        case Neg(arg=a):
            return "-" + _wrap(a, _prec(a) <= _PREC_NEG)
        case Add(left=l, right=r):
            return f"{_wrap(l, _prec(l) < _PREC_ADD)} + {_wrap(r, _prec(r) <= _PREC_ADD)}"
        case Sub(left=l, right=r):
            return f"{_wrap(l, _prec(l) < _PREC_ADD)} - {_wrap(r, _prec(r) <= _PREC_ADD)}"
        case Mul(left=l, right=r):
            return f"{_wrap(l, _prec(l) < _PREC_MUL)}*{_wrap(r, _prec(r) <= _PREC_MUL)}"
        case Div(left=l, right=r):
            return f"{_wrap(l, _prec(l) < _PREC_MUL)}/{_wrap(r, _prec(r) <= _PREC_MUL)}"
        case Pow(left=l, right=r):
            return f"{_wrap(l, _prec(l) <= _PREC_POW)}^{_wrap(r, _prec(r) < _PREC_POW)}"
        case Call(func=f, arg=a):
            return f"{f}({_format(a)})"
    raise TypeError(f"not an expression node: {node!r}")


# ---------------------------------------------------------------------------
# Tree predicates
# ---------------------------------------------------------------------------


def _children(node: Node) -> tuple[Node, ...]:
    match node:
        case Num() | Const() | Var():
            return ()
        case Neg(arg=a) | Call(arg=a):
            return (a,)
        case Add(left=l, right=r) | Sub(left=l, right=r) | Mul(left=l, right=r) | Div(
            left=l, right=r
        ) | Pow(left=l, right=r):
            return (l, r)
    raise TypeError(f"not an expression node: {node!r}")


def _has_nonsmooth(node: Node) -> bool:
    if isinstance(node, Call) and node.func in NONSMOOTH_FUNCTIONS:
        return True
    return any(_has_nonsmooth(c) for c in _children(node))


def _depends_on(node: Node, var: str) -> bool:
    if isinstance(node, Var):
        return node.name == var
    return any(_depends_on(c, var) for c in _children(node))
