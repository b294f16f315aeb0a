"""Expression language for metric components, sections and curves.

Grammar (EBNF)::

    expr     = term , { ( "+" | "-" ) , term } ;
    term     = unary , { ( "*" | "/" ) , unary } ;
    unary    = "-" , unary | power ;
    power    = atom , [ "^" , unary ] ;          (* exponent: integer constant *)
    atom     = number | name , "(" , expr , ")" | name | "(" , expr , ")" ;
    number   = digits , [ "." , [ digits ] ] , [ exponent_part ]
             | "." , digits , [ exponent_part ] ;
    name     = letter , { letter | digit | "_" } ;

Binary operators are left-associative, ``^`` is right-associative and binds
tighter than unary minus, so ``-x^2`` is ``-(x^2)``.  The exponent must fold
to an integer constant.  There is no implicit multiplication.  ``pi`` and
``e`` are predefined constants.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from .errors import (ExprError, ExprSyntaxError, MathDomain, UnboundVariable,
                     UnknownFunction)

CONSTANTS = {"pi": math.pi, "e": math.e}
FUNCTIONS = ("sin", "cos", "tan", "exp", "log", "sqrt", "sinh", "cosh", "tanh", "abs")


class Expr:
    """Base class of the immutable expression tree."""

    __slots__ = ()

    def __str__(self):
        return to_source(self)


@dataclass(frozen=True)
class Num(Expr):
    value: float


@dataclass(frozen=True)
class Var(Expr):
    name: str


@dataclass(frozen=True)
class Neg(Expr):
    arg: Expr


@dataclass(frozen=True)
class Add(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Sub(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Mul(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Div(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Pow(Expr):
    base: Expr
    exponent: int


@dataclass(frozen=True)
class Func(Expr):
    name: str
    arg: Expr


_BINARY = {"+": Add, "-": Sub, "*": Mul, "/": Div}
_SYMBOL = {Add: "+", Sub: "-", Mul: "*", Div: "/"}

# ---------------------------------------------------------------- parsing

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^(),]))"
)


@dataclass(frozen=True)
class _Token:
    kind: str
    text: str
    offset: int


def _tokenize(source: str) -> list[_Token]:
    tokens = []
    pos = 0
    n = len(source)
    while True:
        while pos < n and source[pos].isspace():
            pos += 1
        if pos >= n:
            break
        m = _TOKEN_RE.match(source, pos)
        if m is None or m.end() == pos:
            raise ExprSyntaxError(f"unexpected character {source[pos]!r}", pos)
        kind = m.lastgroup
        tokens.append(_Token(kind, m.group(kind), m.start(kind)))
        pos = m.end()
    tokens.append(_Token("eof", "", n))
    return tokens


class _Parser:
    def __init__(self, source: str):
        self.tokens = _tokenize(source)
        self.i = 0

    @property
    def tok(self) -> _Token:
        return self.tokens[self.i]

    def advance(self) -> _Token:
        t = self.tokens[self.i]
        self.i += 1
        return t

    def expect(self, text: str):
        if self.tok.text != text or self.tok.kind == "eof":
            raise ExprSyntaxError(f"expected {text!r}", self.tok.offset)
        return self.advance()

    def parse(self) -> Expr:
        e = self.expr()
        if self.tok.kind != "eof":
            raise ExprSyntaxError(f"expected operator or end of input, got {self.tok.text!r}",
                                  self.tok.offset)
        return e

    def expr(self) -> Expr:
        left = self.term()
        while self.tok.kind == "op" and self.tok.text in "+-":
            op = self.advance().text
            left = _BINARY[op](left, self.term())
        return left

    def term(self) -> Expr:
        left = self.unary()
        while self.tok.kind == "op" and self.tok.text in "*/":
            op = self.advance().text
            left = _BINARY[op](left, self.unary())
        return left

    def unary(self) -> Expr:
        if self.tok.kind == "op" and self.tok.text == "-":
            self.advance()
            return Neg(self.unary())
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        if self.tok.kind == "op" and self.tok.text == "^":
            self.advance()
            start = self.tok.offset
            exponent = self.unary()
            try:
                value = evaluate(exponent, {})
            except ExprError:
                raise ExprSyntaxError("exponent must be an integer constant", start) from None
            if not float(value).is_integer():
                raise ExprSyntaxError("exponent must be an integer constant", start)
            return Pow(base, int(value))
        return base

    def atom(self) -> Expr:
        t = self.tok
        if t.kind == "num":
            self.advance()
            return Num(float(t.text))
        if t.kind == "name":
            self.advance()
            if self.tok.kind == "op" and self.tok.text == "(":
                if t.text not in FUNCTIONS:
                    raise UnknownFunction(f"unknown function {t.text!r}", t.offset)
                self.advance()
                arg = self.expr()
                self.expect(")")
                return Func(t.text, arg)
            if t.text in FUNCTIONS:
                raise ExprSyntaxError(f"function {t.text!r} requires parentheses",
                                      self.tok.offset)
            return Var(t.text)
        if t.kind == "op" and t.text == "(":
            self.advance()
            e = self.expr()
            self.expect(")")
            return e
        what = "end of input" if t.kind == "eof" else repr(t.text)
        raise ExprSyntaxError(f"expected number, name or '(', got {what}", t.offset)


def parse(source: str) -> Expr:
    """Parse ``source`` into an expression tree."""
    return _Parser(source).parse()


# ---------------------------------------------------------------- printing

_PREC_ADD, _PREC_MUL, _PREC_NEG, _PREC_POW, _PREC_ATOM = 1, 2, 3, 4, 5


def _prec(e: Expr) -> int:
    if isinstance(e, (Add, Sub)):
        return _PREC_ADD
    if isinstance(e, (Mul, Div)):
        return _PREC_MUL
    if isinstance(e, Neg):
        return _PREC_NEG
    if isinstance(e, Pow):
        return _PREC_POW
    return _PREC_ATOM


def _wrap(e: Expr, min_prec: int) -> str:
    s = to_source(e)
    return s if _prec(e) >= min_prec else f"({s})"


def _format_number(x: float) -> str:
    if x.is_integer() and abs(x) < 1e16:
        return str(int(x))
    return repr(x)


def to_source(e: Expr) -> str:
    """Render an expression so that ``parse(to_source(e)) == e``."""
    if isinstance(e, Num):
        return _format_number(e.value)
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Neg):
        return "-" + _wrap(e.arg, _PREC_NEG)
    if isinstance(e, Pow):
        n = str(e.exponent) if e.exponent >= 0 else f"({e.exponent})"
        return f"{_wrap(e.base, _PREC_ATOM)}^{n}"
    if isinstance(e, Func):
        return f"{e.name}({to_source(e.arg)})"
    p = _prec(e)
    return f"{_wrap(e.left, p)} {_SYMBOL[type(e)]} {_wrap(e.right, p + 1)}"


def free_variables(e: Expr) -> set[str]:
    if isinstance(e, Var):
        return set() if e.name in CONSTANTS else {e.name}
    if isinstance(e, Num):
        return set()
    if isinstance(e, (Neg, Func)):
        return free_variables(e.arg)
    if isinstance(e, Pow):
        return free_variables(e.base)
    return free_variables(e.left) | free_variables(e.right)


# ---------------------------------------------------------------- evaluation

def _check_domain(name: str, x: float):
    if name == "log" and x <= 0.0:
        raise MathDomain(f"log of nonpositive value {x!r}")
    if name == "sqrt" and x < 0.0:
        raise MathDomain(f"sqrt of negative value {x!r}")


_MATH_FUNCS: dict[str, Callable[[float], float]] = {
    "sin": math.sin, "cos": math.cos, "tan": math.tan, "exp": math.exp,
    "log": math.log, "sqrt": math.sqrt, "sinh": math.sinh, "cosh": math.cosh,
    "tanh": math.tanh, "abs": abs,
}


def _eval(e: Expr, b: Mapping[str, float]) -> float:
    if isinstance(e, Num):
        return e.value
    if isinstance(e, Var):
        if e.name in CONSTANTS:
            return CONSTANTS[e.name]
        try:
            return float(b[e.name])
        except KeyError:
            raise UnboundVariable(f"variable {e.name!r} is not bound") from None
    if isinstance(e, Neg):
        return -_eval(e.arg, b)
    if isinstance(e, Func):
        x = _eval(e.arg, b)
        _check_domain(e.name, x)
        return _MATH_FUNCS[e.name](x)
    if isinstance(e, Pow):
        x = _eval(e.base, b)
        if x == 0.0 and e.exponent < 0:
            raise MathDomain("zero raised to a negative power")
        return x ** e.exponent
    left = _eval(e.left, b)
    right = _eval(e.right, b)
    if isinstance(e, Add):
        return left + right
    if isinstance(e, Sub):
        return left - right
    if isinstance(e, Mul):
        return left * right
    if right == 0.0:
        raise MathDomain("division by zero")
    return left / right


def evaluate(e: Expr, binding: Mapping[str, float]) -> float:
    """Evaluate in IEEE double precision; domain violations raise ``MathDomain``."""
    try:
        value = _eval(e, binding)
    except OverflowError as exc:
        raise MathDomain(f"overflow: {exc}") from None
    if not math.isfinite(value):
        raise MathDomain("non-finite result")
    return value


# ---------------------------------------------------------------- differentiation

ZERO = Num(0.0)
ONE = Num(1.0)


def const(x: float) -> Expr:
    """Constant node; negative values are represented as ``Neg(Num)``."""
    x = float(x)
    if x < 0:
        return Neg(Num(-x))
    return Num(x + 0.0)


def const_value(e: Expr) -> float | None:
    if isinstance(e, Num):
        return e.value
    if isinstance(e, Neg) and isinstance(e.arg, Num):
        return -e.arg.value
    return None


def _finite_const(x: float) -> Expr | None:
    return const(x) if math.isfinite(x) else None


def neg(a: Expr) -> Expr:
    ca = const_value(a)
    if ca is not None:
        return const(-ca)
    if isinstance(a, Neg):
        return a.arg
    return Neg(a)


def add(a: Expr, b: Expr) -> Expr:
    ca, cb = const_value(a), const_value(b)
    if ca == 0.0:
        return b
    if cb == 0.0:
        return a
    if ca is not None and cb is not None:
        return _finite_const(ca + cb) or Add(a, b)
    return Add(a, b)


def sub(a: Expr, b: Expr) -> Expr:
    ca, cb = const_value(a), const_value(b)
    if cb == 0.0:
        return a
    if ca == 0.0:
        return neg(b)
    if ca is not None and cb is not None:
        return _finite_const(ca - cb) or Sub(a, b)
    return Sub(a, b)


def mul(a: Expr, b: Expr) -> Expr:
    ca, cb = const_value(a), const_value(b)
    if ca == 0.0 or cb == 0.0:
        return ZERO
    if ca == 1.0:
        return b
    if cb == 1.0:
        return a
    if ca is not None and cb is not None:
        return _finite_const(ca * cb) or Mul(a, b)
    return Mul(a, b)


def div(a: Expr, b: Expr) -> Expr:
    ca, cb = const_value(a), const_value(b)
    if cb == 1.0:
        return a
    if ca == 0.0 and cb != 0.0:
        return ZERO
    if ca is not None and cb is not None and cb != 0.0:
        return _finite_const(ca / cb) or Div(a, b)
    return Div(a, b)


def power(a: Expr, n: int) -> Expr:
    if n == 0:
        return ONE
    if n == 1:
        return a
    ca = const_value(a)
    if ca is not None and not (ca == 0.0 and n < 0):
        try:
            return _finite_const(ca ** n) or Pow(a, n)
        except OverflowError:
            pass
    return Pow(a, n)


def _dfunc(name: str, u: Expr) -> Expr:
    """Derivative of ``name(u)`` with respect to ``u``."""
    if name == "sin":
        return Func("cos", u)
    if name == "cos":
        return neg(Func("sin", u))
    if name == "tan":
        return div(ONE, power(Func("cos", u), 2))
    if name == "exp":
        return Func("exp", u)
    if name == "log":
        return div(ONE, u)
    if name == "sqrt":
        return div(ONE, mul(Num(2.0), Func("sqrt", u)))
    if name == "sinh":
        return Func("cosh", u)
    if name == "cosh":
        return Func("sinh", u)
    if name == "tanh":
        return div(ONE, power(Func("cosh", u), 2))
    if name == "abs":
        return div(u, Func("abs", u))
    raise UnknownFunction(f"unknown function {name!r}", 0)


def differentiate(e: Expr, var: str) -> Expr:
    """Exact symbolic derivative with light simplification."""
    if isinstance(e, Num):
        return ZERO
    if isinstance(e, Var):
        return ONE if e.name == var and e.name not in CONSTANTS else ZERO
    if isinstance(e, Neg):
        return neg(differentiate(e.arg, var))
    if isinstance(e, Func):
        du = differentiate(e.arg, var)
        if const_value(du) == 0.0:
            return ZERO
        return mul(_dfunc(e.name, e.arg), du)
    if isinstance(e, Pow):
        du = differentiate(e.base, var)
        if const_value(du) == 0.0:
            return ZERO
        return mul(mul(const(e.exponent), power(e.base, e.exponent - 1)), du)
    da = differentiate(e.left, var)
    db = differentiate(e.right, var)
    if isinstance(e, Add):
        return add(da, db)
    if isinstance(e, Sub):
        return sub(da, db)
    if isinstance(e, Mul):
        return add(mul(da, e.right), mul(e.left, db))
    return sub(div(da, e.right), div(mul(e.left, db), power(e.right, 2)))


# ---------------------------------------------------------------- vectorized evaluation

def _np_source(e: Expr, names: Mapping[str, str]) -> str:
    if isinstance(e, Num):
        return repr(e.value)
    if isinstance(e, Var):
        if e.name in CONSTANTS:
            return repr(CONSTANTS[e.name])
        try:
            return names[e.name]
        except KeyError:
            raise UnboundVariable(f"variable {e.name!r} is not bound") from None
    if isinstance(e, Neg):
        return f"(-{_np_source(e.arg, names)})"
    if isinstance(e, Func):
        return f"_np.{e.name}({_np_source(e.arg, names)})"
    if isinstance(e, Pow):
        return f"({_np_source(e.base, names)})**({e.exponent})"
    return f"({_np_source(e.left, names)} {_SYMBOL[type(e)]} {_np_source(e.right, names)})"


class CompiledExpr:
    """An expression compiled to a numpy function of positional arguments.

    Arguments broadcast against each other; domain violations raise
    ``MathDomain`` just like :func:`evaluate`.
    """

    def __init__(self, e: Expr, argnames: Sequence[str], constants: Mapping[str, float] | None = None):
        self.expr = e
        self.argnames = tuple(argnames)
        names = {n: f"_a{i}" for i, n in enumerate(self.argnames)}
        for k, v in (constants or {}).items():
            if k not in names:
                names[k] = repr(float(v))
        args = ", ".join(f"_a{i}" for i in range(len(self.argnames)))
        self.source = _np_source(e, names)
        self._fn = eval(f"lambda {args}: {self.source}", {"_np": np})

    def __call__(self, *args):
        arrays = [np.asarray(a, dtype=float) for a in args]
        shape = np.broadcast_shapes(*(a.shape for a in arrays)) if arrays else ()
        try:
            with np.errstate(divide="raise", invalid="raise", over="raise", under="ignore"):
                out = self._fn(*arrays)
        except (FloatingPointError, ZeroDivisionError, OverflowError) as exc:
            raise MathDomain(f"domain error evaluating {self.source}: {exc}") from None
        out = np.broadcast_to(np.asarray(out, dtype=float), shape)
        if not np.all(np.isfinite(out)):
            raise MathDomain("non-finite result")
        return out


def compile_expr(e: Expr, argnames: Iterable[str], constants: Mapping[str, float] | None = None) -> CompiledExpr:
    return CompiledExpr(e, list(argnames), constants)
