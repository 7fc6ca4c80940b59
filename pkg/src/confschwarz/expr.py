"""A small expression language for scenario files.

Grammar (whitespace-insensitive)::

    expr    := term (("+" | "-") term)*
    term    := unary (("*" | "/") unary)*
    unary   := "-" unary | power
    power   := atom ("^" unary)?            # right-associative, binds tighter than "-"
    atom    := NUMBER | NAME | NAME "(" expr ")" | "(" expr ")"

``NAME`` is a coordinate ``x1 ... xn``, a function (``exp log sin cos sinh
cosh sqrt``) or a parameter.  Numbers are integers or decimals and are kept as
exact fractions; arithmetic between constants is folded at parse time, so
``3/2`` is a single rational constant.  Exponents must fold to a constant.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Union

import numpy as np

from . import jets
from .fields import Field

__all__ = [
    "ExprError",
    "ExprSyntaxError",
    "UnknownIdentifier",
    "ExprDomainError",
    "UnboundParameterError",
    "Const",
    "Var",
    "Param",
    "Func",
    "Neg",
    "BinOp",
    "ExprAst",
    "FUNCTIONS",
    "parse",
    "pretty",
    "eval_expr",
    "eval_expr_jet",
    "expr_field",
    "parameters",
]

FUNCTIONS = ("exp", "log", "sin", "cos", "sinh", "cosh", "sqrt")


class ExprError(ValueError):
    """Base class for expression errors."""


class ExprSyntaxError(ExprError):
    """Malformed source.

    Attributes:
        offset: byte offset of the offending token.
        expected: sorted tuple of token classes that would have been accepted.
    """

    def __init__(self, message: str, offset: int, expected: Iterable[str] = ()):
        self.offset = offset
        self.expected = tuple(sorted(expected))
        detail = f" (expected one of: {', '.join(self.expected)})" if self.expected else ""
        super().__init__(f"{message} at offset {offset}{detail}")


class UnknownIdentifier(ExprError):
    def __init__(self, name: str, offset: int, reason: str = "unknown identifier"):
        self.name = name
        self.offset = offset
        super().__init__(f"{reason} {name!r} at offset {offset}")


class ExprDomainError(ExprError):
    """Evaluation outside the domain of a function (or a division by zero)."""


class UnboundParameterError(ExprError):
    def __init__(self, name: str):
        self.name = name
        super().__init__(f"parameter {name!r} is not bound")


# -- AST ------------------------------------------------------------------------

@dataclass(frozen=True)
class Const:
    value: Fraction


@dataclass(frozen=True)
class Var:
    index: int  # 1-based, as written


@dataclass(frozen=True)
class Param:
    name: str


@dataclass(frozen=True)
class Func:
    name: str
    arg: "ExprAst"


@dataclass(frozen=True)
class Neg:
    arg: "ExprAst"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "ExprAst"
    right: "ExprAst"


ExprAst = Union[Const, Var, Param, Func, Neg, BinOp]
_NODE_TYPES = (Const, Var, Param, Func, Neg, BinOp)


# -- lexer ----------------------------------------------------------------------

_TOKEN = re.compile(r"\s*(?:(?P<num>\d+(?:\.\d*)?|\.\d+)|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
                    r"|(?P<op>[-+*/^()]))")


@dataclass
class _Tok:
    kind: str  # num, name, op, end
    text: str
    offset: int


def _lex(src: str) -> list[_Tok]:
    toks = []
    pos = 0
    enc = lambda i: len(src[:i].encode("utf-8"))  # noqa: E731
    while True:
        m = _TOKEN.match(src, pos)
        if m is None or m.end() == pos:
            rest = src[pos:]
            if rest.strip() == "":
                toks.append(_Tok("end", "", enc(len(src))))
                return toks
            bad = pos + (len(rest) - len(rest.lstrip()))
            raise ExprSyntaxError(f"unexpected character {src[bad]!r}", enc(bad))
        kind = m.lastgroup
        toks.append(_Tok(kind, m.group(kind), enc(m.start(kind))))
        pos = m.end()


# -- parser ---------------------------------------------------------------------

_ATOM_START = ("number", "identifier", "(", "-")


class _Parser:
    def __init__(self, src: str, n: int, params):
        self.toks = _lex(src)
        self.i = 0
        self.n = n
        self.params = None if params is None else set(params)

    @property
    def tok(self) -> _Tok:
        return self.toks[self.i]

    def take(self) -> _Tok:
        t = self.toks[self.i]
        self.i += 1
        return t

    def at(self, text: str) -> bool:
        return self.tok.kind == "op" and self.tok.text == text

    def parse(self) -> ExprAst:
        node = self.expr()
        if self.tok.kind != "end":
            raise ExprSyntaxError(f"unexpected token {self.tok.text!r}", self.tok.offset,
                                  ("+", "-", "*", "/", "^", "end of input"))
        return node

    def expr(self) -> ExprAst:
        node = self.term()
        while self.at("+") or self.at("-"):
            op = self.take().text
            node = _fold(BinOp(op, node, self.term()))
        return node

    def term(self) -> ExprAst:
        node = self.unary()
        while self.at("*") or self.at("/"):
            t = self.take()
            rhs = self.unary()
            if t.text == "/" and isinstance(rhs, Const) and rhs.value == 0:
                raise ExprDomainError(f"division by zero at offset {t.offset}")
            node = _fold(BinOp(t.text, node, rhs))
        return node

    def unary(self) -> ExprAst:
        if self.at("-"):
            self.take()
            return _fold(Neg(self.unary()))
        return self.power()

    def power(self) -> ExprAst:
        base = self.atom()
        if self.at("^"):
            self.take()
            where = self.tok.offset
            exponent = self.unary()
            if not isinstance(exponent, Const):
                raise ExprSyntaxError("exponent must be a constant", where, ("number",))
            return _fold(BinOp("^", base, exponent))
        return base

    def atom(self) -> ExprAst:
        t = self.tok
        if t.kind == "num":
            self.take()
            return Const(Fraction(t.text))
        if t.kind == "name":
            self.take()
            if self.at("("):
                if t.text not in FUNCTIONS:
                    raise UnknownIdentifier(t.text, t.offset, "unknown function")
                self.take()
                arg = self.expr()
                if not self.at(")"):
                    raise ExprSyntaxError("missing ')'", self.tok.offset, (")",))
                self.take()
                return _fold(Func(t.text, arg))
            if t.text in FUNCTIONS:
                raise ExprSyntaxError(f"function {t.text!r} needs an argument", self.tok.offset,
                                      ("(",))
            m = re.fullmatch(r"x([1-9]\d*)", t.text)
            if m:
                k = int(m.group(1))
                if k > self.n:
                    raise UnknownIdentifier(t.text, t.offset,
                                            f"variable index exceeds dimension {self.n}:")
                return Var(k)
            if self.params is not None and t.text not in self.params:
                raise UnknownIdentifier(t.text, t.offset)
            return Param(t.text)
        if self.at("("):
            self.take()
            node = self.expr()
            if not self.at(")"):
                raise ExprSyntaxError("missing ')'", self.tok.offset, (")",))
            self.take()
            return node
        raise ExprSyntaxError("unexpected " + ("end of input" if t.kind == "end" else repr(t.text)),
                              t.offset, _ATOM_START)


def _fold(node: ExprAst) -> ExprAst:
    """Constant folding that keeps everything exact."""
    if isinstance(node, Neg) and isinstance(node.arg, Const):
        return Const(-node.arg.value)
    if isinstance(node, BinOp) and isinstance(node.left, Const) and isinstance(node.right, Const):
        a, b = node.left.value, node.right.value
        if node.op == "+":
            return Const(a + b)
        if node.op == "-":
            return Const(a - b)
        if node.op == "*":
            return Const(a * b)
        if node.op == "/":
            if b == 0:
                raise ExprDomainError("division by zero")
            return Const(a / b)
        if node.op == "^" and b.denominator == 1:
            if a == 0 and b < 0:
                raise ExprDomainError("negative power of zero")
            return Const(a ** int(b))
    return node


def parse(src: str, n: int, params: Iterable[str] | None = None) -> ExprAst:
    """Parse ``src`` over coordinates ``x1 ... xn``.

    Args:
        src: expression text.
        n: dimension; ``xk`` with ``k > n`` is rejected.
        params: allowed parameter names.  ``None`` accepts any other name as a
            parameter to be bound at evaluation time.

    Raises:
        ExprSyntaxError: with the byte offset and the expected tokens.
        UnknownIdentifier: an identifier that names nothing in scope.
    """
    if n < 1:
        raise ExprError("dimension must be positive")
    return _Parser(src, n, params).parse()


def pretty(node: ExprAst) -> str:
    """Fully parenthesized text form; ``parse(pretty(a)) == a``."""
    if isinstance(node, Const):
        v = node.value
        s = str(v.numerator) if v.denominator == 1 else f"{v.numerator}/{v.denominator}"
        return f"({s})" if v < 0 or v.denominator != 1 else s
    if isinstance(node, Var):
        return f"x{node.index}"
    if isinstance(node, Param):
        return node.name
    if isinstance(node, Func):
        return f"{node.name}({pretty(node.arg)})"
    if isinstance(node, Neg):
        return f"(-{pretty(node.arg)})"
    return f"({pretty(node.left)} {node.op} {pretty(node.right)})"


def parameters(node: ExprAst) -> set[str]:
    """Names of the parameters used in ``node``."""
    if isinstance(node, Param):
        return {node.name}
    if isinstance(node, (Func, Neg)):
        return parameters(node.arg)
    if isinstance(node, BinOp):
        return parameters(node.left) | parameters(node.right)
    return set()


# -- evaluation -----------------------------------------------------------------

def _bind(name: str, bindings: Mapping[str, object] | None):
    if bindings is None or name not in bindings:
        raise UnboundParameterError(name)
    return bindings[name]


def _domain(name: str, v: float) -> None:
    if name == "log" and v <= 0:
        raise ExprDomainError(f"log of non-positive value {v!r}")
    if name == "sqrt" and v <= 0:
        raise ExprDomainError(f"sqrt of non-positive value {v!r} (not smooth)")


def _value(j) -> float:
    return float(np.asarray(j.value if isinstance(j, jets.Jet) else j))


def _eval(node: ExprAst, X, bindings, lib):
    if isinstance(node, Const):
        return lib["const"](node.value, X)
    if isinstance(node, Var):
        return X[node.index - 1]
    if isinstance(node, Param):
        v = _bind(node.name, bindings)
        return lib["const"](Fraction(v) if isinstance(v, (int, Fraction)) else float(v), X)
    if isinstance(node, Neg):
        return -_eval(node.arg, X, bindings, lib)
    if isinstance(node, Func):
        a = _eval(node.arg, X, bindings, lib)
        _domain(node.name, _value(a))
        return lib[node.name](a)
    a = _eval(node.left, X, bindings, lib)
    if node.op == "^":
        p = node.right.value
        v = _value(a)
        if p.denominator != 1 and v <= 0:
            raise ExprDomainError(f"non-integer power of non-positive value {v!r}")
        if p < 0 and v == 0:
            raise ExprDomainError("negative power of zero")
        return lib["pow"](a, p)
    b = _eval(node.right, X, bindings, lib)
    if node.op == "+":
        return a + b
    if node.op == "-":
        return a - b
    if node.op == "*":
        return a * b
    if _value(b) == 0:
        raise ExprDomainError("division by zero")
    return a / b


_FLOAT_LIB = {
    "const": lambda v, X: float(v),
    "pow": lambda a, p: a ** (int(p) if p.denominator == 1 else float(p)),
    **{name: getattr(math, name) for name in FUNCTIONS},
}

_JET_LIB = {
    "const": lambda v, X: jets.constant(float(v), X[0]),
    "pow": lambda a, p: jets.power(a, p),
    **{name: getattr(jets, name) for name in FUNCTIONS},
}


def eval_expr(node: ExprAst, bindings: Mapping[str, object] | None, x) -> float:
    """Plain floating-point evaluation at ``x``."""
    x = [float(v) for v in np.atleast_1d(x)]
    return float(_eval(node, x, bindings, _FLOAT_LIB))


def eval_expr_jet(node: ExprAst, bindings: Mapping[str, object] | None, x, K: int) -> jets.Jet:
    """Jet of order ``K`` of the expression at ``x``."""
    X = jets.coordinates(x, K)
    return _eval(node, X, bindings, _JET_LIB)


def expr_field(nodes, bindings: Mapping[str, object] | None = None, kinds: str | None = "",
               weight=0, label: str = "") -> Field:
    """A :class:`Field` whose components are the given expressions.

    ``nodes`` is a single AST or a nested list of ASTs giving the tensor shape.
    """
    if isinstance(nodes, _NODE_TYPES):
        arr = np.empty((), dtype=object)
        arr[()] = nodes
    else:
        arr = np.asarray(nodes, dtype=object)
    missing = set()
    for node in arr.flat:
        missing |= {p for p in parameters(node) if bindings is None or p not in bindings}
    if missing:
        raise UnboundParameterError(sorted(missing)[0])

    def fn(x, k):
        X = jets.coordinates(x, k)
        comps = [_eval(node, X, bindings, _JET_LIB) for node in arr.flat]
        if arr.shape == ():
            return comps[0]
        st = jets.stack(comps)
        return st.with_coeffs(st.coeffs.reshape(arr.shape + (st.coeffs.shape[-1],)))

    return Field(fn, kinds, weight, label)

