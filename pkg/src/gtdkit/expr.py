"""Expression trees for thermodynamic potentials.

Provides parsing of potential expressions from text, exact evaluation,
and exact symbolic first/second derivatives with respect to named
variables.  Trees are immutable; every operation here is a pure
function, safe for concurrent use.

Grammar (whitespace insignificant)::

    expr   := term (('+'|'-') term)*          left associative
    term   := factor (('*'|'/') factor)*      left associative
    factor := '-' factor | power
    power  := atom ('^' factor)?              right associative
    atom   := NUMBER | IDENT | IDENT '(' expr (',' expr)? ')' | '(' expr ')'

so precedence is ``^`` > unary ``-`` > ``*``,``/`` > ``+``,``-``.
Known functions: sqrt, exp, log, abs and two-argument pow (same node as
``^``).  A ``^`` whose exponent mentions any declared name is rewritten
to ``exp(exponent*log(base))`` so that differentiation only ever meets
constant exponents.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Mapping, Optional, Union

import numpy as np

from .errors import (
    ComputationError,
    ExpressionSyntaxError,
    UnknownIdentifierError,
)


# ---------------------------------------------------------------------------
# AST nodes


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Name:
    ident: str


@dataclass(frozen=True)
class Neg:
    arg: "Expression"


@dataclass(frozen=True)
class Add:
    left: "Expression"
    right: "Expression"


@dataclass(frozen=True)
class Sub:
    left: "Expression"
    right: "Expression"


@dataclass(frozen=True)
class Mul:
    left: "Expression"
    right: "Expression"


@dataclass(frozen=True)
class Div:
    left: "Expression"
    right: "Expression"


@dataclass(frozen=True)
class Pow:
    base: "Expression"
    exponent: "Expression"


@dataclass(frozen=True)
class Sqrt:
    arg: "Expression"


@dataclass(frozen=True)
class Exp:
    arg: "Expression"


@dataclass(frozen=True)
class Log:
    arg: "Expression"


@dataclass(frozen=True)
class Abs:
    arg: "Expression"


Expression = Union[Num, Name, Neg, Add, Sub, Mul, Div, Pow, Sqrt, Exp, Log, Abs]

_UNARY_FUNCTIONS = {"sqrt": Sqrt, "exp": Exp, "log": Log, "abs": Abs}
_BINARY = {Add, Sub, Mul, Div}


def children(e: Expression) -> tuple:
    if isinstance(e, (Num, Name)):
        return ()
    if isinstance(e, Neg):
        return (e.arg,)
    if isinstance(e, (Sqrt, Exp, Log, Abs)):
        return (e.arg,)
    if isinstance(e, Pow):
        return (e.base, e.exponent)
    return (e.left, e.right)


def free_names(e: Expression) -> frozenset:
    """All identifiers referenced anywhere in the tree."""
    out = set()
    stack = [e]
    while stack:
        node = stack.pop()
        if isinstance(node, Name):
            out.add(node.ident)
        else:
            stack.extend(children(node))
    return frozenset(out)


def _mentions(e: Expression, name: Optional[str] = None) -> bool:
    # name=None: does the subtree mention any identifier at all?
    stack = [e]
    while stack:
        node = stack.pop()
        if isinstance(node, Name):
            if name is None or node.ident == name:
                return True
        else:
            stack.extend(children(node))
    return False


def depth(e: Expression) -> int:
    """Number of nodes on the longest root-to-leaf path."""
    if isinstance(e, (Num, Name)):
        return 1
    return 1 + max(depth(c) for c in children(e))


# ---------------------------------------------------------------------------
# Tokenizer / parser

_NUM_RE = re.compile(r"(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?")
_IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z_0-9]*")
_OP_CHARS = "+-*/^(),"


def _tokenize(text: str):
    tokens = []
    i, n = 0, len(text)
    end_of_last = 0
    while i < n:
        c = text[i]
        if c.isspace():
            i += 1
            continue
        m = _NUM_RE.match(text, i)
        if m:
            tokens.append(("num", m.group(), i))
            i = m.end()
            end_of_last = i
            continue
        m = _IDENT_RE.match(text, i)
        if m:
            tokens.append(("ident", m.group(), i))
            i = m.end()
            end_of_last = i
            continue
        if c in _OP_CHARS:
            tokens.append(("op", c, i))
            i += 1
            end_of_last = i
            continue
        raise ExpressionSyntaxError(f"unexpected character {c!r}", i)
    tokens.append(("end", "", end_of_last))
    return tokens


class _Parser:
    def __init__(self, tokens, allowed):
        self.toks = tokens
        self.k = 0
        self.allowed = allowed

    def peek(self):
        return self.toks[self.k]

    def advance(self):
        tok = self.toks[self.k]
        self.k += 1
        return tok

    def match_op(self, *ops) -> Optional[str]:
        kind, val, _ = self.peek()
        if kind == "op" and val in ops:
            self.advance()
            return val
        return None

    def expect_op(self, op):
        kind, val, pos = self.peek()
        if kind == "op" and val == op:
            self.advance()
            return
        shown = repr(val) if kind != "end" else "end of input"
        raise ExpressionSyntaxError(f"expected '{op}', found {shown}", pos)

    def parse(self) -> Expression:
        e = self.expression()
        kind, val, pos = self.peek()
        if kind != "end":
            raise ExpressionSyntaxError(f"unexpected {val!r} after expression", pos)
        return e

    def expression(self) -> Expression:
        e = self.term()
        while True:
            op = self.match_op("+", "-")
            if op is None:
                return e
            rhs = self.term()
            e = Add(e, rhs) if op == "+" else Sub(e, rhs)

    def term(self) -> Expression:
        e = self.factor()
        while True:
            op = self.match_op("*", "/")
            if op is None:
                return e
            rhs = self.factor()
            e = Mul(e, rhs) if op == "*" else Div(e, rhs)

    def factor(self) -> Expression:
        if self.match_op("-"):
            return Neg(self.factor())
        return self.power()

    def power(self) -> Expression:
        base = self.atom()
        if self.match_op("^"):
            exponent = self.factor()
            return _make_pow(base, exponent)
        return base

    def atom(self) -> Expression:
        kind, val, pos = self.peek()
        if kind == "num":
            self.advance()
            return Num(float(val))
        if kind == "ident":
            self.advance()
            if self.peek()[0] == "op" and self.peek()[1] == "(":
                return self.call(val, pos)
            if val not in self.allowed:
                raise UnknownIdentifierError(val, pos)
            return Name(val)
        if kind == "op" and val == "(":
            self.advance()
            e = self.expression()
            self.expect_op(")")
            return e
        shown = repr(val) if kind != "end" else "end of input"
        raise ExpressionSyntaxError(f"expected a value, found {shown}", pos)

    def call(self, fname, pos) -> Expression:
        self.expect_op("(")
        first = self.expression()
        if fname == "pow":
            self.expect_op(",")
            second = self.expression()
            self.expect_op(")")
            return _make_pow(first, second)
        if fname in _UNARY_FUNCTIONS:
            self.expect_op(")")
            return _UNARY_FUNCTIONS[fname](first)
        raise UnknownIdentifierError(fname, pos)


def _make_pow(base: Expression, exponent: Expression) -> Expression:
    # Non-constant exponent: one differentiation rule via exp/log,
    # at the price of requiring base > 0 on evaluation.
    if _mentions(exponent):
        return Exp(Mul(exponent, Log(base)))
    return Pow(base, exponent)


def parse(text: str, allowed_names: Iterable[str]) -> Expression:
    """Parse expression text into an immutable tree.

    ``allowed_names`` lists the legal variable/parameter identifiers;
    anything else (other than the built-in functions) is rejected with
    the identifier named in the error.
    """
    if not text or not text.strip():
        raise ExpressionSyntaxError("empty expression", 0)
    tokens = _tokenize(text)
    return _Parser(tokens, frozenset(allowed_names)).parse()


# ---------------------------------------------------------------------------
# Serialization (fully parenthesized; reparses to the identical tree)


def serialize(e: Expression) -> str:
    if isinstance(e, Num):
        return repr(e.value)
    if isinstance(e, Name):
        return e.ident
    if isinstance(e, Neg):
        return f"(-{serialize(e.arg)})"
    if isinstance(e, Add):
        return f"({serialize(e.left)} + {serialize(e.right)})"
    if isinstance(e, Sub):
        return f"({serialize(e.left)} - {serialize(e.right)})"
    if isinstance(e, Mul):
        return f"({serialize(e.left)}*{serialize(e.right)})"
    if isinstance(e, Div):
        return f"({serialize(e.left)}/{serialize(e.right)})"
    if isinstance(e, Pow):
        return f"({serialize(e.base)}^{serialize(e.exponent)})"
    if isinstance(e, Sqrt):
        return f"sqrt({serialize(e.arg)})"
    if isinstance(e, Exp):
        return f"exp({serialize(e.arg)})"
    if isinstance(e, Log):
        return f"log({serialize(e.arg)})"
    if isinstance(e, Abs):
        return f"abs({serialize(e.arg)})"
    raise TypeError(f"not an expression node: {e!r}")


# ---------------------------------------------------------------------------
# Symbolic differentiation with constant folding
#
# Folding is limited to constants and the neutral/absorbing elements
# (0, 1); no algebraic rewriting beyond that.

_ZERO = Num(0.0)
_ONE = Num(1.0)


def _is_num(e, value=None) -> bool:
    return isinstance(e, Num) and (value is None or e.value == value)


def _add(a, b):
    if isinstance(a, Num) and isinstance(b, Num):
        return Num(a.value + b.value)
    if _is_num(a, 0.0):
        return b
    if _is_num(b, 0.0):
        return a
    return Add(a, b)


def _sub(a, b):
    if isinstance(a, Num) and isinstance(b, Num):
        return Num(a.value - b.value)
    if _is_num(b, 0.0):
        return a
    if _is_num(a, 0.0):
        return _neg(b)
    return Sub(a, b)


def _neg(a):
    if isinstance(a, Num):
        return Num(-a.value)
    if isinstance(a, Neg):
        return a.arg
    return Neg(a)


def _mul(a, b):
    if isinstance(a, Num) and isinstance(b, Num):
        return Num(a.value * b.value)
    if _is_num(a, 0.0) or _is_num(b, 0.0):
        return _ZERO
    if _is_num(a, 1.0):
        return b
    if _is_num(b, 1.0):
        return a
    return Mul(a, b)


def _div(a, b):
    if _is_num(a, 0.0):
        return _ZERO
    if _is_num(b, 1.0):
        return a
    if isinstance(a, Num) and isinstance(b, Num) and b.value != 0.0:
        return Num(a.value / b.value)
    return Div(a, b)


def _pow(base, exponent):
    if _is_num(exponent, 1.0):
        return base
    if _is_num(exponent, 0.0):
        return _ONE
    return Pow(base, exponent)


def differentiate(e: Expression, var: str) -> Expression:
    """Exact derivative tree of ``e`` with respect to ``var``.

    Purely structural: no finite differences anywhere.  ``f^c`` uses
    the power rule whenever ``var`` does not occur in the exponent.
    """
    if isinstance(e, Num):
        return _ZERO
    if isinstance(e, Name):
        return _ONE if e.ident == var else _ZERO
    if isinstance(e, Neg):
        return _neg(differentiate(e.arg, var))
    if isinstance(e, Add):
        return _add(differentiate(e.left, var), differentiate(e.right, var))
    if isinstance(e, Sub):
        return _sub(differentiate(e.left, var), differentiate(e.right, var))
    if isinstance(e, Mul):
        da = differentiate(e.left, var)
        db = differentiate(e.right, var)
        return _add(_mul(da, e.right), _mul(e.left, db))
    if isinstance(e, Div):
        da = differentiate(e.left, var)
        db = differentiate(e.right, var)
        num = _sub(_mul(da, e.right), _mul(e.left, db))
        return _div(num, _pow(e.right, Num(2.0)))
    if isinstance(e, Pow):
        db = differentiate(e.base, var)
        if _mentions(e.exponent, var):
            # d(b^x) = b^x * (x' log b + x b'/b)
            dx = differentiate(e.exponent, var)
            inner = _add(_mul(dx, Log(e.base)), _div(_mul(e.exponent, db), e.base))
            return _mul(e, inner)
        lowered = _sub(e.exponent, _ONE)
        return _mul(_mul(e.exponent, _pow(e.base, lowered)), db)
    if isinstance(e, Sqrt):
        da = differentiate(e.arg, var)
        return _div(da, _mul(Num(2.0), e))
    if isinstance(e, Exp):
        return _mul(e, differentiate(e.arg, var))
    if isinstance(e, Log):
        return _div(differentiate(e.arg, var), e.arg)
    if isinstance(e, Abs):
        # sign(a) * a' written as (a/|a|) * a'; undefined at a = 0
        da = differentiate(e.arg, var)
        return _mul(_div(e.arg, e), da)
    raise TypeError(f"not an expression node: {e!r}")


# ---------------------------------------------------------------------------
# Evaluation (delegates to the tape kernel so that all call paths share
# one deterministic arithmetic sequence)


def evaluate(
    e: Expression,
    point: Mapping[str, float],
    params: Optional[Mapping[str, float]] = None,
) -> float:
    """Evaluate ``e`` at ``point`` with parameters bound as constants.

    Raises :class:`DomainError` for sqrt/log/pow/div domain violations
    and :class:`UnboundNameError` for unresolved identifiers.  Variable
    bindings shadow parameter bindings of the same name.
    """
    from .kernel import run_program
    from .kernel.program import compile_expression

    variables = tuple(point.keys())
    prog = compile_expression(e, variables, params or {})
    values = np.array([float(point[v]) for v in variables], dtype=np.float64)
    return run_program(prog, values)


def gradient(
    e: Expression,
    variables: Iterable[str],
    point: Mapping[str, float],
    params: Optional[Mapping[str, float]] = None,
) -> np.ndarray:
    variables = tuple(variables)
    return np.array(
        [evaluate(differentiate(e, v), point, params) for v in variables],
        dtype=np.float64,
    )


HESSIAN_SYMMETRY_RTOL = 1e-12


def _symmetrize_checked(H: np.ndarray) -> np.ndarray:
    scale = float(np.max(np.abs(H)))
    if scale > 0.0:
        skew = float(np.max(np.abs(H - H.T)))
        if skew > HESSIAN_SYMMETRY_RTOL * scale:
            raise ComputationError(
                f"hessian asymmetry {skew:.3e} exceeds {HESSIAN_SYMMETRY_RTOL:.0e} * {scale:.3e}"
            )
    return (H + H.T) / 2.0


def hessian(
    e: Expression,
    variables: Iterable[str],
    point: Mapping[str, float],
    params: Optional[Mapping[str, float]] = None,
) -> np.ndarray:
    """Full second-derivative matrix, checked for symmetry then symmetrized.

    Both mixed orders are computed independently; their agreement (to
    1e-12 relative) is a consistency check on the differentiation rules.
    """
    variables = tuple(variables)
    n = len(variables)
    firsts = [differentiate(e, v) for v in variables]
    H = np.empty((n, n), dtype=np.float64)
    for i in range(n):
        for j in range(n):
            H[i, j] = evaluate(differentiate(firsts[i], variables[j]), point, params)
    return _symmetrize_checked(H)
