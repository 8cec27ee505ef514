"""Flat evaluation tapes compiled from expression trees.

An expression is lowered once into a postfix instruction tape; the tape
is then run by either the compiled stack machine (``_ctape``) or the
pure-Python twin (``_pytape``).  Both execute the identical operation
sequence, so results are bitwise equal across backends.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Tuple

import numpy as np

from .. import expr as ex
from ..errors import UnboundNameError

# Opcode values shared with _ctape.pyx; do not renumber.
OP_CONST = 0
OP_VAR = 1
OP_ADD = 2
OP_SUB = 3
OP_MUL = 4
OP_DIV = 5
OP_NEG = 6
OP_POW = 7
OP_SQRT = 8
OP_EXP = 9
OP_LOG = 10
OP_ABS = 11

ERR_OK = 0
ERR_DIV = 1
ERR_SQRT = 2
ERR_LOG = 3
ERR_POW = 4

ERROR_MESSAGES = {
    ERR_DIV: "division by zero",
    ERR_SQRT: "sqrt of a negative value",
    ERR_LOG: "log of a non-positive value",
    ERR_POW: "pow outside the real domain",
}


@dataclass(frozen=True)
class Program:
    """Compiled tape: parallel opcode/argument arrays plus constants.

    ``ops_py``/``args_py``/``consts_py`` are plain-tuple mirrors kept
    for the pure-Python interpreter (avoids ndarray item access in the
    inner loop).
    """

    ops: np.ndarray
    args: np.ndarray
    consts: np.ndarray
    ops_py: Tuple[int, ...]
    args_py: Tuple[int, ...]
    consts_py: Tuple[float, ...]
    n_vars: int
    stack_depth: int
    variables: Tuple[str, ...]


def compile_expression(
    e: "ex.Expression",
    variables: Iterable[str],
    constants: Mapping[str, float],
) -> Program:
    """Lower an expression tree to a tape over the given variable order.

    Names found in ``variables`` become VAR loads (by position); names
    found in ``constants`` are folded in as CONST loads; anything else
    raises :class:`UnboundNameError`.  Variables shadow constants.
    """
    variables = tuple(variables)
    var_index = {name: k for k, name in enumerate(variables)}
    ops: list = []
    args: list = []
    consts: list = []
    const_index: dict = {}

    def emit_const(value: float) -> None:
        key = repr(float(value))  # distinguishes -0.0 from 0.0
        idx = const_index.get(key)
        if idx is None:
            idx = len(consts)
            consts.append(float(value))
            const_index[key] = idx
        ops.append(OP_CONST)
        args.append(idx)

    def walk(node) -> None:
        if isinstance(node, ex.Num):
            emit_const(node.value)
        elif isinstance(node, ex.Name):
            idx = var_index.get(node.ident)
            if idx is not None:
                ops.append(OP_VAR)
                args.append(idx)
            elif node.ident in constants:
                emit_const(constants[node.ident])
            else:
                raise UnboundNameError(node.ident)
        elif isinstance(node, ex.Neg):
            walk(node.arg)
            ops.append(OP_NEG)
            args.append(0)
        elif isinstance(node, (ex.Sqrt, ex.Exp, ex.Log, ex.Abs)):
            walk(node.arg)
            ops.append(
                {ex.Sqrt: OP_SQRT, ex.Exp: OP_EXP, ex.Log: OP_LOG, ex.Abs: OP_ABS}[
                    type(node)
                ]
            )
            args.append(0)
        elif isinstance(node, ex.Pow):
            walk(node.base)
            walk(node.exponent)
            ops.append(OP_POW)
            args.append(0)
        elif isinstance(node, (ex.Add, ex.Sub, ex.Mul, ex.Div)):
            walk(node.left)
            walk(node.right)
            ops.append(
                {ex.Add: OP_ADD, ex.Sub: OP_SUB, ex.Mul: OP_MUL, ex.Div: OP_DIV}[
                    type(node)
                ]
            )
            args.append(0)
        else:
            raise TypeError(f"not an expression node: {node!r}")

    walk(e)

    # Stack depth by simulation: loads push, binary ops pop one.
    depth = 0
    max_depth = 0
    for op in ops:
        if op in (OP_CONST, OP_VAR):
            depth += 1
            max_depth = max(max_depth, depth)
        elif op in (OP_ADD, OP_SUB, OP_MUL, OP_DIV, OP_POW):
            depth -= 1

    if not consts:
        consts = [0.0]  # pad so the C backend always has a valid pointer

    return Program(
        ops=np.asarray(ops, dtype=np.intc),
        args=np.asarray(args, dtype=np.intc),
        consts=np.asarray(consts, dtype=np.float64),
        ops_py=tuple(ops),
        args_py=tuple(args),
        consts_py=tuple(float(c) for c in consts),
        n_vars=len(variables),
        stack_depth=max(max_depth, 1),
        variables=variables,
    )
