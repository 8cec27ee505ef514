"""Pure-Python tape interpreter.

Fallback twin of the compiled stack machine.  Every opcode performs the
same IEEE-754 double operation (CPython floats and ``math`` call the
same libm), so values and error codes are bitwise identical to the
compiled backend.
"""

from __future__ import annotations

import math

from .program import (
    ERR_DIV,
    ERR_LOG,
    ERR_POW,
    ERR_SQRT,
    OP_ABS,
    OP_ADD,
    OP_CONST,
    OP_DIV,
    OP_EXP,
    OP_LOG,
    OP_MUL,
    OP_NEG,
    OP_POW,
    OP_SQRT,
    OP_SUB,
    OP_VAR,
    Program,
)

NAME = "pure"


def _pow_checked(x: float, y: float):
    # mirror of the C backend's guards; overflow maps to +/-inf like libm
    if x < 0.0:
        if y != math.floor(y):
            return None
    elif x == 0.0:
        if y < 0.0:
            return None
    try:
        return math.pow(x, y)
    except OverflowError:
        if x < 0.0 and math.fmod(y, 2.0) in (1.0, -1.0):
            return -math.inf
        return math.inf


def run(prog: Program, values) -> tuple:
    """Execute the tape; returns (value, errcode, errpos)."""
    ops = prog.ops_py
    args = prog.args_py
    consts = prog.consts_py
    stack = [0.0] * prog.stack_depth
    sp = 0
    for k in range(len(ops)):
        op = ops[k]
        if op == OP_CONST:
            stack[sp] = consts[args[k]]
            sp += 1
        elif op == OP_VAR:
            stack[sp] = values[args[k]]
            sp += 1
        elif op == OP_ADD:
            sp -= 1
            stack[sp - 1] = stack[sp - 1] + stack[sp]
        elif op == OP_SUB:
            sp -= 1
            stack[sp - 1] = stack[sp - 1] - stack[sp]
        elif op == OP_MUL:
            sp -= 1
            stack[sp - 1] = stack[sp - 1] * stack[sp]
        elif op == OP_DIV:
            sp -= 1
            d = stack[sp]
            if d == 0.0:
                return 0.0, ERR_DIV, k
            stack[sp - 1] = stack[sp - 1] / d
        elif op == OP_NEG:
            stack[sp - 1] = -stack[sp - 1]
        elif op == OP_POW:
            sp -= 1
            r = _pow_checked(stack[sp - 1], stack[sp])
            if r is None:
                return 0.0, ERR_POW, k
            stack[sp - 1] = r
        elif op == OP_SQRT:
            x = stack[sp - 1]
            if x < 0.0:
                return 0.0, ERR_SQRT, k
            stack[sp - 1] = math.sqrt(x)
        elif op == OP_EXP:
            try:
                stack[sp - 1] = math.exp(stack[sp - 1])
            except OverflowError:
                stack[sp - 1] = math.inf
        elif op == OP_LOG:
            x = stack[sp - 1]
            if x <= 0.0:
                return 0.0, ERR_LOG, k
            stack[sp - 1] = math.log(x)
        elif op == OP_ABS:
            stack[sp - 1] = math.fabs(stack[sp - 1])
    return stack[0], 0, -1


def run_many(prog: Program, points, out, errs) -> None:
    """Row-wise `run` over a 2-D point array, filling out/errs in place."""
    m = points.shape[0]
    for r in range(m):
        row = [float(v) for v in points[r]]
        value, err, _ = run(prog, row)
        out[r] = value
        errs[r] = err
