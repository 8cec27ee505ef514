# cython: language_level=3, boundscheck=False, wraparound=False, initializedcheck=False, cdivision=True
"""Compiled tape interpreter: the hot kernel behind every evaluation.

Opcode numbering and domain guards must stay in lockstep with
``program.py`` and ``_pytape.py``; the pure backend is the reference
for semantics, this module only makes it fast.
"""

from libc.math cimport exp, fabs, floor, log, pow, sqrt

NAME = "compiled"

cdef enum:
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

cdef enum:
    ERR_OK = 0
    ERR_DIV = 1
    ERR_SQRT = 2
    ERR_LOG = 3
    ERR_POW = 4


cdef int _run(const int* ops, const int* args, Py_ssize_t n_ops,
              const double* consts, const double* values,
              double* stack, double* result, Py_ssize_t* errpos) noexcept nogil:
    cdef Py_ssize_t k
    cdef int op
    cdef int sp = 0
    cdef double x, y
    for k in range(n_ops):
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
            y = stack[sp]
            if y == 0.0:
                errpos[0] = k
                return ERR_DIV
            stack[sp - 1] = stack[sp - 1] / y
        elif op == OP_NEG:
            stack[sp - 1] = -stack[sp - 1]
        elif op == OP_POW:
            sp -= 1
            y = stack[sp]
            x = stack[sp - 1]
            if x < 0.0:
                if y != floor(y):
                    errpos[0] = k
                    return ERR_POW
            elif x == 0.0:
                if y < 0.0:
                    errpos[0] = k
                    return ERR_POW
            stack[sp - 1] = pow(x, y)
        elif op == OP_SQRT:
            x = stack[sp - 1]
            if x < 0.0:
                errpos[0] = k
                return ERR_SQRT
            stack[sp - 1] = sqrt(x)
        elif op == OP_EXP:
            stack[sp - 1] = exp(stack[sp - 1])
        elif op == OP_LOG:
            x = stack[sp - 1]
            if x <= 0.0:
                errpos[0] = k
                return ERR_LOG
            stack[sp - 1] = log(x)
        elif op == OP_ABS:
            stack[sp - 1] = fabs(stack[sp - 1])
    result[0] = stack[0]
    return ERR_OK


def run(const int[::1] ops, const int[::1] args, const double[::1] consts,
        const double[::1] values, double[::1] stack):
    """Execute one tape; returns (value, errcode, errpos)."""
    cdef double result = 0.0
    cdef Py_ssize_t errpos = -1
    cdef int err
    with nogil:
        err = _run(&ops[0], &args[0], ops.shape[0], &consts[0], &values[0],
                   &stack[0], &result, &errpos)
    if err != ERR_OK:
        return 0.0, err, errpos
    return result, 0, -1


def run_many(const int[::1] ops, const int[::1] args, const double[::1] consts,
             const double[:, ::1] points, double[::1] out, int[::1] errs,
             double[::1] stack):
    """Execute one tape per row of ``points``, filling out/errs."""
    cdef Py_ssize_t m = points.shape[0]
    cdef Py_ssize_t n_ops = ops.shape[0]
    cdef Py_ssize_t r, errpos
    cdef double result
    cdef int err
    with nogil:
        for r in range(m):
            errpos = -1
            result = 0.0
            err = _run(&ops[0], &args[0], n_ops, &consts[0], &points[r, 0],
                       &stack[0], &result, &errpos)
            if err != ERR_OK:
                out[r] = 0.0
            else:
                out[r] = result
            errs[r] = err
