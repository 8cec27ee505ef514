"""Backend selection and the run API for expression tapes.

The compiled extension is preferred when importable; the pure-Python
interpreter is the fallback.  Selection can be forced with the
environment variable ``GTDKIT_BACKEND`` set to ``compiled`` or ``pure``
before first import.  Both backends produce bitwise-identical values
and error codes.
"""

from __future__ import annotations

import os

import numpy as np

from ..errors import DomainError
from . import _pytape
from .program import ERROR_MESSAGES, Program, compile_expression

try:
    from . import _ctape
except ImportError:  # extension not built; pure fallback only
    _ctape = None

_forced = os.environ.get("GTDKIT_BACKEND")
if _forced not in (None, "", "compiled", "pure"):
    raise ImportError(f"GTDKIT_BACKEND must be 'compiled' or 'pure', got {_forced!r}")
if _forced == "compiled" and _ctape is None:
    raise ImportError("GTDKIT_BACKEND=compiled but the extension is not available")

if _forced == "pure" or _ctape is None:
    _impl = _pytape
else:
    _impl = _ctape

BACKEND = _impl.NAME

_PAD = np.zeros(1, dtype=np.float64)


def backend_name() -> str:
    return BACKEND


def available_backends() -> dict:
    out = {"pure": _pytape}
    if _ctape is not None:
        out["compiled"] = _ctape
    return out


def _raise_domain(prog: Program, err: int, pos: int):
    raise DomainError(f"{ERROR_MESSAGES[err]} (instruction {pos})")


def run_program(prog: Program, values, impl=None) -> float:
    """Evaluate a tape at one point; raises DomainError on failure."""
    impl = impl or _impl
    vals = np.ascontiguousarray(values, dtype=np.float64)
    if vals.shape != (prog.n_vars,):
        raise ValueError(f"expected {prog.n_vars} values, got shape {vals.shape}")
    if impl is _pytape:
        value, err, pos = _pytape.run(prog, [float(v) for v in vals])
    else:
        if prog.n_vars == 0:
            vals = _PAD
        stack = np.empty(prog.stack_depth, dtype=np.float64)
        value, err, pos = impl.run(prog.ops, prog.args, prog.consts, vals, stack)
    if err != 0:
        _raise_domain(prog, err, pos)
    return value


def run_program_many(prog: Program, points, impl=None):
    """Evaluate a tape at many points.

    ``points`` is an (m, n_vars) array.  Returns ``(values, errcodes)``
    without raising; failed rows carry their nonzero error code.
    """
    impl = impl or _impl
    pts = np.ascontiguousarray(points, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[1] != prog.n_vars:
        raise ValueError(f"expected (m, {prog.n_vars}) points, got shape {pts.shape}")
    m = pts.shape[0]
    out = np.empty(m, dtype=np.float64)
    errs = np.zeros(m, dtype=np.intc)
    if m == 0:
        return out, errs
    if impl is _pytape:
        _pytape.run_many(prog, pts, out, errs)
    else:
        if prog.n_vars == 0:
            pts = np.zeros((m, 1), dtype=np.float64)
        stack = np.empty(prog.stack_depth, dtype=np.float64)
        impl.run_many(prog.ops, prog.args, prog.consts, pts, out, errs, stack)
    return out, errs


__all__ = [
    "BACKEND",
    "Program",
    "available_backends",
    "backend_name",
    "compile_expression",
    "run_program",
    "run_program_many",
]
