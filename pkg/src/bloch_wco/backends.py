"""Batch evaluation backends for expression tapes.

Two implementations of the same stack machine: a compiled per-point kernel
(``bloch_wco._core``, built from Cython) and a vectorised numpy fallback.
The backend is chosen at import time; set ``BLOCH_WCO_BACKEND`` to
``compiled`` or ``python`` to force one.  Singular evaluations (poles, log of
zero, overflow) are reported through the returned mask, never raised.
"""

from __future__ import annotations

import os

import numpy as np

from .tape import (
    OP_ADD,
    OP_COORD,
    OP_DIV,
    OP_EXP,
    OP_HDOT,
    OP_LIT,
    OP_MUL,
    OP_NEG,
    OP_PLOG,
    OP_POW,
    OP_SUB,
    Tape,
)

try:  # compiled kernel is optional
    from . import _core  # type: ignore[attr-defined]

    _HAVE_CORE = True
except ImportError:
    _core = None
    _HAVE_CORE = False

# dimensions above the compiled kernel's gradient buffer fall back to numpy
_CORE_MAX_DIM = 16


def _requested() -> str:
    req = os.environ.get("BLOCH_WCO_BACKEND", "auto").strip().lower()
    if req not in ("auto", "compiled", "python"):
        raise ValueError(f"BLOCH_WCO_BACKEND must be auto, compiled or python, not {req!r}")
    if req == "compiled" and not _HAVE_CORE:
        raise ImportError("BLOCH_WCO_BACKEND=compiled but bloch_wco._core is not built")
    return req


def active_backend() -> str:
    req = _requested()
    if req == "python":
        return "python"
    return "compiled" if _HAVE_CORE else "python"


def compiled_available() -> bool:
    return _HAVE_CORE


# ---------------------------------------------------------------------------
# numpy backend


def _ipow_batch(v: np.ndarray, n: int) -> np.ndarray:
    r = np.ones_like(v)
    p = v
    e = abs(n)
    while e:
        if e & 1:
            r = r * p
        e >>= 1
        if e:
            p = p * p
    if n < 0:
        r = 1.0 / r
    return r


def _plog_batch(v: np.ndarray) -> np.ndarray:
    # pin the branch cut: negative reals approached from above
    out = v.copy()
    mask = out.imag == 0.0
    if np.any(mask):
        out[mask] = out[mask].real + 0.0j
    return np.log(out)


def eval_values_py(t: Tape, Z: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    n = Z.shape[0]
    stack: list[np.ndarray] = []
    with np.errstate(all="ignore"):
        for op, a in zip(t.ops, t.args):
            if op == OP_LIT:
                stack.append(np.full(n, t.consts[a]))
            elif op == OP_COORD:
                stack.append(Z[:, a].copy())
            elif op == OP_NEG:
                stack[-1] = -stack[-1]
            elif op == OP_ADD:
                b = stack.pop()
                stack[-1] = stack[-1] + b
            elif op == OP_SUB:
                b = stack.pop()
                stack[-1] = stack[-1] - b
            elif op == OP_MUL:
                b = stack.pop()
                stack[-1] = stack[-1] * b
            elif op == OP_DIV:
                b = stack.pop()
                stack[-1] = stack[-1] / b
            elif op == OP_POW:
                stack[-1] = _ipow_batch(stack[-1], int(a))
            elif op == OP_EXP:
                stack[-1] = np.exp(stack[-1])
            elif op == OP_PLOG:
                stack[-1] = _plog_batch(stack[-1])
            elif op == OP_HDOT:
                stack.append(Z @ t.vecs[a])
            else:  # pragma: no cover
                raise ValueError(f"bad opcode {op}")
    vals = stack[0]
    return vals, np.isfinite(vals)


def eval_jets_py(t: Tape, Z: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    n, d = Z.shape
    vstack: list[np.ndarray] = []
    gstack: list[np.ndarray] = []

    def zeros_g() -> np.ndarray:
        return np.zeros((n, d), dtype=np.complex128)

    with np.errstate(all="ignore"):
        for op, a in zip(t.ops, t.args):
            if op == OP_LIT:
                vstack.append(np.full(n, t.consts[a]))
                gstack.append(zeros_g())
            elif op == OP_COORD:
                vstack.append(Z[:, a].copy())
                g = zeros_g()
                g[:, a] = 1.0
                gstack.append(g)
            elif op == OP_NEG:
                vstack[-1] = -vstack[-1]
                gstack[-1] = -gstack[-1]
            elif op == OP_ADD:
                vb, gb = vstack.pop(), gstack.pop()
                vstack[-1] = vstack[-1] + vb
                gstack[-1] = gstack[-1] + gb
            elif op == OP_SUB:
                vb, gb = vstack.pop(), gstack.pop()
                vstack[-1] = vstack[-1] - vb
                gstack[-1] = gstack[-1] - gb
            elif op == OP_MUL:
                vb, gb = vstack.pop(), gstack.pop()
                va, ga = vstack[-1], gstack[-1]
                vstack[-1] = va * vb
                gstack[-1] = va[:, None] * gb + vb[:, None] * ga
            elif op == OP_DIV:
                vb, gb = vstack.pop(), gstack.pop()
                q = vstack[-1] / vb
                vstack[-1] = q
                gstack[-1] = (gstack[-1] - q[:, None] * gb) / vb[:, None]
            elif op == OP_POW:
                nexp = int(a)
                v, g = vstack[-1], gstack[-1]
                if nexp == 0:
                    vstack[-1] = np.ones_like(v)
                    gstack[-1] = zeros_g()
                else:
                    p = _ipow_batch(v, nexp - 1)
                    vstack[-1] = p * v
                    gstack[-1] = (nexp * p)[:, None] * g
            elif op == OP_EXP:
                w = np.exp(vstack[-1])
                vstack[-1] = w
                gstack[-1] = w[:, None] * gstack[-1]
            elif op == OP_PLOG:
                v = vstack[-1]
                vstack[-1] = _plog_batch(v)
                gstack[-1] = gstack[-1] / v[:, None]
            elif op == OP_HDOT:
                vstack.append(Z @ t.vecs[a])
                gstack.append(np.broadcast_to(t.vecs[a], (n, d)).copy())
            else:  # pragma: no cover
                raise ValueError(f"bad opcode {op}")
    vals = vstack[0]
    grads = gstack[0]
    ok = np.isfinite(vals) & np.all(np.isfinite(grads), axis=1)
    return vals, grads, ok


# ---------------------------------------------------------------------------
# dispatch


def _use_compiled(t: Tape) -> bool:
    if _requested() == "python" or not _HAVE_CORE:
        return False
    return t.dim <= _CORE_MAX_DIM


def eval_values(t: Tape, Z: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Values of the tape at each row of Z, plus a finite/non-singular mask."""
    Z = np.ascontiguousarray(Z, dtype=np.complex128)
    if _use_compiled(t):
        vals = np.empty(Z.shape[0], dtype=np.complex128)
        ok = np.empty(Z.shape[0], dtype=np.uint8)
        _core.eval_values(t.ops, t.args, t.consts, t.vecs, Z, vals, ok)
        return vals, ok.astype(bool)
    return eval_values_py(t, Z)


def eval_jets(t: Tape, Z: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Values and holomorphic gradients of the tape at each row of Z."""
    Z = np.ascontiguousarray(Z, dtype=np.complex128)
    if _use_compiled(t):
        n, d = Z.shape
        vals = np.empty(n, dtype=np.complex128)
        grads = np.empty((n, d), dtype=np.complex128)
        ok = np.empty(n, dtype=np.uint8)
        _core.eval_jets(t.ops, t.args, t.consts, t.vecs, Z, vals, grads, ok)
        return vals, grads, ok.astype(bool)
    return eval_jets_py(t, Z)
