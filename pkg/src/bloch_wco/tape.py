"""Flat instruction tapes for batch evaluation of expressions.

The tape is a postorder encoding of the AST run by a little stack machine.
Both the numpy backend and the compiled kernel execute the same tape, so the
two implementations stay operation-for-operation identical.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import expr as E

OP_LIT = 0
OP_COORD = 1
OP_NEG = 2
OP_ADD = 3
OP_SUB = 4
OP_MUL = 5
OP_DIV = 6
OP_POW = 7
OP_EXP = 8
OP_PLOG = 9
OP_HDOT = 10

MAX_STACK = 64


@dataclass(frozen=True)
class Tape:
    ops: np.ndarray  # int32 (n,)
    args: np.ndarray  # int32 (n,)
    consts: np.ndarray  # complex128 (m,)
    vecs: np.ndarray  # complex128 (k, dim): hdot weight rows, already conjugated
    dim: int
    stack_need: int
    source: str


def compile_expr(e: E.Expr, dim: int) -> Tape:
    ops: list[int] = []
    args: list[int] = []
    consts: list[complex] = []
    vecs: list[np.ndarray] = []

    def emit(node: E.Expr) -> int:
        if isinstance(node, E.Lit):
            ops.append(OP_LIT)
            args.append(len(consts))
            consts.append(complex(node.value))
            return 1
        if isinstance(node, E.Coord):
            ops.append(OP_COORD)
            args.append(node.index - 1)
            return 1
        if isinstance(node, E.Neg):
            d = emit(node.arg)
            ops.append(OP_NEG)
            args.append(0)
            return d
        if isinstance(node, (E.Add, E.Sub, E.Mul, E.Div)):
            d1 = emit(node.left)
            d2 = emit(node.right)
            ops.append({E.Add: OP_ADD, E.Sub: OP_SUB, E.Mul: OP_MUL, E.Div: OP_DIV}[type(node)])
            args.append(0)
            return max(d1, 1 + d2)
        if isinstance(node, E.Pow):
            d = emit(node.base)
            ops.append(OP_POW)
            args.append(node.exponent)
            return d
        if isinstance(node, E.ExpNode):
            d = emit(node.arg)
            ops.append(OP_EXP)
            args.append(0)
            return d
        if isinstance(node, E.Plog):
            d = emit(node.arg)
            ops.append(OP_PLOG)
            args.append(0)
            return d
        if isinstance(node, E.Hdot):
            if len(node.weights) != dim:
                raise ValueError("hdot weight vector does not match the dimension")
            ops.append(OP_HDOT)
            args.append(len(vecs))
            vecs.append(np.conj(np.asarray(node.weights, dtype=np.complex128)))
            return 1
        raise TypeError(f"unknown node {node!r}")

    depth = emit(e)
    if depth > MAX_STACK:
        raise ValueError(f"expression too deep for the evaluation stack ({depth} > {MAX_STACK})")
    vec_arr = np.array(vecs, dtype=np.complex128) if vecs else np.zeros((0, dim), dtype=np.complex128)
    return Tape(
        ops=np.asarray(ops, dtype=np.int32),
        args=np.asarray(args, dtype=np.int32),
        consts=np.asarray(consts, dtype=np.complex128),
        vecs=np.ascontiguousarray(vec_arr),
        dim=dim,
        stack_need=depth,
        source=E.to_source(e),
    )
