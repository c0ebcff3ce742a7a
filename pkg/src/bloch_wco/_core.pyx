# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled stack machine for expression tapes (values and first derivatives).

Runs the same postorder tapes as the numpy backend, one point at a time with
native complex doubles.  Singular evaluations surface through the ok mask.
"""

from libc.math cimport isfinite

cdef extern from "complex.h" nogil:
    double complex cexp(double complex)
    double complex clog(double complex)
    double creal(double complex)
    double cimag(double complex)

DEF MAX_STACK = 64
DEF MAX_DIM = 16

cdef int OP_LIT = 0, OP_COORD = 1, OP_NEG = 2, OP_ADD = 3, OP_SUB = 4
cdef int OP_MUL = 5, OP_DIV = 6, OP_POW = 7, OP_EXP = 8, OP_PLOG = 9, OP_HDOT = 10


cdef inline double complex _plog(double complex v) nogil:
    # negative reals are approached from above the cut
    if cimag(v) == 0.0:
        v = creal(v)
    return clog(v)


cdef inline double complex _ipow(double complex v, int n) nogil:
    cdef double complex r = 1.0
    cdef double complex p = v
    cdef int e = n if n >= 0 else -n
    while e:
        if e & 1:
            r = r * p
        e >>= 1
        if e:
            p = p * p
    if n < 0:
        r = 1.0 / r
    return r


def eval_values(int[::1] ops, int[::1] args,
                double complex[::1] consts, double complex[:, ::1] vecs,
                double complex[:, ::1] Z,
                double complex[::1] out, unsigned char[::1] ok):
    cdef Py_ssize_t npts = Z.shape[0]
    cdef Py_ssize_t dim = Z.shape[1]
    cdef Py_ssize_t ninstr = ops.shape[0]
    cdef Py_ssize_t i, k, j
    cdef int sp, op, a
    cdef double complex stack[MAX_STACK]
    cdef double complex v, acc

    with nogil:
        for i in range(npts):
            sp = 0
            for k in range(ninstr):
                op = ops[k]
                a = args[k]
                if op == OP_LIT:
                    stack[sp] = consts[a]
                    sp += 1
                elif op == OP_COORD:
                    stack[sp] = Z[i, a]
                    sp += 1
                elif op == OP_NEG:
                    stack[sp - 1] = -stack[sp - 1]
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
                    stack[sp - 1] = stack[sp - 1] / stack[sp]
                elif op == OP_POW:
                    stack[sp - 1] = _ipow(stack[sp - 1], a)
                elif op == OP_EXP:
                    stack[sp - 1] = cexp(stack[sp - 1])
                elif op == OP_PLOG:
                    stack[sp - 1] = _plog(stack[sp - 1])
                else:  # OP_HDOT
                    acc = 0.0
                    for j in range(dim):
                        acc = acc + Z[i, j] * vecs[a, j]
                    stack[sp] = acc
                    sp += 1
            v = stack[0]
            out[i] = v
            ok[i] = 1 if (isfinite(creal(v)) and isfinite(cimag(v))) else 0


def eval_jets(int[::1] ops, int[::1] args,
              double complex[::1] consts, double complex[:, ::1] vecs,
              double complex[:, ::1] Z,
              double complex[::1] out, double complex[:, ::1] out_grad,
              unsigned char[::1] ok):
    cdef Py_ssize_t npts = Z.shape[0]
    cdef Py_ssize_t dim = Z.shape[1]
    cdef Py_ssize_t ninstr = ops.shape[0]
    cdef Py_ssize_t i, k, j
    cdef int sp, op, a, n, good
    cdef double complex sv[MAX_STACK]
    cdef double complex sg[MAX_STACK * MAX_DIM]
    cdef double complex v, q, w, p

    if dim > MAX_DIM:
        raise ValueError("dimension exceeds the compiled kernel limit")

    with nogil:
        for i in range(npts):
            sp = 0
            for k in range(ninstr):
                op = ops[k]
                a = args[k]
                if op == OP_LIT:
                    sv[sp] = consts[a]
                    for j in range(dim):
                        sg[sp * MAX_DIM + j] = 0.0
                    sp += 1
                elif op == OP_COORD:
                    sv[sp] = Z[i, a]
                    for j in range(dim):
                        sg[sp * MAX_DIM + j] = 0.0
                    sg[sp * MAX_DIM + a] = 1.0
                    sp += 1
                elif op == OP_NEG:
                    sv[sp - 1] = -sv[sp - 1]
                    for j in range(dim):
                        sg[(sp - 1) * MAX_DIM + j] = -sg[(sp - 1) * MAX_DIM + j]
                elif op == OP_ADD:
                    sp -= 1
                    sv[sp - 1] = sv[sp - 1] + sv[sp]
                    for j in range(dim):
                        sg[(sp - 1) * MAX_DIM + j] = sg[(sp - 1) * MAX_DIM + j] + sg[sp * MAX_DIM + j]
                elif op == OP_SUB:
                    sp -= 1
                    sv[sp - 1] = sv[sp - 1] - sv[sp]
                    for j in range(dim):
                        sg[(sp - 1) * MAX_DIM + j] = sg[(sp - 1) * MAX_DIM + j] - sg[sp * MAX_DIM + j]
                elif op == OP_MUL:
                    sp -= 1
                    for j in range(dim):
                        sg[(sp - 1) * MAX_DIM + j] = (
                            sv[sp - 1] * sg[sp * MAX_DIM + j] + sv[sp] * sg[(sp - 1) * MAX_DIM + j]
                        )
                    sv[sp - 1] = sv[sp - 1] * sv[sp]
                elif op == OP_DIV:
                    sp -= 1
                    q = sv[sp - 1] / sv[sp]
                    for j in range(dim):
                        sg[(sp - 1) * MAX_DIM + j] = (
                            sg[(sp - 1) * MAX_DIM + j] - q * sg[sp * MAX_DIM + j]
                        ) / sv[sp]
                    sv[sp - 1] = q
                elif op == OP_POW:
                    n = a
                    if n == 0:
                        sv[sp - 1] = 1.0
                        for j in range(dim):
                            sg[(sp - 1) * MAX_DIM + j] = 0.0
                    else:
                        p = _ipow(sv[sp - 1], n - 1)
                        for j in range(dim):
                            sg[(sp - 1) * MAX_DIM + j] = n * p * sg[(sp - 1) * MAX_DIM + j]
                        sv[sp - 1] = p * sv[sp - 1]
                elif op == OP_EXP:
                    w = cexp(sv[sp - 1])
                    sv[sp - 1] = w
                    for j in range(dim):
                        sg[(sp - 1) * MAX_DIM + j] = w * sg[(sp - 1) * MAX_DIM + j]
                elif op == OP_PLOG:
                    v = sv[sp - 1]
                    sv[sp - 1] = _plog(v)
                    for j in range(dim):
                        sg[(sp - 1) * MAX_DIM + j] = sg[(sp - 1) * MAX_DIM + j] / v
                else:  # OP_HDOT
                    v = 0.0
                    for j in range(dim):
                        v = v + Z[i, j] * vecs[a, j]
                        sg[sp * MAX_DIM + j] = vecs[a, j]
                    sv[sp] = v
                    sp += 1
            v = sv[0]
            out[i] = v
            good = 1 if (isfinite(creal(v)) and isfinite(cimag(v))) else 0
            for j in range(dim):
                w = sg[j]
                out_grad[i, j] = w
                if not (isfinite(creal(w)) and isfinite(cimag(w))):
                    good = 0
            ok[i] = good
