#!/usr/bin/env python3
"""Benchmark the compiled expression kernel against the numpy fallback.

Times batch value and jet evaluation for representative expressions over a
range of batch sizes, plus one end-to-end supremum estimate per backend.

Usage:
    python3 benchmarks/bench_backends.py [--sizes 64,1024,32768,1048576] [--repeat 5]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from bloch_wco import backends
from bloch_wco import domains as dom
from bloch_wco.engine import SupConfig, sup_estimate
from bloch_wco.expr import parse
from bloch_wco.operators import FieldContext, SymbolPair
from bloch_wco.tape import compile_expr

EXPRESSIONS = {
    "rational": ("(z1 - 0.3)/(1 - 0.3*z1) + z2^3", 2),
    "log_kernel": ("plog(2/(1 - hdot((0.6, 0.8i))))", 2),
    "weighted_symbol": ("(1 - z1)*plog(4/(1 - 0.9*z2)) + exp(z1*z2)", 2),
}


def _time(fn, repeat: int) -> float:
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_kernels(sizes, repeat) -> None:
    print(f"{'expression':18s} {'mode':6s} {'n':>9s} {'python':>12s} {'compiled':>12s} {'speedup':>8s}")
    for name, (text, d) in EXPRESSIONS.items():
        t = compile_expr(parse(text, d), d)
        for n in sizes:
            Z = dom.sample(dom.ball(d), "uniform", n, 1234)
            for mode in ("values", "jets"):
                if mode == "values":
                    py = _time(lambda: backends.eval_values_py(t, Z), repeat)
                else:
                    py = _time(lambda: backends.eval_jets_py(t, Z), repeat)
                line = f"{name:18s} {mode:6s} {n:9d} {py * 1e3:10.3f}ms"
                if backends.compiled_available():
                    if mode == "values":
                        vals = np.empty(n, dtype=np.complex128)
                        ok = np.empty(n, dtype=np.uint8)
                        cy = _time(
                            lambda: backends._core.eval_values(
                                t.ops, t.args, t.consts, t.vecs, Z, vals, ok
                            ),
                            repeat,
                        )
                    else:
                        vals = np.empty(n, dtype=np.complex128)
                        grads = np.empty((n, d), dtype=np.complex128)
                        ok = np.empty(n, dtype=np.uint8)
                        cy = _time(
                            lambda: backends._core.eval_jets(
                                t.ops, t.args, t.consts, t.vecs, Z, vals, grads, ok
                            ),
                            repeat,
                        )
                    line += f" {cy * 1e3:10.3f}ms {py / cy:7.2f}x"
                else:
                    line += f" {'n/a':>12s} {'-':>8s}"
                print(line)


def bench_end_to_end(repeat) -> None:
    import os

    print("\nend-to-end: supremum of the pullback-stretch criterion field (ball, dim 2)")
    pair = SymbolPair.parse(dom.ball(2), "1 - z1", ["(1 + z1)/2", "0"])
    cfg = SupConfig()
    modes = ["python"] + (["compiled"] if backends.compiled_available() else [])
    for mode in modes:
        os.environ["BLOCH_WCO_BACKEND"] = mode
        ctx = FieldContext(pair)
        dt = _time(lambda: sup_estimate(ctx.field("tau"), pair.domain, cfg), repeat)
        print(f"  {mode:9s} {dt * 1e3:10.1f}ms per estimate")
    os.environ.pop("BLOCH_WCO_BACKEND", None)


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--sizes", default="64,1024,32768,1048576")
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    sizes = [int(s) for s in args.sizes.split(",")]
    print(f"active backend: {backends.active_backend()}")
    bench_kernels(sizes, args.repeat)
    bench_end_to_end(max(args.repeat // 2, 1))


if __name__ == "__main__":
    main()
