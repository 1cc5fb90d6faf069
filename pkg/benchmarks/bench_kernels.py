"""Compare the compiled and pure-Python term kernels.

    python3 benchmarks/bench_kernels.py [--terms 200] [--repeat 5]

Times the raw polynomial product on random operands over the 2D phase space
(4 even + 4 odd variables), then a full bracket of random integrals, with
each backend swapped into the variable table.
"""
import argparse
import timeit

import numpy as np

from pseudomech import kernels
from pseudomech.gbracket import BracketContext, gpb
from pseudomech.models import build_2d
from pseudomech.sampling import random_poly


def _with_backend(table, backend, fn):
    saved = table.kernel
    table.kernel = backend
    try:
        return fn()
    finally:
        table.kernel = saved


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--terms", type=int, default=200)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    model = build_2d()
    table = model.vartable
    ctx = BracketContext(table)
    rng = np.random.default_rng(0)
    f = random_poly(table, rng, max_degree=5, n_terms=args.terms)
    g = random_poly(table, rng, max_degree=5, n_terms=args.terms)
    I, J = random_poly(table, rng, 4, n_terms=40), random_poly(table, rng, 4, n_terms=40)

    backends = [("python", kernels.python_backend)]
    if kernels.compiled_backend is not None:
        backends.append(("cython", kernels.compiled_backend))
    else:
        print("compiled extension not available; timing the fallback only")

    results = {}
    for name, be in backends:
        mul = min(timeit.repeat(lambda: _with_backend(table, be, lambda: f * g), number=1, repeat=args.repeat))
        br = min(timeit.repeat(lambda: _with_backend(table, be, lambda: gpb(I, J, ctx)), number=1,
                               repeat=args.repeat))
        results[name] = (mul, br)
        print(f"{name:7} multiply {len(f)}x{len(g)} terms: {mul * 1e3:8.2f} ms   bracket: {br * 1e3:8.2f} ms")
    if len(results) == 2:
        (pm, pb), (cm, cb) = results["python"], results["cython"]
        print(f"speed-up  multiply {pm / cm:5.1f}x   bracket {pb / cb:5.1f}x")
        same = _with_backend(table, kernels.python_backend, lambda: f * g) == \
            _with_backend(table, kernels.compiled_backend, lambda: f * g)
        print(f"backends agree: {same}")


if __name__ == "__main__":
    main()
