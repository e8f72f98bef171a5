"""Time the numba and numpy kernels on the shapes the experiments use.

    python3 benchmarks/bench_kernels.py [--repeat 5]

The numba timings exclude compilation (one warm-up call first).
"""
import argparse
import timeit

import numpy as np

from meanfield import _kernels_numpy as ref
from meanfield._backend import HAS_NUMBA

CASES = [
    # (label, m, d, n)
    ("teacher-student d=2", 100, 2, 500),
    ("implicit-bias 2-D", 1000, 3, 100),
    ("teacher-student d=100", 400, 100, 100),
]


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    impls = {"numpy": ref}
    if HAS_NUMBA:
        from meanfield import _kernels_numba as fast

        impls["numba"] = fast
    else:
        print("numba not installed; timing numpy only")
    rng = np.random.default_rng(0)
    print(f"{'case':24s} {'op':15s} " + " ".join(f"{k:>12s}" for k in impls) + "   speedup")
    for label, m, d, n in CASES:
        W = rng.standard_normal((m, d + 1))
        X = rng.standard_normal((n, d))
        g = rng.standard_normal(n) / n
        for op, call in (("predict", lambda k: k.predict(W, X, 0, 0.1)),
                         ("potential_grad", lambda k: k.potential_grad(W, X, g, 0, 0.1))):
            times = {}
            for name, k in impls.items():
                call(k)  # warm-up / compile
                times[name] = min(timeit.repeat(lambda: call(k), number=20, repeat=args.repeat)) / 20
            cols = " ".join(f"{times[k] * 1e3:10.3f}ms" for k in impls)
            ratio = f"{times['numpy'] / times['numba']:8.2f}x" if "numba" in times else ""
            print(f"{label:24s} {op:15s} {cols} {ratio}")
    # iteration-bound: 2000 logistic steps on a 20 x 5 problem
    A = rng.standard_normal((20, 5))
    times = {}
    for name, k in impls.items():
        k.logistic_gd(A, np.zeros(5), 0.1, 10, 1)
        times[name] = min(timeit.repeat(lambda: k.logistic_gd(A, np.zeros(5), 0.1, 2000, 2000),
                                        number=5, repeat=args.repeat)) / 5
    cols = " ".join(f"{times[k] * 1e3:10.3f}ms" for k in impls)
    ratio = f"{times['numpy'] / times['numba']:8.2f}x" if "numba" in times else ""
    print(f"{'linear logistic n=20':24s} {'logistic_gd':15s} {cols} {ratio}")


if __name__ == "__main__":
    main()
