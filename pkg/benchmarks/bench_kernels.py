"""Time the compiled kernels against the NumPy fallback.

    python benchmarks/bench_kernels.py [--repeat N]

Prints one row per kernel with the best-of-N wall time of each backend, the
speed-up and the largest relative disagreement between their outputs.
"""
import argparse
import math
import timeit

import numpy as np

from quasicompact import _pykernels
from quasicompact.kernels import REFLECT_LAST, make_birth_death

try:
    from quasicompact import _ckernels
except ImportError:  # extension not built
    _ckernels = None


def cases():
    rng = np.random.default_rng(0)
    f = rng.normal(size=1500)
    yield "m1_pair_max (M=1500)", "m1_pair_max", (f, math.log(1.3))

    P = make_birth_death(0.75, 0.05, 0.2, {0: 0.1, 1: 0.9})
    A = P.csr(2000, REFLECT_LAST)
    x = rng.normal(size=2001)
    yield "csr_power_history (M=2000, n=200)", "csr_power_history", (A.indptr, A.indices, A.data, x, 200)

    m, n = 20_000, 30
    x1, x2 = np.full(m, 1.0), np.full(m, -1.0)
    scale = np.full((m, n), 0.5)
    shift = rng.normal(0.0, math.sqrt(0.75), size=(m, n))
    yield "coupled_affine_moments (2e4 paths x 30, a=2)", "coupled_affine_moments", (x1, x2, scale, shift, 2.0, 0.0)


def max_rel_diff(a, b):
    a = a if isinstance(a, tuple) else (a,)
    b = b if isinstance(b, tuple) else (b,)
    worst = 0.0
    for u, v in zip(a, b):
        u, v = np.asarray(u, dtype=float), np.asarray(v, dtype=float)
        scale = np.maximum(np.abs(v), 1e-300)
        worst = max(worst, float(np.max(np.abs(u - v) / scale)))
    return worst


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args(argv)
    if _ckernels is None:
        print("compiled extension not available; build with `pip install -e . --no-build-isolation`")
        return 1
    print(f"{'kernel':<46} {'cython [s]':>11} {'python [s]':>11} {'speed-up':>9} {'max rel diff':>13}")
    for label, name, call_args in cases():
        c_fn, p_fn = getattr(_ckernels, name), getattr(_pykernels, name)
        tc = min(timeit.repeat(lambda: c_fn(*call_args), number=1, repeat=args.repeat))
        tp = min(timeit.repeat(lambda: p_fn(*call_args), number=1, repeat=args.repeat))
        diff = max_rel_diff(c_fn(*call_args), p_fn(*call_args))
        print(f"{label:<46} {tc:>11.4f} {tp:>11.4f} {tp / tc:>8.1f}x {diff:>13.1e}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
