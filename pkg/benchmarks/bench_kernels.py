"""Compare the numba and numpy kernel paths on representative sizes.

    python benchmarks/bench_kernels.py [--repeat N]
"""

import argparse
import timeit

import numpy as np

from nctomo import _kernels as K
from nctomo.field import DEFAULT_Q as Q
from nctomo.rscode import RsParitySpec, rs_syndrome


def cases(rng):
    a = rng.integers(0, Q, size=(8, 8), dtype=np.int64)
    tall = rng.integers(0, Q, size=(6, 200), dtype=np.int64)
    b = rng.integers(0, Q, size=(8, 192), dtype=np.int64)
    coeffs = rng.integers(0, Q, size=5, dtype=np.int64)
    xs = rng.integers(1, Q, size=400, dtype=np.int64)
    locs = tuple(int(x) for x in rng.choice(np.arange(1, 1_000_000), size=90, replace=False))
    spec = RsParitySpec(locs, 4, Q)
    syn = rs_syndrome(spec, {3: 11, 70: 5})
    return [
        ("rref 8x8", lambda f: f(a.copy(), Q), K.rref_numpy, K.rref_jit),
        ("rref 6x200", lambda f: f(tall.copy(), Q), K.rref_numpy, K.rref_jit),
        ("matmul 8x8 @ 8x192", lambda f: f(a, b, Q), K.matmul_numpy, K.matmul_jit),
        ("polyval deg4 x400", lambda f: f(coeffs, xs, Q), K.polyval_numpy, K.polyval_jit),
        ("rs decode l2=90 l1=4", lambda f: f(syn, spec._inv, 2, Q), K.rs_decode_core, K.rs_decode_jit),
    ]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=2000)
    args = ap.parse_args()
    rng = np.random.default_rng(0)
    print(f"{'kernel':<24}{'numpy us':>12}{'numba us':>12}{'speedup':>10}")
    for name, call, slow, fast in cases(rng):
        call(fast)  # compile outside the timed region
        t_slow = min(timeit.repeat(lambda: call(slow), number=args.repeat // 10, repeat=3)) / (args.repeat // 10)
        t_fast = min(timeit.repeat(lambda: call(fast), number=args.repeat, repeat=3)) / args.repeat
        print(f"{name:<24}{t_slow * 1e6:>12.1f}{t_fast * 1e6:>12.1f}{t_slow / t_fast:>9.1f}x")


if __name__ == "__main__":
    main()
