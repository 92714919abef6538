"""Time the compiled kernels against the NumPy fallback.

    python benchmarks/bench_kernels.py [--repeat 5]

Prints one row per kernel and problem size with the best-of-repeat wall time
for each backend and the speedup. Results are also checked for agreement.
"""
import argparse
import timeit

import numpy as np

from regkmeans._kernels import _pykernels

try:
    from regkmeans._kernels import _ckernels
except ImportError:
    _ckernels = None


def _sqdist(X):
    g = (X * X).sum(axis=1)
    return np.maximum(g[:, None] + g[None] - 2 * X @ X.T, 0.0)


def cases(rng):
    for n in (12, 16, 18):
        X = rng.normal(size=(n, 4))
        yield "best_subset_1means", f"N={n}", (X, 1.5)
    for n, k in ((8, 2), (10, 2), (9, 3)):
        X = rng.normal(size=(n, 3))
        yield "best_labeling", f"N={n} k={k}", (_sqdist(X), k, 0.7)
    for n in (50, 200, 500):
        yield "project_row_cone", f"N={n}", (rng.normal(size=(n, n)),)


def bench(fn, args, repeat):
    return min(timeit.repeat(lambda: fn(*args), number=1, repeat=repeat))


def _same(a, b):
    if isinstance(a, tuple):
        return all(_same(x, y) for x, y in zip(a, b))
    return np.allclose(np.asarray(a, dtype=float), np.asarray(b, dtype=float), atol=1e-9)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    if _ckernels is None:
        print("compiled extension not built; timing the fallback only")
    rng = np.random.default_rng(args.seed)
    print(f"{'kernel':<20} {'size':<10} {'python [s]':>11} {'cython [s]':>11} {'speedup':>8}  agree")
    for name, size, a in cases(rng):
        t_py = bench(getattr(_pykernels, name), a, args.repeat)
        if _ckernels is None:
            print(f"{name:<20} {size:<10} {t_py:11.5f} {'-':>11} {'-':>8}  -")
            continue
        fc = getattr(_ckernels, name)
        t_c = bench(fc, a, args.repeat)
        agree = _same(getattr(_pykernels, name)(*a), fc(*a))
        print(f"{name:<20} {size:<10} {t_py:11.5f} {t_c:11.5f} {t_py / t_c:8.1f}x  {agree}")


if __name__ == "__main__":
    main()
