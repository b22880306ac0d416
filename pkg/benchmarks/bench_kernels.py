"""Compare the compiled kernels against the pure-Python/numpy fallbacks.

Run from the repository root:

    python3 benchmarks/bench_kernels.py [--n 2000] [--dim 10] [--repeat 3]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from oneirotax import kernels
from oneirotax.kernels import _kernels_py
from oneirotax.topics.density import core_distances

try:
    from oneirotax.kernels import _kernels
except ImportError:
    _kernels = None


def timeit(fn, repeat):
    best = float("inf")
    result = None
    for _ in range(repeat):
        start = time.perf_counter()
        result = fn()
        best = min(best, time.perf_counter() - start)
    return best, result


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=2000)
    ap.add_argument("--dim", type=int, default=10)
    ap.add_argument("--k", type=int, default=20)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    rng = np.random.default_rng(0)
    X = rng.standard_normal((args.n, args.dim))
    core = core_distances(X, 15)
    centers = X[rng.choice(args.n, size=args.k, replace=False)].copy()

    print(f"n={args.n} dim={args.dim} k={args.k} "
          f"(compiled extension available: {_kernels is not None})")

    rows = [("kernel", "pure (s)", "compiled (s)", "speedup", "agree")]

    t_pure, mst_pure = timeit(lambda: _kernels_py.mst_prim(X, core), args.repeat)
    if _kernels is not None:
        t_c, mst_c = timeit(lambda: _kernels.mst_prim(X, core), args.repeat)
        agree = np.isclose(mst_pure[:, 2].sum(), mst_c[:, 2].sum(), rtol=1e-10)
        rows.append(("mst_prim", f"{t_pure:.4f}", f"{t_c:.4f}",
                     f"{t_pure / t_c:.1f}x", str(bool(agree))))
    else:
        rows.append(("mst_prim", f"{t_pure:.4f}", "-", "-", "-"))

    t_pure, (lab_p, in_p) = timeit(
        lambda: _kernels_py.kmeans_assign(X, centers), args.repeat
    )
    if _kernels is not None:
        t_c, (lab_c, in_c) = timeit(
            lambda: _kernels.kmeans_assign(X, centers), args.repeat
        )
        agree = np.array_equal(lab_p, lab_c) and np.isclose(in_p, in_c, rtol=1e-10)
        rows.append(("kmeans_assign", f"{t_pure:.4f}", f"{t_c:.4f}",
                     f"{t_pure / t_c:.1f}x", str(bool(agree))))
    else:
        rows.append(("kmeans_assign", f"{t_pure:.4f}", "-", "-", "-"))

    widths = [max(len(r[i]) for r in rows) for i in range(5)]
    for r in rows:
        print("  ".join(c.ljust(w) for c, w in zip(r, widths)))
    print(f"active dispatch: {'compiled' if kernels.HAVE_COMPILED else 'pure'}")


if __name__ == "__main__":
    main()
