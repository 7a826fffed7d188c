"""Time the numba kernels against the numpy fallback on Cayley balls.

    python benchmarks/bench_kernels.py [--repeat 3]

Both backends are imported directly, so HYPQUOT_NO_NUMBA has no effect here.
"""
import argparse
import time

import numpy as np

from hypquot.groups import GroupSpec, cayley_ball
from hypquot.hyperbolicity import gromov_table
from hypquot.kernels import numba_impl, numpy_impl


def best_of(fn, repeat):
    out, best = None, float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def cases():
    z = cayley_ball(GroupSpec.parse("z2z3", 6))
    grid = cayley_ball(GroupSpec.parse("grid2d", 5))
    free = cayley_ball(GroupSpec.parse("free:2", 5))
    Dz = z.distance_table()
    Dg = grid.distance_table()
    W = np.exp(-0.3 * gromov_table(free, 0))
    np.fill_diagonal(W, 0.0)
    yield "all_pairs free(2) R5", lambda k: k.all_pairs(free.indptr, free.indices)
    yield "four_point grid2d R5", lambda k: k.four_point(Dg)
    yield "nesting_scan z2z3 R6", lambda k: k.nesting_scan(Dz, 0.0, 0.0, 0.0, True)
    yield "minplus_closure free(2) R5", lambda k: k.minplus_closure(W)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    if numba_impl is None:
        raise SystemExit("numba is unavailable; nothing to compare")
    print(f"{'kernel':32s} {'numpy s':>10s} {'numba s':>10s} {'speedup':>8s}")
    for name, call in cases():
        call(numba_impl)  # compile outside the timing loop
        t_np, r_np = best_of(lambda: call(numpy_impl), args.repeat)
        t_nb, r_nb = best_of(lambda: call(numba_impl), args.repeat)
        a = r_np[0] if isinstance(r_np, tuple) else r_np
        b = r_nb[0] if isinstance(r_nb, tuple) else r_nb
        assert np.allclose(a, b), name
        print(f"{name:32s} {t_np:10.4f} {t_nb:10.4f} {t_np / t_nb:8.1f}x")


if __name__ == "__main__":
    main()
