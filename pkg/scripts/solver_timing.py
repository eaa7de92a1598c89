"""Wall time of the exact W1 solver against scipy's HiGHS LP on random clouds."""
import argparse
import time

import numpy as np
from scipy.optimize import linprog
from scipy.sparse import coo_matrix

from swarmkin.measures import DiscreteMeasure
from swarmkin.transport import cost_matrix, solve_w1


def highs_w1(a, b, C):
    n, m = C.shape
    rows = np.concatenate([np.repeat(np.arange(n), m), n + np.tile(np.arange(m), n)])
    cols = np.concatenate([np.arange(n * m), np.arange(n * m)])
    A = coo_matrix((np.ones(2 * n * m), (rows, cols)), shape=(n + m, n * m))
    return linprog(C.ravel(), A_eq=A, b_eq=np.concatenate([a, b]), method="highs").fun


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--sizes", type=int, nargs="+", default=[50, 100, 200, 400, 800])
    p.add_argument("--dim", type=int, default=2)
    p.add_argument("--seed", type=int, default=0)
    args = p.parse_args()
    rng = np.random.default_rng(args.seed)
    solve_w1(*(DiscreteMeasure.from_arrays([[0.0] * args.dim], [[0.0] * args.dim]),) * 2)  # compile
    print("atoms  simplex_s  highs_s  |diff|")
    for n in args.sizes:
        f = DiscreteMeasure.empirical(rng.normal(size=(n, args.dim)), rng.normal(size=(n, args.dim)))
        g = DiscreteMeasure.empirical(rng.normal(size=(n, args.dim)) + 0.5, rng.normal(size=(n, args.dim)))
        t0 = time.perf_counter()
        d = solve_w1(f, g).distance
        t1 = time.perf_counter()
        ref = highs_w1(f.m, g.m, cost_matrix(f.points(), g.points()))
        t2 = time.perf_counter()
        print(f"{n:5d}  {t1 - t0:9.3f}  {t2 - t1:7.3f}  {abs(d - ref):.1e}")


if __name__ == "__main__":
    main()
