"""Time the re-weighting solver across sample sizes and dimensions.

Prints the median wall time over repeated runs, the iteration count and the
time per (row x coordinate x iteration), which should stay roughly flat if the
cost is linear in n*d per iteration.

    python3 scripts/run_complexity.py --repeats 10
"""

import argparse
import time

import numpy as np

from robustmean.estimator import EstimatorConfig, irls_estimate
from robustmean.score import catoni, huber, polynomial

FAMILIES = {"huber": huber, "catoni": catoni, "poly": lambda b: polynomial(b, 5)}


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--repeats", type=int, default=10)
    ap.add_argument("--family", choices=list(FAMILIES), default="huber")
    args = ap.parse_args()

    shapes = [(10**3, 10), (10**4, 10), (10**3, 100), (10**4, 100), (10**5, 10)]
    print(f"{'n':>7} {'d':>5} {'iters':>6} {'median s':>10} {'ns/(n d it)':>12}")
    for n, d in shapes:
        X = np.random.default_rng(n * 7 + d).standard_t(3, size=(n, d))
        med = np.median(np.linalg.norm(X - np.median(X, axis=0), axis=1))
        cfg = EstimatorConfig(FAMILIES[args.family](2 * float(med)))
        res = irls_estimate(X, cfg)
        times = []
        for _ in range(args.repeats):
            t = time.perf_counter()
            irls_estimate(X, cfg)
            times.append(time.perf_counter() - t)
        m = float(np.median(times))
        print(f"{n:7d} {d:5d} {res.iterations:6d} {m:10.5f} {1e9 * m / (n * d * max(res.iterations, 1)):12.3f}")


if __name__ == "__main__":
    main()
