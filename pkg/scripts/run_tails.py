"""Compare the tail of |T - theta| with the tail of the influence statistic.

Sweeps the sample size for a 1-D Student law and Huber's score and prints, for
each n, how often the estimator deviates by at least lambda versus how often
the influence statistic exceeds lambda * gamma / 4.

    python3 scripts/run_tails.py --replicates 2000 --sizes 50 200 1000
"""

import argparse

from robustmean.bench import default_lambdas, tail_experiment
from robustmean.data import DatasetSpec, StudentComponent, StudentMixture
from robustmean.score import huber


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--dof", type=float, default=3.0)
    ap.add_argument("--beta", type=float, default=5.0)
    ap.add_argument("--replicates", type=int, default=2000)
    ap.add_argument("--sizes", type=int, nargs="+", default=[50, 200, 1000])
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    law = StudentMixture((StudentComponent(1.0, 0.0, args.dof),))
    lams = default_lambdas(args.beta)
    for n in args.sizes:
        res = tail_experiment(DatasetSpec(law, n, 1), huber(args.beta), args.replicates, lams, args.seed)
        print(f"n={n}  slack={res.rows[0].slack:.3g}")
        print(f"  {'lambda':>8} {'t_T':>8} {'t_IF':>8} {'3se':>8}  ok")
        for r in res.rows:
            print(f"  {r.lam:8.4f} {r.t_T:8.4f} {r.t_IF:8.4f} {3 * r.se:8.4f}  {r.bound_ok}")


if __name__ == "__main__":
    main()
