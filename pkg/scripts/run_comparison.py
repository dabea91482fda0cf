"""Run the four-dataset estimator comparison and print per-estimator error summaries.

    python3 scripts/run_comparison.py --replicates 100 --jobs 4 --out results/comparison.csv
"""

import argparse
from pathlib import Path

from robustmean.bench import (
    BenchConfig,
    EstimatorSpec,
    comparison_estimators,
    read_records,
    run_benchmark,
    summarize,
    summary_table,
)
from robustmean.data import dataset_presets


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--replicates", type=int, default=100)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--jobs", type=int, default=1)
    ap.add_argument("--with-mean", action="store_true", help="also run the empirical mean")
    ap.add_argument("--out", default="results/comparison.csv")
    args = ap.parse_args()

    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    ests = comparison_estimators() + ([EstimatorSpec("mean", "mean")] if args.with_mean else [])
    cfg = BenchConfig(dataset_presets(), ests, args.replicates, args.seed, out)

    def progress(label, rep):
        if (rep + 1) % 10 == 0:
            print(f"  {label}: replicate {rep + 1}/{args.replicates}", flush=True)

    run_benchmark(cfg, jobs=args.jobs, progress=progress)
    records, complete = read_records(out)
    print(summary_table(summarize(records)), end="")
    print(f"records: {len(records)} written to {out} (complete={complete})")


if __name__ == "__main__":
    main()
