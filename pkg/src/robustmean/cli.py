"""Command-line interface: ``robustmean {estimate,tune,generate,bench,tails}``.

Exit codes: 0 success, 1 usage error, 2 numerical failure, 3 I/O failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
from pathlib import Path

import numpy as np

from . import bench
from .data import (
    CorruptionSpec,
    CSVFormatError,
    DatasetSpec,
    ParetoCoords,
    ScaledOnes,
    StudentComponent,
    StudentMixture,
    dataset_presets,
    format_csv,
    generate,
    parse_csv,
    read_csv,
    spec_to_dict,
)
from .estimator import EstimatorConfig, irls_estimate
from .score import Kind, ScoreFamily
from .tuning import DegenerateDataError, select_beta

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC, EXIT_IO = 0, 1, 2, 3
SEED_ENV = "ROBUSTMEAN_SEED"


class UsageError(Exception):
    pass


class NumericalError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _positive_float(s: str) -> float:
    v = float(s)
    if not v > 0:
        raise argparse.ArgumentTypeError(f"expected a positive number, got {s}")
    return v


def _seed(args) -> int:
    if args.seed is not None:
        return args.seed
    env = os.environ.get(SEED_ENV)
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise UsageError(f"{SEED_ENV} must be an integer, got {env!r}") from None
    return 0


def _atomic_write(path: Path, text: str) -> None:
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def _load_matrix(path: str) -> np.ndarray:
    if path == "-":
        return parse_csv(sys.stdin.read())
    return read_csv(path)


# -- subcommands ---------------------------------------------------------------


def cmd_estimate(args) -> int:
    X = _load_matrix(args.input)
    kind = Kind(args.estimator)
    if args.auto_beta:
        sel = select_beta(X, kind, grid_size=args.grid_size, p=args.p, tol=args.tol, max_iter=args.max_iter)
        res, beta = sel.result, sel.beta_hat
    else:
        beta = args.beta
        res = irls_estimate(X, EstimatorConfig(ScoreFamily(kind, beta, args.p), tol=args.tol, max_iter=args.max_iter))
    if args.output == "json":
        out = {
            "estimate": [float(v) for v in res.estimate],
            "iterations": res.iterations,
            "converged": res.converged,
            "residual": res.residual,
            "beta_used": beta,
        }
        sys.stdout.write(json.dumps(out) + "\n")
    else:
        sys.stdout.write(format_csv(res.estimate[None, :]))
    return EXIT_OK


def cmd_tune(args) -> int:
    X = _load_matrix(args.input)
    sel = select_beta(
        X, Kind(args.estimator), grid_size=args.grid_size, corruption_budget=args.budget, p=args.p,
        tol=args.tol, max_iter=args.max_iter,
    )
    out = {
        "beta_hat": sel.beta_hat,
        "mad": sel.mad,
        "c_psi": sel.c_psi,
        "grid": [
            {"beta": g.beta, "criterion": g.criterion if g.converged else None, "converged": g.converged}
            for g in sel.grid
        ],
    }
    sys.stdout.write(json.dumps(out) + "\n")
    return EXIT_OK


def _spec_from_flags(args) -> DatasetSpec:
    if args.preset is not None:
        spec = dataset_presets()[args.preset - 1]
        n = args.n if args.n is not None else spec.n
        d = args.d if args.d is not None else spec.d
        return DatasetSpec(spec.generator, n, d, spec.corruption, 0, spec.label)
    if args.generator is None:
        raise UsageError("give --preset or --generator")
    n = args.n if args.n is not None else 1000
    d = args.d if args.d is not None else 100
    if args.generator == "pareto":
        gen = ParetoCoords(args.alpha, args.scale)
    else:
        if len(args.weights) != len(args.means):
            raise UsageError("--weights and --means must have the same length")
        comps = [StudentComponent(w, m, args.dof) for w, m in zip(args.weights, args.means)]
        gen = StudentMixture(tuple(comps))
    corr = CorruptionSpec(args.outliers, ScaledOnes(args.outlier_scale)) if args.outliers else None
    return DatasetSpec(gen, n, d, corr, 0, args.generator)


def cmd_generate(args) -> int:
    try:
        spec = _spec_from_flags(args).with_seed(_seed(args))
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    ds = generate(spec)
    out = Path(args.out)
    meta_path = Path(args.meta) if args.meta else out.with_suffix(out.suffix + ".json")
    meta = {
        "true_mean": [float(v) for v in ds.true_mean],
        "outlier_indices": ds.outlier_indices,
        "spec": spec_to_dict(spec),
    }
    _atomic_write(out, format_csv(ds.X))
    _atomic_write(meta_path, json.dumps(meta, indent=2) + "\n")
    return EXIT_OK


def cmd_bench(args) -> int:
    seed = _seed(args)
    if args.jobs < 1 or (args.replicates is not None and args.replicates < 1):
        raise UsageError("--jobs and --replicates must be >= 1")
    if args.paper_figure:
        cfg = bench.comparison_config(args.replicates or 100, seed)
    elif args.config:
        try:
            cfg = bench.load_config(args.config)
        except (KeyError, TypeError, ValueError) as exc:
            raise UsageError(f"invalid config: {exc}") from None
        if args.replicates:
            cfg.replicates = args.replicates
        if args.seed is not None or os.environ.get(SEED_ENV) is not None:
            cfg.master_seed = seed
    else:
        raise UsageError("give --paper-figure or --config")
    cfg.output_path = args.out
    records = bench.run_benchmark(cfg, jobs=args.jobs, timing=args.timing)
    summaries = bench.summarize(records)
    sys.stdout.write(bench.summary_table(summaries))
    if args.summary_csv:
        _atomic_write(Path(args.summary_csv), bench.summary_csv(summaries))
    worst = max(s.failures / s.count for s in summaries)
    if worst > 0.10:
        raise NumericalError(f"an estimator failed on {worst:.0%} of replicates")
    return EXIT_OK


def cmd_tails(args) -> int:
    f = ScoreFamily(Kind(args.estimator), args.beta, args.p)
    lambdas = args.lambdas if args.lambdas else bench.default_lambdas(args.beta, args.num_lambdas)
    try:
        bench._check_lambdas(lambdas, f)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    try:
        if args.law == "student":
            gen = StudentMixture((StudentComponent(1.0, args.center, args.dof),))
        else:
            gen = ParetoCoords(args.alpha, args.scale)
        spec = DatasetSpec(gen, args.n, args.d, None, 0, args.law)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if args.replicates < 1:
        raise UsageError("--replicates must be >= 1")
    res = bench.tail_experiment(spec, f, args.replicates, lambdas, _seed(args), reference_n=args.reference_n)
    lines = ["lambda,t_T,t_IF,slack,se,bound_ok"]
    for row in res.rows:
        lines.append(f"{row.lam!r},{row.t_T!r},{row.t_IF!r},{row.slack!r},{row.se!r},{str(row.bound_ok).lower()}")
    text = "\n".join(lines) + "\n"
    sys.stdout.write(text)
    if args.out:
        _atomic_write(Path(args.out), text)
    return EXIT_OK


# -- parser ----------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="robustmean", description="Robust M-estimation of the multivariate mean.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def solver_flags(sp):
        sp.add_argument("--p", type=int, default=5, help="exponent of the polynomial score (default 5)")
        sp.add_argument("--tol", type=_positive_float, default=1e-10, help="relative step tolerance")
        sp.add_argument("--max-iter", type=int, default=200, help="iteration cap of the re-weighting solver")
        sp.add_argument("--grid-size", type=int, default=40, help="number of beta grid points for tuning")

    e = sub.add_parser("estimate", help="compute an M-estimate from a CSV matrix")
    e.add_argument("input", help="headerless CSV, one observation per row ('-' for stdin)")
    e.add_argument("--estimator", choices=[k.value for k in Kind], default="huber", help="score family (default huber)")
    g = e.add_mutually_exclusive_group(required=True)
    g.add_argument("--beta", type=_positive_float, help="scale parameter beta")
    g.add_argument("--auto-beta", action="store_true", help="select beta by grid search")
    solver_flags(e)
    e.add_argument("--output", choices=["json", "csv"], default="json", help="JSON result object or one CSV row")
    e.set_defaults(func=cmd_estimate)

    t = sub.add_parser("tune", help="select beta and print the criterion trace as JSON")
    t.add_argument("input", help="headerless CSV ('-' for stdin)")
    t.add_argument("--estimator", choices=[k.value for k in Kind], default="huber", help="score family (default huber)")
    t.add_argument("--budget", type=float, default=0.05, help="assumed corruption fraction (default 0.05)")
    solver_flags(t)
    t.set_defaults(func=cmd_tune)

    gen = sub.add_parser("generate", help="write a seeded dataset as CSV plus a JSON sidecar")
    gen.add_argument("--preset", type=int, choices=[1, 2, 3, 4], help="one of the four benchmark datasets")
    gen.add_argument("--generator", choices=["pareto", "student"], help="inlier law when no preset is given")
    gen.add_argument("--alpha", type=float, default=3.0, help="Pareto shape")
    gen.add_argument("--scale", type=float, default=1.0, help="Pareto scale")
    gen.add_argument("--dof", type=float, default=3.0, help="Student degrees of freedom")
    gen.add_argument("--weights", type=float, nargs="+", default=[1.0], help="mixture weights")
    gen.add_argument("--means", type=float, nargs="+", default=[0.0], help="component means (times the ones vector)")
    gen.add_argument("--n", type=int, help="number of rows (default 1000)")
    gen.add_argument("--d", type=int, help="dimension (default 100)")
    gen.add_argument("--outliers", type=int, default=0, help="number of corrupted rows")
    gen.add_argument("--outlier-scale", type=float, default=300.0, help="outliers are set to scale * ones")
    gen.add_argument("--seed", type=int, help=f"RNG seed (env {SEED_ENV} when absent)")
    gen.add_argument("--out", required=True, help="output CSV path")
    gen.add_argument("--meta", help="sidecar JSON path (default: OUT.json)")
    gen.set_defaults(func=cmd_generate)

    b = sub.add_parser("bench", help="run the Monte-Carlo estimator comparison")
    src = b.add_mutually_exclusive_group(required=True)
    src.add_argument("--config", help="JSON benchmark configuration")
    src.add_argument("--paper-figure", action="store_true", help="4 presets x 5 estimators x 100 replicates")
    b.add_argument("--replicates", type=int, help="override the number of replicates")
    b.add_argument("--seed", type=int, help=f"master seed (env {SEED_ENV} when absent)")
    b.add_argument("--out", required=True, help="records CSV path")
    b.add_argument("--summary-csv", help="also write the summary as CSV")
    b.add_argument("--jobs", type=int, default=1, help="worker processes")
    b.add_argument("--timing", action="store_true", help="record wall times (output no longer reproducible)")
    b.set_defaults(func=cmd_bench)

    tl = sub.add_parser("tails", help="compare estimator and influence-statistic tail frequencies")
    tl.add_argument("--law", choices=["student", "pareto"], default="student", help="inlier law (default student)")
    tl.add_argument("--dof", type=float, default=3.0, help="Student degrees of freedom")
    tl.add_argument("--center", type=float, default=0.0, help="Student location (times the ones vector)")
    tl.add_argument("--alpha", type=float, default=3.0, help="Pareto shape")
    tl.add_argument("--scale", type=float, default=1.0, help="Pareto scale")
    tl.add_argument("--n", type=int, default=200, help="sample size per replicate")
    tl.add_argument("--d", type=int, default=1, help="dimension")
    tl.add_argument("--estimator", choices=[k.value for k in Kind], default="huber", help="score family (default huber)")
    tl.add_argument("--beta", type=_positive_float, default=5.0, help="scale parameter beta (default 5)")
    tl.add_argument("--p", type=int, default=5, help="exponent of the polynomial score (default 5)")
    tl.add_argument("--replicates", type=int, default=2000, help="Monte-Carlo replicates (default 2000)")
    tl.add_argument("--lambdas", type=float, nargs="+", help="explicit lambda values in (0, beta/2)")
    tl.add_argument("--num-lambdas", type=int, default=10, help="size of the default lambda grid")
    tl.add_argument("--reference-n", type=int, default=10**6, help="sample size of the plug-in location")
    tl.add_argument("--seed", type=int, help=f"master seed (env {SEED_ENV} when absent)")
    tl.add_argument("--out", help="also write the table as CSV")
    tl.set_defaults(func=cmd_tails)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"robustmean: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except CSVFormatError as exc:
        print(f"robustmean: error: {args.input if hasattr(args, 'input') else ''}: {exc}", file=sys.stderr)
        return EXIT_IO
    except OSError as exc:
        print(f"robustmean: error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (NumericalError, DegenerateDataError, ArithmeticError, RuntimeError) as exc:
        print(f"robustmean: error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"robustmean: error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
