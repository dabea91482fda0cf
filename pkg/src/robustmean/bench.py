"""Monte-Carlo harness: estimator comparison on seeded datasets and the tail experiment."""

from __future__ import annotations

import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import comparators
from .data import DatasetSpec, StudentMixture, dataset_presets, generate, mix_seed, spec_from_dict, spec_to_dict
from .diagnostics import influence_statistic
from .estimator import EstimatorConfig, irls_estimate
from .score import Kind, ScoreFamily, gamma_of
from .tuning import select_beta

CSV_COLUMNS = (
    "dataset_label",
    "estimator_label",
    "replicate",
    "error",
    "wall_time_s",
    "iterations",
    "converged",
    "beta_used",
)
TRAILER = "# complete"

M_KINDS = {k.value for k in Kind}
BASELINE_KINDS = {"mean", "gmed", "gmom"}


@dataclass(frozen=True)
class EstimatorSpec:
    label: str
    kind: str  # huber | catoni | poly | mean | gmed | gmom
    beta: float | None = None  # None selects beta by grid search
    p: int = 5
    k: int = 9
    tol: float = 1e-10
    max_iter: int = 200
    grid_size: int = 40
    gm_tol: float = 1e-8
    gm_max_iter: int = 1000

    def __post_init__(self):
        if self.kind not in M_KINDS | BASELINE_KINDS:
            raise ValueError(f"unknown estimator kind {self.kind!r}")


@dataclass
class BenchConfig:
    datasets: list[DatasetSpec]
    estimators: list[EstimatorSpec]
    replicates: int = 100
    master_seed: int = 0
    output_path: Path | str | None = None

    def __post_init__(self):
        if self.replicates < 1:
            raise ValueError("replicates must be >= 1")
        for what, labels in (
            ("estimator", [e.label for e in self.estimators]),
            ("dataset", [d.label for d in self.datasets]),
        ):
            if len(set(labels)) != len(labels):
                raise ValueError(f"{what} labels must be unique")


@dataclass
class BenchRecord:
    dataset_label: str
    estimator_label: str
    replicate: int
    error: float
    wall_time_s: float
    iterations: int
    converged: bool
    beta_used: float | None = None

    @property
    def failed(self) -> bool:
        return not math.isfinite(self.error)


def comparison_estimators() -> list[EstimatorSpec]:
    return [
        EstimatorSpec("huber", "huber"),
        EstimatorSpec("catoni", "catoni"),
        EstimatorSpec("poly", "poly", p=5),
        EstimatorSpec("gmed", "gmed"),
        EstimatorSpec("gmom", "gmom", k=9),
    ]


def comparison_config(replicates: int = 100, master_seed: int = 0, output_path=None) -> BenchConfig:
    return BenchConfig(dataset_presets(), comparison_estimators(), replicates, master_seed, output_path)


def replicate_seed(master_seed: int, dataset_index: int, replicate: int) -> int:
    return mix_seed(mix_seed(master_seed, dataset_index), replicate)


def run_estimator(X: np.ndarray, est: EstimatorSpec) -> tuple[np.ndarray, int, bool, float | None]:
    """Returns (estimate, iterations, converged, beta_used)."""
    if est.kind == "mean":
        return comparators.empirical_mean(X), 0, True, None
    if est.kind == "gmed":
        r = comparators.weiszfeld(X, est.gm_tol, est.gm_max_iter)
        return r.estimate, r.iterations, r.converged, None
    if est.kind == "gmom":
        r = comparators.geometric_median_of_means_result(X, est.k, est.gm_tol, est.gm_max_iter)
        return r.estimate, r.iterations, r.converged, None
    if est.beta is None:
        sel = select_beta(X, est.kind, grid_size=est.grid_size, p=est.p, tol=est.tol, max_iter=est.max_iter, gm_tol=est.gm_tol)
        res = sel.result
        return res.estimate, res.iterations, res.converged, sel.beta_hat
    f = ScoreFamily(Kind(est.kind), est.beta, est.p)
    res = irls_estimate(X, EstimatorConfig(f, tol=est.tol, max_iter=est.max_iter))
    return res.estimate, res.iterations, res.converged, est.beta


def _run_item(args) -> list[BenchRecord]:
    spec, est_list, d_index, replicate, master_seed = args
    ds = generate(spec.with_seed(replicate_seed(master_seed, d_index, replicate)))
    out = []
    for est in est_list:
        t0 = time.perf_counter()
        try:
            theta, iters, conv, beta = run_estimator(ds.X, est)
            err = float(np.linalg.norm(theta - ds.true_mean))
        except Exception:  # a failing estimator is recorded, not fatal
            err, iters, conv, beta = float("nan"), 0, False, None
        out.append(BenchRecord(spec.label, est.label, replicate, err, time.perf_counter() - t0, iters, conv, beta))
    return out


def _fmt_float(x: float | None) -> str:
    if x is None:
        return ""
    return repr(float(x))


def format_record(rec: BenchRecord, timing: bool = False) -> str:
    return ",".join(
        [
            rec.dataset_label,
            rec.estimator_label,
            str(rec.replicate),
            _fmt_float(rec.error),
            _fmt_float(rec.wall_time_s) if timing else "",
            str(rec.iterations),
            "true" if rec.converged else "false",
            _fmt_float(rec.beta_used),
        ]
    )


def run_benchmark(cfg: BenchConfig, jobs: int = 1, timing: bool = False, progress=None) -> list[BenchRecord]:
    """Run every estimator on every (dataset, replicate) pair.

    Records are ordered by (dataset, estimator, replicate) in configuration
    order. When ``cfg.output_path`` is set they are written dataset by dataset
    as soon as a dataset's replicates are complete; the ``# complete`` trailer
    is written last. Wall times go to the CSV only when ``timing`` is true,
    which keeps default output byte-reproducible.
    """
    est_list = list(cfg.estimators)
    fh = open(cfg.output_path, "w", encoding="utf-8", newline="\n") if cfg.output_path else None
    records: list[BenchRecord] = []
    pool = ProcessPoolExecutor(jobs) if jobs > 1 else None
    try:
        if fh:
            fh.write(",".join(CSV_COLUMNS) + "\n")
            fh.flush()
        for d_index, spec in enumerate(cfg.datasets):
            items = [(spec, est_list, d_index, r, cfg.master_seed) for r in range(cfg.replicates)]
            chunks = pool.map(_run_item, items) if pool else map(_run_item, items)
            block: list[BenchRecord] = []
            for chunk in chunks:
                block.extend(chunk)
                if progress:
                    progress(spec.label, chunk[0].replicate)
            order = {e.label: i for i, e in enumerate(est_list)}
            block.sort(key=lambda rec: (order[rec.estimator_label], rec.replicate))
            if fh:
                fh.write("".join(format_record(rec, timing) + "\n" for rec in block))
                fh.flush()
            records.extend(block)
        if fh:
            fh.write(TRAILER + "\n")
    finally:
        if pool:
            pool.shutdown()
        if fh:
            fh.close()
    return records


def read_records(path) -> tuple[list[BenchRecord], bool]:
    """Parse a benchmark CSV; the flag tells whether the integrity trailer is present."""
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines or lines[0] != ",".join(CSV_COLUMNS):
        raise ValueError(f"{path}: missing or unexpected header")
    complete = bool(lines) and lines[-1] == TRAILER
    recs = []
    for line in lines[1:]:
        if line.startswith("#") or not line:
            continue
        ds, est, rep, err, wt, it, conv, beta = line.split(",")
        recs.append(
            BenchRecord(
                ds, est, int(rep), float(err), float(wt) if wt else float("nan"), int(it), conv == "true",
                float(beta) if beta else None,
            )
        )
    return recs, complete


# -- summaries ---------------------------------------------------------------


@dataclass
class Summary:
    dataset_label: str
    estimator_label: str
    count: int
    failures: int
    median: float
    q25: float
    q75: float
    mean: float
    max: float


def summarize(records: list[BenchRecord]) -> list[Summary]:
    """Per (dataset, estimator) error quantiles; midpoint interpolation between order statistics."""
    if not records:
        raise ValueError("no records to summarize")
    groups: dict[tuple[str, str], list[BenchRecord]] = {}
    for rec in records:
        groups.setdefault((rec.dataset_label, rec.estimator_label), []).append(rec)
    out = []
    for (ds, est), recs in groups.items():
        errs = np.array([r.error for r in recs if not r.failed])
        fails = len(recs) - errs.size
        if errs.size == 0:
            nan = float("nan")
            out.append(Summary(ds, est, len(recs), fails, nan, nan, nan, nan, nan))
            continue
        q25, med, q75 = np.quantile(errs, [0.25, 0.5, 0.75], method="midpoint")
        out.append(Summary(ds, est, len(recs), fails, float(med), float(q25), float(q75), float(errs.mean()), float(errs.max())))
    return out


SUMMARY_FIELDS = ("median", "q25", "q75", "mean", "max")


def summary_table(summaries: list[Summary]) -> str:
    header = ["dataset", "estimator", "n", "fail", *SUMMARY_FIELDS]
    rows = [
        [s.dataset_label, s.estimator_label, str(s.count), str(s.failures)]
        + [f"{getattr(s, k):.4f}" for k in SUMMARY_FIELDS]
        for s in summaries
    ]
    widths = [max(len(r[i]) for r in [header, *rows]) for i in range(len(header))]
    fmt = lambda r: "  ".join(c.ljust(w) if i < 2 else c.rjust(w) for i, (c, w) in enumerate(zip(r, widths)))  # noqa: E731
    return "\n".join([fmt(header), *map(fmt, rows)]) + "\n"


def summary_csv(summaries: list[Summary]) -> str:
    lines = ["dataset_label,estimator_label,count,failures," + ",".join(SUMMARY_FIELDS)]
    for s in summaries:
        vals = [repr(getattr(s, k)) for k in SUMMARY_FIELDS]
        lines.append(",".join([s.dataset_label, s.estimator_label, str(s.count), str(s.failures), *vals]))
    return "\n".join(lines) + "\n"


# -- config files ------------------------------------------------------------


def config_to_dict(cfg: BenchConfig) -> dict:
    return {
        "datasets": [spec_to_dict(s) for s in cfg.datasets],
        "estimators": [vars(e).copy() for e in cfg.estimators],
        "replicates": cfg.replicates,
        "master_seed": cfg.master_seed,
    }


def config_from_dict(obj: dict) -> BenchConfig:
    ests = []
    for e in obj["estimators"]:
        e = dict(e)
        if e.get("beta") in ("auto", None):
            e["beta"] = None
        ests.append(EstimatorSpec(**e))
    return BenchConfig(
        [spec_from_dict(s) for s in obj["datasets"]],
        ests,
        int(obj.get("replicates", 100)),
        int(obj.get("master_seed", 0)),
        obj.get("output_path"),
    )


def load_config(path) -> BenchConfig:
    return config_from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


# -- tail experiment -----------------------------------------------------------


@dataclass
class TailRow:
    lam: float
    t_T: float
    t_IF: float
    slack: float
    se: float
    bound_ok: bool


@dataclass
class TailResult:
    rows: list[TailRow]
    theta: np.ndarray
    n: int
    replicates: int
    gamma: float
    distances: np.ndarray = field(repr=False)
    influences: np.ndarray = field(repr=False)


def _check_lambdas(lambdas, f: ScoreFamily) -> np.ndarray:
    lams = np.asarray(lambdas, dtype=float)
    bad = lams[(lams <= 0) | (lams >= f.beta / 2)]
    if bad.size:
        raise ValueError(f"lambda values must lie in (0, beta/2) = (0, {f.beta / 2}); got {bad.tolist()}")
    return lams


def tail_frequencies(samples, theta, f: ScoreFamily, lambdas, tol: float = 1e-10, max_iter: int = 500) -> TailResult:
    """Empirical tail frequencies of |T(X) - theta| and of the influence statistic.

    ``bound_ok`` compares t_T(lam) with t_IF(lam*gamma/4) + exp(-n gamma^2/32)
    plus three standard errors of the difference of the two frequencies.
    """
    lams = _check_lambdas(lambdas, f)
    theta = np.asarray(theta, dtype=float)
    gamma = gamma_of(f)
    dist, infl = [], []
    n = None
    for X in samples:
        X = np.asarray(X, dtype=float)
        if X.ndim == 1:
            X = X[:, None]
        n = X.shape[0]
        res = irls_estimate(X, EstimatorConfig(f, tol=tol, max_iter=max_iter))
        dist.append(np.linalg.norm(res.estimate - theta))
        infl.append(influence_statistic(X, theta, f))
    dist, infl = np.array(dist), np.array(infl)
    R = dist.size
    if R == 0:
        raise ValueError("no samples")
    slack = math.exp(-n * gamma**2 / 32.0)
    rows = []
    for lam in lams:
        tT = float(np.mean(dist >= lam))
        tIF = float(np.mean(infl >= lam * gamma / 4.0))
        se = math.sqrt((tT * (1 - tT) + tIF * (1 - tIF)) / R)
        rows.append(TailRow(float(lam), tT, tIF, slack, se, tT <= tIF + slack + 3.0 * se))
    return TailResult(rows, theta, n, R, gamma, dist, infl)


def reference_location(spec: DatasetSpec, f: ScoreFamily, reference_n: int = 10**6, seed: int = 0) -> np.ndarray:
    """Population location T(P): exact for a single symmetric Student law, plug-in otherwise."""
    g = spec.generator
    if isinstance(g, StudentMixture) and len(g.components) == 1:
        return generate(spec.with_seed(seed)).true_mean
    n_ref = max(spec.n, min(reference_n, 10**7 // spec.d))
    big = DatasetSpec(g, n_ref, spec.d, None, mix_seed(seed, 2**32), spec.label)
    X = generate(big).X
    return irls_estimate(X, EstimatorConfig(f, tol=1e-12, max_iter=1000)).estimate


def tail_experiment(
    dist: DatasetSpec,
    f: ScoreFamily,
    replicates: int,
    lambdas,
    master_seed: int = 0,
    theta=None,
    reference_n: int = 10**6,
) -> TailResult:
    if dist.corruption is not None and dist.corruption.count > 0:
        raise ValueError("tail experiment expects an uncorrupted law")
    _check_lambdas(lambdas, f)
    if theta is None:
        theta = reference_location(dist, f, reference_n, master_seed)
    samples = (generate(dist.with_seed(mix_seed(master_seed, r))).X for r in range(replicates))
    return tail_frequencies(samples, theta, f, lambdas)


def default_lambdas(beta: float, count: int = 10) -> np.ndarray:
    """``count`` evenly spaced points strictly inside (0, beta/2)."""
    return (beta / 2.0) * np.arange(1, count + 1) / (count + 1)
