"""Iteratively re-weighted computation of multivariate M-estimators of location."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .score import ScoreFamily, psi, weight


@dataclass
class EstimatorConfig:
    score: ScoreFamily
    tol: float = 1e-10
    max_iter: int = 200
    init: np.ndarray | None = None  # None -> coordinate-wise median

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")


@dataclass
class EstimateResult:
    estimate: np.ndarray
    iterations: int
    converged: bool
    residual: float
    weights: np.ndarray
    trace: list[float] = field(default_factory=list)
    iterates: list[np.ndarray] | None = None


def _as_matrix(X) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    if X.ndim != 2 or X.shape[0] == 0:
        raise ValueError("expected a non-empty n x d matrix")
    return X


def coordinatewise_median(X) -> np.ndarray:
    X = _as_matrix(X)
    return np.median(X, axis=0)


def fixed_point_residual(X, theta, f: ScoreFamily) -> float:
    """Norm of the averaged score vectors (X_i - theta)/|X_i - theta| * psi(|X_i - theta|)."""
    X = _as_matrix(X)
    diff = X - np.asarray(theta, dtype=float)
    r = np.sqrt(np.einsum("ij,ij->i", diff, diff))
    scaled = np.zeros_like(r)
    nz = r > 0
    scaled[nz] = psi(f, r[nz]) / r[nz]
    return float(np.linalg.norm(scaled @ diff) / X.shape[0])


def irls_estimate(X, cfg: EstimatorConfig, keep_iterates: bool = False) -> EstimateResult:
    """Solve sum_i w_i (X_i - theta) = 0 with w_i = psi(r_i)/r_i by fixed-point iteration.

    Each step replaces theta by the w-weighted mean of the rows. Iteration stops
    when the step length is at most ``tol * (1 + |theta|)`` and the fixed-point
    residual at the new iterate is at most ``tol * min(beta, 1 + |theta|)``.
    Capping the residual threshold at ``tol * beta`` keeps the stopping point
    stable when the data are shifted far from the origin.
    """
    X = _as_matrix(X)
    if not np.all(np.isfinite(X)):
        raise ValueError("input contains non-finite entries")
    n, d = X.shape
    f = cfg.score

    if cfg.init is None:
        origin = coordinatewise_median(X)
    else:
        origin = np.asarray(cfg.init, dtype=float).reshape(d)
        if not np.all(np.isfinite(origin)):
            raise ValueError("initial point contains non-finite entries")

    # Work in coordinates centred at the starting point; distances are then
    # computed from |Xc_i|^2 - 2 <Xc_i, t> + |t|^2 without forming X - theta.
    Xc = X - origin
    sq = np.einsum("ij,ij->i", Xc, Xc)

    def weights_at(t):
        r2 = sq - 2.0 * (Xc @ t) + t @ t
        np.maximum(r2, 0.0, out=r2)
        return weight(f, np.sqrt(r2))

    t = np.zeros(d)
    w = weights_at(t)
    s = w @ Xc
    W = w.sum()
    trace: list[float] = []
    iterates = [origin.copy()] if keep_iterates else None
    converged = False
    residual = float(np.linalg.norm(s - W * t) / n)
    it = 0
    while it < cfg.max_iter:
        t_next = s / W
        step = float(np.linalg.norm(t_next - t))
        thresh = cfg.tol * (1.0 + np.linalg.norm(t + origin))
        t = t_next
        it += 1
        trace.append(step)
        if keep_iterates:
            iterates.append(t + origin)
        w = weights_at(t)
        s = w @ Xc
        W = w.sum()
        residual = float(np.linalg.norm(s - W * t) / n)
        if step <= thresh and residual <= cfg.tol * min(f.beta, 1.0 + np.linalg.norm(t + origin)):
            converged = True
            break

    return EstimateResult(
        estimate=t + origin,
        iterations=it,
        converged=converged,
        residual=residual,
        weights=w,
        trace=trace,
        iterates=iterates,
    )


def estimate(X, f: ScoreFamily, **kwargs) -> EstimateResult:
    """Shorthand for ``irls_estimate(X, EstimatorConfig(f, **kwargs))``."""
    return irls_estimate(X, EstimatorConfig(f, **kwargs))


def objective(X, theta, f: ScoreFamily) -> float:
    """J_n(theta) = mean of rho(|X_i - theta|). Slow for non-Huber families."""
    from .score import rho

    X = _as_matrix(X)
    r = np.linalg.norm(X - np.asarray(theta, dtype=float), axis=1)
    return float(np.mean(rho(f, r)))


def population_location_1d(atoms, f: ScoreFamily, tol: float = 1e-12) -> float:
    """Location T(P) of a discrete law on the real line.

    ``atoms`` is a sequence of (value, probability). The root of
    g(theta) = sum_j p_j sign(x_j - theta) psi(|x_j - theta|) is bracketed by
    the extreme atoms and found by bisection; g is strictly decreasing there.
    """
    vals = np.array([a[0] for a in atoms], dtype=float)
    probs = np.array([a[1] for a in atoms], dtype=float)
    if vals.size == 0:
        raise ValueError("need at least one atom")
    if np.any(probs <= 0) or abs(probs.sum() - 1.0) > 1e-12:
        raise ValueError("probabilities must be positive and sum to 1")
    lo, hi = float(vals.min()), float(vals.max())
    if lo == hi:
        return lo

    def g(theta):
        diff = vals - theta
        return float(np.sum(probs * np.sign(diff) * psi(f, np.abs(diff))))

    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if g(mid) > 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
