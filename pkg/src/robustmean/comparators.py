"""Baseline mean estimators: empirical mean, geometric median, geometric median-of-means."""

from __future__ import annotations

import warnings
from typing import NamedTuple

import numpy as np

from .estimator import _as_matrix, coordinatewise_median

ANCHOR_EPS = 1e-12


class WeiszfeldResult(NamedTuple):
    estimate: np.ndarray
    iterations: int
    converged: bool


def empirical_mean(X) -> np.ndarray:
    X = _as_matrix(X)
    return X.mean(axis=0)


def weiszfeld(X, tol: float = 1e-8, max_iter: int = 1000, init=None) -> WeiszfeldResult:
    """Weiszfeld iteration for the geometric median with the Vardi-Zhang anchor fix.

    When the iterate sits on data points (within ``ANCHOR_EPS``) with total
    multiplicity ``eta``, the subgradient norm ``R`` of the remaining points
    decides: ``R <= eta`` means the iterate is optimal, otherwise the update
    is blended so it moves off the atom.
    """
    X = _as_matrix(X)
    theta = coordinatewise_median(X) if init is None else np.asarray(init, dtype=float).copy()
    for it in range(1, max_iter + 1):
        diff = X - theta
        r = np.sqrt(np.einsum("ij,ij->i", diff, diff))
        anchor = r <= ANCHOR_EPS
        free = ~anchor
        if not free.any():
            return WeiszfeldResult(theta, it - 1, True)
        inv = 1.0 / r[free]
        T = (inv @ X[free]) / inv.sum()
        eta = int(anchor.sum())
        if eta:
            R = float(np.linalg.norm(inv @ diff[free]))
            if R <= eta:
                return WeiszfeldResult(theta, it - 1, True)
            a = eta / R
            new = (1.0 - a) * T + a * theta
        else:
            new = T
        step = float(np.linalg.norm(new - theta))
        theta = new
        if step <= tol:
            return WeiszfeldResult(theta, it, True)
    return WeiszfeldResult(theta, max_iter, False)


def geometric_median(X, tol: float = 1e-8, max_iter: int = 1000) -> np.ndarray:
    res = weiszfeld(X, tol=tol, max_iter=max_iter)
    if not res.converged:
        warnings.warn(f"Weiszfeld did not converge in {max_iter} iterations", RuntimeWarning)
    return res.estimate


def block_sizes(n: int, k: int) -> list[int]:
    """Sizes of k contiguous blocks; the remainder goes one-per-block to the leading blocks."""
    if not 1 <= k <= n:
        raise ValueError(f"need 1 <= k <= n, got k={k}, n={n}")
    q, rem = divmod(n, k)
    return [q + 1 if i < rem else q for i in range(k)]


def block_means(X, k: int) -> np.ndarray:
    X = _as_matrix(X)
    sizes = block_sizes(X.shape[0], k)
    edges = np.cumsum([0] + sizes)
    return np.stack([X[a:b].mean(axis=0) for a, b in zip(edges[:-1], edges[1:])])


def geometric_median_of_means_result(X, k: int = 9, tol: float = 1e-8, max_iter: int = 1000) -> WeiszfeldResult:
    return weiszfeld(block_means(X, k), tol=tol, max_iter=max_iter)


def geometric_median_of_means(X, k: int = 9, tol: float = 1e-8, max_iter: int = 1000) -> np.ndarray:
    res = geometric_median_of_means_result(X, k, tol, max_iter)
    if not res.converged:
        warnings.warn(f"Weiszfeld did not converge in {max_iter} iterations", RuntimeWarning)
    return res.estimate
