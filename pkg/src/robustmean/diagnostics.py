"""Empirical variance terms, influence statistic and the unicity check."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .estimator import _as_matrix
from .score import ScoreFamily, psi, rho


class PowerIterationError(RuntimeError):
    def __init__(self, iterations: int):
        super().__init__(f"power iteration did not converge after {iterations} iterations")
        self.iterations = iterations


@dataclass
class VarianceEstimates:
    V_hat: float
    v_hat: float
    trace_Sigma_hat: float
    opnorm_Sigma_hat: float


@dataclass
class UnicityReport:
    passed: bool
    lhs: float
    rhs: float
    rho_third: float
    psi_half_sq: float

    @property
    def margin(self) -> float:
        return self.rhs - self.lhs


def top_eigenvalue(A: np.ndarray, tol: float = 1e-9, max_iter: int = 1000) -> float:
    """Largest eigenvalue of (1/n) A^T A by power iteration.

    Uses only products with ``A``; the d x d matrix is never formed. The
    start vector is the normalised all-ones vector so results are reproducible.
    """
    n, d = A.shape
    v = np.full(d, 1.0 / np.sqrt(d))
    lam = 0.0
    for it in range(1, max_iter + 1):
        z = A.T @ (A @ v) / n
        lam_new = float(v @ z)
        nz = np.linalg.norm(z)
        if nz == 0.0:
            return 0.0
        v = z / nz
        if abs(lam_new - lam) <= tol * max(abs(lam_new), 1e-300):
            return lam_new
        lam = lam_new
    raise PowerIterationError(max_iter)


def _score_vectors(X: np.ndarray, theta) -> tuple[np.ndarray, np.ndarray]:
    diff = X - np.asarray(theta, dtype=float)
    r = np.sqrt(np.einsum("ij,ij->i", diff, diff))
    return diff, r


def influence_statistic(X, theta, f: ScoreFamily) -> float:
    """|(1/n) sum_i u_i psi(|X_i - theta|)| with u_i the unit direction to X_i."""
    X = _as_matrix(X)
    diff, r = _score_vectors(X, theta)
    coef = np.zeros_like(r)
    nz = r > 0
    coef[nz] = psi(f, r[nz]) / r[nz]
    return float(np.linalg.norm(coef @ diff) / X.shape[0])


def variance_estimates(X, theta, f: ScoreFamily, tol: float = 1e-9, max_iter: int = 1000) -> VarianceEstimates:
    X = _as_matrix(X)
    n = X.shape[0]
    if n < 2:
        raise ValueError("variance estimates need n >= 2")
    diff, r = _score_vectors(X, theta)
    ps = psi(f, r)
    V_hat = float(np.mean(ps**2))

    coef = np.zeros_like(r)
    nz = r > 0
    coef[nz] = ps[nz] / r[nz]
    v_hat = top_eigenvalue(diff * coef[:, None], tol, max_iter)

    centred = X - X.mean(axis=0)
    trace = float(np.einsum("ij,ij->", centred, centred) / n)
    opnorm = top_eigenvalue(centred, tol, max_iter)
    return VarianceEstimates(V_hat, v_hat, trace, opnorm)


def check_unicity_assumption(X, f: ScoreFamily, warn: bool = False) -> UnicityReport:
    """Plug-in check of mean rho(|X_i - mean|) < min(rho(beta/3), psi(beta/2)^2 / 2).

    Advisory only: the population condition is sufficient, not necessary.
    """
    X = _as_matrix(X)
    r = np.linalg.norm(X - X.mean(axis=0), axis=1)
    lhs = float(np.mean(rho(f, r)))
    rho_third = float(rho(f, f.beta / 3.0))
    psi_half_sq = float(psi(f, f.beta / 2.0)) ** 2 / 2.0
    rhs = min(rho_third, psi_half_sq)
    report = UnicityReport(lhs < rhs, lhs, rhs, rho_third, psi_half_sq)
    if warn and not report.passed:
        warnings.warn(
            f"unicity condition fails for beta={f.beta}: {lhs:.4g} >= {rhs:.4g}", RuntimeWarning
        )
    return report
