"""Grid-search selection of the scale parameter beta.

The criterion trades an estimate of the variance against bounds on the
squared bias and on the corruption-induced bias:

    crit(beta) = V_hat(beta)/n + C_psi * MAD**4 / beta**2 + (budget * beta)**2
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .comparators import weiszfeld
from .estimator import EstimateResult, EstimatorConfig, _as_matrix, irls_estimate
from .score import C_PSI, Kind, ScoreFamily, psi


class DegenerateDataError(ValueError):
    pass


@dataclass
class GridPoint:
    beta: float
    criterion: float
    converged: bool
    V_hat: float
    iterations: int


@dataclass
class BetaSelection:
    beta_hat: float
    grid: list[GridPoint]
    mad: float
    c_psi: float
    result: EstimateResult | None = field(default=None, repr=False)

    def trace(self) -> list[tuple[float, float]]:
        return [(g.beta, g.criterion) for g in self.grid if g.converged]


def mad(X, gm_tol: float = 1e-8, gm_max_iter: int = 1000) -> float:
    """Median distance from the samples to their geometric median."""
    X = _as_matrix(X)
    gm = weiszfeld(X, tol=gm_tol, max_iter=gm_max_iter).estimate
    return float(np.median(np.linalg.norm(X - gm, axis=1)))


def beta_grid(mad_value: float, n: int, grid_size: int = 40) -> np.ndarray:
    top = mad_value * np.sqrt(n)
    return np.geomspace(top / 1e3, top, grid_size)


def criterion(V_hat: float, n: int, beta: float, c_psi: float, mad_value: float, budget: float) -> float:
    return V_hat / n + c_psi * mad_value**4 / beta**2 + (budget * beta) ** 2


def select_beta(
    X,
    kind: Kind | str,
    grid_size: int = 40,
    corruption_budget: float = 0.05,
    p: int = 5,
    tol: float = 1e-10,
    max_iter: int = 200,
    warm_start: bool = True,
    gm_tol: float = 1e-8,
) -> BetaSelection:
    X = _as_matrix(X)
    n = X.shape[0]
    kind = Kind(kind)
    if grid_size < 2:
        raise ValueError("grid_size must be >= 2")
    if n < 2:
        raise ValueError("need n >= 2 to select beta")
    m = mad(X, gm_tol)
    if not m > 0:
        raise DegenerateDataError("MAD is zero: data are degenerate (more than half the points coincide)")
    c_psi = C_PSI[kind]

    grid: list[GridPoint] = []
    best: tuple[float, int] | None = None
    best_result = None
    init = None
    for i, beta in enumerate(beta_grid(m, n, grid_size)):
        f = ScoreFamily(kind, float(beta), p)
        res = irls_estimate(X, EstimatorConfig(f, tol=tol, max_iter=max_iter, init=init))
        if warm_start:
            init = res.estimate
        if not res.converged:
            grid.append(GridPoint(float(beta), float("nan"), False, float("nan"), res.iterations))
            continue
        r = np.linalg.norm(X - res.estimate, axis=1)
        V_hat = float(np.mean(psi(f, r) ** 2))
        crit = criterion(V_hat, n, float(beta), c_psi, m, corruption_budget)
        grid.append(GridPoint(float(beta), crit, True, V_hat, res.iterations))
        # strict '<' keeps the smallest beta on ties (grid is increasing)
        if best is None or crit < best[0]:
            best = (crit, i)
            best_result = res
    if best is None:
        raise RuntimeError("no grid point converged; increase max_iter")
    return BetaSelection(grid[best[1]].beta, grid, m, c_psi, best_result)
