"""Score functions for M-estimators of location.

Three families are supported, each parametrised by a scale ``beta``:

* Huber:      psi(x) = min(x, beta)
* Catoni:     psi(x) = beta * log(1 + x/beta + x**2 / (2 beta**2))
* Polynomial: psi(x) = x / (1 + (x/beta)**(1 - 1/p))

All functions accept scalars or arrays of nonnegative residual norms.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
from scipy import integrate


class Kind(str, enum.Enum):
    HUBER = "huber"
    CATONI = "catoni"
    POLYNOMIAL = "poly"


# lower bound of psi' on [0, beta]
_GAMMA = {Kind.HUBER: 1.0, Kind.CATONI: 0.8, Kind.POLYNOMIAL: 0.25}

# squared-bias constants used by the beta-selection criterion
C_PSI = {Kind.HUBER: 1.0, Kind.CATONI: 5.0 / 32.0, Kind.POLYNOMIAL: 1.0 / 16.0}


@dataclass(frozen=True)
class ScoreFamily:
    kind: Kind
    beta: float
    p: int = 5

    def __post_init__(self):
        object.__setattr__(self, "kind", Kind(self.kind))
        if not (np.isfinite(self.beta) and self.beta > 0):
            raise ValueError(f"beta must be a positive finite number, got {self.beta}")
        if self.kind is Kind.POLYNOMIAL and (int(self.p) != self.p or self.p < 1):
            raise ValueError(f"p must be an integer >= 1, got {self.p}")
        object.__setattr__(self, "p", int(self.p))

    def with_beta(self, beta: float) -> "ScoreFamily":
        return ScoreFamily(self.kind, beta, self.p)

    @property
    def gamma(self) -> float:
        return gamma_of(self)

    @property
    def c_psi(self) -> float:
        return C_PSI[self.kind]


def huber(beta: float) -> ScoreFamily:
    return ScoreFamily(Kind.HUBER, beta)


def catoni(beta: float) -> ScoreFamily:
    return ScoreFamily(Kind.CATONI, beta)


def polynomial(beta: float, p: int = 5) -> ScoreFamily:
    return ScoreFamily(Kind.POLYNOMIAL, beta, p)


def _as_nonneg(x):
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise ValueError("score functions are defined on [0, inf); got a negative argument")
    return x


def _out(values, like):
    return float(values) if np.ndim(like) == 0 else values


def gamma_of(f: ScoreFamily) -> float:
    """Constant gamma with psi'(x) >= gamma on [0, beta]."""
    return _GAMMA[f.kind]


def psi(f: ScoreFamily, x):
    x = _as_nonneg(x)
    b = f.beta
    if f.kind is Kind.HUBER:
        out = np.minimum(x, b)
    elif f.kind is Kind.CATONI:
        u = x / b
        out = b * np.log1p(u + 0.5 * u * u)
    else:
        out = x / (1.0 + (x / b) ** (1.0 - 1.0 / f.p))
    return _out(out, x)


def psi_prime(f: ScoreFamily, x):
    """Derivative of psi. At the Huber kink x == beta the left derivative (1) is used."""
    x = _as_nonneg(x)
    b = f.beta
    if f.kind is Kind.HUBER:
        out = np.where(x <= b, 1.0, 0.0)
    elif f.kind is Kind.CATONI:
        u = x / b
        out = (1.0 + u) / (1.0 + u + 0.5 * u * u)
    else:
        a = 1.0 - 1.0 / f.p
        v = (x / b) ** a
        out = (1.0 + v / f.p) / (1.0 + v) ** 2
    return _out(out, x)


def weight(f: ScoreFamily, r):
    """Re-weighting factor psi(r)/r, extended by continuity with psi'(0) at r = 0."""
    r = _as_nonneg(r)
    b = f.beta
    if f.kind is Kind.HUBER:
        with np.errstate(divide="ignore"):
            out = np.minimum(1.0, b / r)
    elif f.kind is Kind.CATONI:
        u = r / b
        with np.errstate(divide="ignore", invalid="ignore"):
            out = np.where(u > 0, np.log1p(u + 0.5 * u * u) / u, 1.0)
    else:
        out = 1.0 / (1.0 + (r / b) ** (1.0 - 1.0 / f.p))
    return _out(out, r)


def _rho_quad(f: ScoreFamily, x: float) -> float:
    if x == 0.0:
        return 0.0
    val, _ = integrate.quad(lambda t: psi(f, t), 0.0, x, epsabs=0.0, epsrel=1e-10, limit=200)
    return val


def rho(f: ScoreFamily, x):
    """Loss rho(x) = int_0^x psi(t) dt.

    Closed form for Huber; adaptive quadrature otherwise, so keep this out of
    inner loops.
    """
    x = _as_nonneg(x)
    b = f.beta
    if f.kind is Kind.HUBER:
        out = np.where(x <= b, 0.5 * x * x, b * x - 0.5 * b * b)
    else:
        out = np.vectorize(lambda t: _rho_quad(f, float(t)), otypes=[float])(x)
    return _out(out, x)


def psi_inverse(f: ScoreFamily, y: float) -> float:
    """Smallest x with psi(x) >= y; inf when y exceeds sup psi (Huber)."""
    if y < 0:
        raise ValueError("psi_inverse needs y >= 0")
    if y == 0:
        return 0.0
    if f.kind is Kind.HUBER:
        return float(y) if y <= f.beta else float("inf")
    if f.kind is Kind.CATONI:
        # solve u + u^2/2 = e^{y/beta} - 1
        c = np.expm1(y / f.beta)
        u = -1.0 + np.sqrt(1.0 + 2.0 * c)
        return float(f.beta * u)
    # psi_P is increasing and psi_P(x) >= x/2 for x <= beta, so bracket then bisect
    lo, hi = 0.0, max(2.0 * y, f.beta)
    while psi(f, hi) < y:
        hi *= 2.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if psi(f, mid) < y:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-14 * hi:
            break
    return hi
