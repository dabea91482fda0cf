import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp
from scipy.stats import ortho_group

from robustmean.comparators import weiszfeld
from robustmean.data import ParetoCoords, DatasetSpec, generate
from robustmean.estimator import (
    EstimatorConfig,
    coordinatewise_median,
    estimate,
    fixed_point_residual,
    irls_estimate,
    objective,
    population_location_1d,
)
from robustmean.score import catoni, huber, polynomial, psi, psi_inverse
from robustmean.tuning import select_beta

ALL = [huber, catoni, lambda b: polynomial(b, 5)]
ALL_IDS = ["huber", "catoni", "poly"]


def test_coordinatewise_median_examples():
    np.testing.assert_array_equal(coordinatewise_median([[0, 0], [1, 2], [2, 4]]), [1, 2])
    np.testing.assert_array_equal(coordinatewise_median([[0], [10]]), [5])
    with pytest.raises(ValueError):
        coordinatewise_median(np.empty((0, 3)))


def test_coordinatewise_median_initialisation_radius():
    # |median - mean| <= 2 sqrt(2 Tr Sigma) fails with probability <= 20 exp(-500/8)
    bound = 2 * math.sqrt(2 * 20)
    for seed in range(100):
        X = np.random.default_rng(seed).standard_normal((500, 20))
        assert np.linalg.norm(coordinatewise_median(X)) <= bound


def test_symmetric_three_points():
    res = estimate([[-1.0], [0.0], [1.0]], huber(10))
    assert res.estimate[0] == pytest.approx(0.0, abs=1e-15)
    assert res.iterations <= 2
    assert res.converged


@pytest.mark.parametrize("seed", range(5))
def test_large_beta_huber_is_the_mean(seed):
    X = np.random.default_rng(seed).standard_t(3, size=(200, 7))
    beta = np.max(np.linalg.norm(X - X.mean(0), axis=1)) * 1.01
    res = estimate(X, huber(beta))
    np.testing.assert_allclose(res.estimate, X.mean(0), atol=1e-10)


def test_result_invariants():
    X = generate(DatasetSpec(ParetoCoords(2.5), 300, 10, seed=3)).X
    for make in ALL:
        f = make(5.0)
        res = estimate(X, f)
        assert res.converged
        assert np.all((res.weights > 0) & (res.weights <= 1))
        assert res.residual <= 1e-10 * (1 + np.linalg.norm(res.estimate))
        assert res.residual == pytest.approx(fixed_point_residual(X, res.estimate, f), rel=1e-6, abs=1e-14)
        assert len(res.trace) == res.iterations


def test_fixed_point_residual_examples():
    c = np.array([1.0, -2.0, 3.0])
    assert fixed_point_residual(np.tile(c, (3, 1)), c, catoni(1)) == 0.0
    assert fixed_point_residual([[-1.0], [1.0]], [0.0], huber(10)) == 0.0


def test_non_finite_input_rejected():
    with pytest.raises(ValueError):
        estimate([[0.0], [np.nan]], huber(1))
    with pytest.raises(ValueError):
        estimate([[0.0], [np.inf]], huber(1))


def test_non_convergence_is_reported():
    X = np.random.default_rng(0).standard_normal((100, 3)) * 10
    res = irls_estimate(X, EstimatorConfig(huber(0.01), max_iter=2))
    assert not res.converged
    assert res.iterations == 2
    assert np.all(np.isfinite(res.estimate))


def test_config_validation():
    with pytest.raises(ValueError):
        EstimatorConfig(huber(1), tol=0)
    with pytest.raises(ValueError):
        EstimatorConfig(huber(1), max_iter=0)


def test_provided_init_reaches_same_limit():
    X = np.random.default_rng(4).standard_t(3, size=(400, 5))
    a = estimate(X, catoni(2.0)).estimate
    b = irls_estimate(X, EstimatorConfig(catoni(2.0), init=np.full(5, 10.0))).estimate
    np.testing.assert_allclose(a, b, atol=1e-8)


def test_deterministic():
    X = np.random.default_rng(9).standard_t(3, size=(300, 4))
    a, b = estimate(X, catoni(1.0)), estimate(X, catoni(1.0))
    assert np.array_equal(a.estimate, b.estimate) and a.trace == b.trace


@pytest.mark.parametrize("make", ALL, ids=ALL_IDS)
@given(seed=st.integers(0, 2**32 - 1), shift=hnp.arrays(float, 4, elements=st.floats(-1e3, 1e3)))
@settings(max_examples=25, deadline=None)
def test_translation_equivariance(make, seed, shift):
    X = np.random.default_rng(seed).standard_t(3, size=(150, 4))
    f = make(2.0)
    a = estimate(X, f).estimate
    b = estimate(X + shift, f).estimate
    np.testing.assert_allclose(b, a + shift, atol=1e-8)


@pytest.mark.parametrize("make", ALL, ids=ALL_IDS)
@pytest.mark.parametrize("seed", range(5))
def test_orthogonal_equivariance(make, seed):
    rng = np.random.default_rng(seed)
    X = rng.standard_t(3, size=(150, 6)) + 1.0
    Q = ortho_group.rvs(6, random_state=seed)
    f = make(2.0)
    # the coordinate median is not rotation-equivariant, so start both runs
    # from equivariant points and compare limits
    a = irls_estimate(X, EstimatorConfig(f, init=X.mean(0))).estimate
    b = irls_estimate(X @ Q.T, EstimatorConfig(f, init=Q @ X.mean(0))).estimate
    np.testing.assert_allclose(b, Q @ a, atol=1e-8)


@pytest.mark.parametrize("make", ALL, ids=ALL_IDS)
def test_objective_decreases_along_iterates(make):
    X = np.random.default_rng(11).standard_t(2.5, size=(120, 3)) * 3
    f = make(1.5)
    res = irls_estimate(X, EstimatorConfig(f, tol=1e-8), keep_iterates=True)
    J = [objective(X, th, f) for th in res.iterates]
    for a, b in zip(J, J[1:]):
        assert b <= a + 1e-12 * abs(a)


def _qualifying_beta(X, f_kind):
    """Plug-in beta >= 2 sqrt(2 Tr) + r_n + psi^{-1}(sqrt(2 V)), solved by fixed-point iteration."""
    n = X.shape[0]
    centred = X - X.mean(0)
    tr = float(np.sum(centred**2) / n)
    r_n = float(np.linalg.norm(X.mean(0)))
    base = 2 * math.sqrt(2 * tr) + r_n
    beta = base
    for _ in range(100):
        f = f_kind(beta)
        V = float(np.mean(psi(f, np.linalg.norm(centred, axis=1)) ** 2))
        nb = base + psi_inverse(f, math.sqrt(2 * V))
        if abs(nb - beta) < 1e-10:
            break
        beta = nb
    return beta, tr, r_n


@pytest.mark.parametrize("make", ALL, ids=ALL_IDS)
def test_contraction_rate_on_gaussian_data(make):
    hits = 0
    for seed in range(20):
        X = np.random.default_rng(seed).standard_normal((500, 20))
        beta, tr, r_n = _qualifying_beta(X, make)
        f = make(beta)
        res = irls_estimate(X, EstimatorConfig(f), keep_iterates=True)
        limit = irls_estimate(X, EstimatorConfig(f, tol=1e-15, max_iter=1000)).estimate
        errs = [np.linalg.norm(t - limit) for t in res.iterates]
        q = 1 / (1 + f.gamma / 2)
        ok = all(e <= q**m * errs[0] + 1e-13 for m, e in enumerate(errs))
        bound = math.ceil(math.log((2 * math.sqrt(2 * tr) + r_n) / 1e-10) / math.log(1 + f.gamma / 2)) + 5
        hits += ok and res.iterations <= bound
    assert hits >= 19


@pytest.mark.parametrize("make", ALL, ids=ALL_IDS)
def test_bisection_oracle_matches_irls_in_1d(make):
    x = np.random.default_rng(5).standard_t(3, size=301)
    f = make(1.0)
    atoms = [(v, 1 / x.size) for v in x]
    atoms[-1] = (x[-1], 1 - (x.size - 1) / x.size)
    theta = population_location_1d(atoms, f)
    est = irls_estimate(x[:, None], EstimatorConfig(f, tol=1e-13, max_iter=2000)).estimate[0]
    assert est == pytest.approx(theta, abs=1e-8)


def test_population_location_examples():
    for f in (catoni(0.3), polynomial(0.3, 5)):
        assert population_location_1d([(0, 0.5), (1, 0.5)], f) == pytest.approx(0.5, abs=1e-12)
    # both atoms clipped: every point of [0.3, 0.7] solves the Huber equation
    assert 0.3 - 1e-10 <= population_location_1d([(0, 0.5), (1, 0.5)], huber(0.3)) <= 0.7 + 1e-10
    assert population_location_1d([(0, 0.5), (1, 0.5)], huber(0.6)) == pytest.approx(0.5, abs=1e-12)
    assert population_location_1d([(0, 0.7), (1, 0.3)], huber(10)) == pytest.approx(0.3, abs=1e-10)
    assert population_location_1d([(2.5, 1.0)], catoni(1)) == 2.5
    with pytest.raises(ValueError):
        population_location_1d([(0, 0.5), (1, 0.4)], huber(1))
    with pytest.raises(ValueError):
        population_location_1d([], huber(1))


def test_catoni_bias_decays_like_inverse_square():
    betas = np.array([2.0, 4.0, 8.0, 16.0])
    bias = [abs(population_location_1d([(0, 0.7), (1, 0.3)], catoni(b)) - 0.3) for b in betas]
    slope = np.polyfit(np.log(betas), np.log(bias), 1)[0]
    assert slope == pytest.approx(-2.0, abs=0.2)


def test_huber_bias_bound_on_skewed_law():
    # a skewed three-atom law where some atoms exceed beta, so the bias is nonzero
    atoms = [(0.0, 0.6), (1.0, 0.3), (12.0, 0.1)]
    mean = sum(v * p for v, p in atoms)
    m2 = sum(p * (v - mean) ** 2 for v, p in atoms)
    for beta in (12.0, 16.0, 32.0, 64.0):
        bias = abs(population_location_1d(atoms, huber(beta)) - mean)
        assert bias <= 2 * m2 / beta


@pytest.mark.slow
def test_tuned_huber_beats_geometric_median_on_pareto():
    wins = 0
    for seed in range(100):
        X = generate(DatasetSpec(ParetoCoords(3.0), 1000, 100, seed=seed)).X
        sel = select_beta(X, "huber")
        err_h = np.linalg.norm(sel.result.estimate - 1.5)
        err_g = np.linalg.norm(weiszfeld(X).estimate - 1.5)
        wins += err_h < err_g
    assert wins >= 80
