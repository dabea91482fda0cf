import numpy as np
import pytest

from robustmean.data import dataset_presets, generate
from robustmean.diagnostics import (
    PowerIterationError,
    check_unicity_assumption,
    influence_statistic,
    top_eigenvalue,
    variance_estimates,
)
from robustmean.estimator import estimate, fixed_point_residual
from robustmean.score import catoni, huber, polynomial, psi


@pytest.mark.parametrize("seed", range(5))
def test_power_iteration_matches_eigvalsh(seed):
    A = np.random.default_rng(seed).standard_t(4, size=(300, 12))
    oracle = np.linalg.eigvalsh(A.T @ A / A.shape[0])[-1]
    est = top_eigenvalue(A)
    # the Rayleigh quotient approaches the top eigenvalue from below
    assert 0 <= oracle - est <= 1e-6 * oracle


def test_power_iteration_failure_carries_count():
    # an unreachable tolerance exhausts the iteration budget
    A = np.random.default_rng(0).standard_normal((50, 5))
    with pytest.raises(PowerIterationError) as info:
        top_eigenvalue(A, tol=1e-300, max_iter=3)
    assert info.value.iterations == 3


def test_influence_examples():
    assert influence_statistic([[-1.0], [1.0]], [0.0], huber(5)) == 0.0
    assert influence_statistic([[3.0, 4.0]], [0.0, 0.0], huber(2)) == pytest.approx(2.0)
    assert influence_statistic([[3.0, 4.0]], [0.0, 0.0], huber(7)) == pytest.approx(5.0)


@pytest.mark.parametrize("f", [huber(2.0), catoni(2.0), polynomial(2.0, 5)], ids=["huber", "catoni", "poly"])
def test_influence_at_estimate_equals_residual(f):
    X = np.random.default_rng(3).standard_t(3, size=(200, 6))
    th = estimate(X, f).estimate
    assert influence_statistic(X, th, f) == pytest.approx(fixed_point_residual(X, th, f), abs=1e-12)


@pytest.mark.parametrize("f", [huber(1.5), catoni(1.5), polynomial(1.5, 5)], ids=["huber", "catoni", "poly"])
def test_influence_bounds(f):
    rng = np.random.default_rng(4)
    X = rng.standard_t(2.5, size=(100, 4))
    th = rng.standard_normal(4)
    r = np.linalg.norm(X - th, axis=1)
    s = influence_statistic(X, th, f)
    assert s <= np.mean(psi(f, r)) + 1e-15
    assert np.mean(psi(f, r)) <= psi(f, r.max()) + 1e-15
    if f.kind.value == "huber":
        assert s <= f.beta


def test_huber_variance_below_beta_is_squared_distance():
    X = np.random.default_rng(5).uniform(-1, 1, size=(50, 3))
    th = X.mean(0)
    ve = variance_estimates(X, th, huber(10.0))
    assert ve.V_hat == pytest.approx(np.mean(np.sum((X - th) ** 2, axis=1)), rel=1e-14)


def test_one_dimension_rank_one():
    X = np.random.default_rng(6).standard_t(3, size=(80, 1))
    ve = variance_estimates(X, [0.2], catoni(1.0))
    assert ve.v_hat == pytest.approx(ve.V_hat, abs=1e-12)


def test_variance_needs_two_rows():
    with pytest.raises(ValueError):
        variance_estimates([[1.0, 2.0]], [0.0, 0.0], huber(1))


def _suite():
    for spec in dataset_presets(n=300, d=20):
        for seed in range(3):
            yield generate(spec.with_seed(seed)).X
    rng = np.random.default_rng(7)
    yield rng.standard_normal((200, 5))
    yield rng.standard_t(2.2, size=(500, 1))


@pytest.mark.parametrize("make", [huber, catoni, lambda b: polynomial(b, 5)], ids=["huber", "catoni", "poly"])
def test_variance_chain_on_generated_data(make):
    for X in _suite():
        for beta in (0.5, 5.0, 50.0):
            f = make(beta)
            th = estimate(X, f).estimate
            ve = variance_estimates(X, th, f)
            oracle_op = np.linalg.eigvalsh(np.cov(X.T, bias=True).reshape(X.shape[1], X.shape[1]))[-1]
            assert ve.opnorm_Sigma_hat == pytest.approx(oracle_op, rel=1e-6)
            assert 0 <= ve.v_hat <= ve.V_hat * (1 + 1e-9)
            assert ve.V_hat <= ve.trace_Sigma_hat * (1 + 1e-12)
            gap = float(np.sum((X.mean(0) - th) ** 2))
            assert ve.v_hat <= (ve.opnorm_Sigma_hat + gap) * (1 + 1e-6)
            r = np.linalg.norm(X - th, axis=1)
            assert ve.V_hat <= psi(f, r.max()) ** 2 * (1 + 1e-12)


def test_unicity_examples():
    assert check_unicity_assumption(np.full((10, 3), 2.0), huber(1)).passed
    X = np.random.default_rng(8).standard_normal((1000, 5))
    ok = check_unicity_assumption(X, huber(30.0))
    assert ok.passed and ok.margin > 0
    bad = check_unicity_assumption(X, huber(0.1))
    assert not bad.passed and bad.lhs > bad.rho_third
    with pytest.warns(RuntimeWarning):
        check_unicity_assumption(X, huber(0.1), warn=True)
