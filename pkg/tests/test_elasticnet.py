import warnings

import numpy as np
import pytest

import oracles
from emomix.errors import DidNotConverge, NonFiniteInput
from emomix.learners import (
    elasticnet_kkt_residuals,
    elasticnet_objective,
    fit_elasticnet,
    predict,
)


def random_problem(rng, n=30, m=5, noise=0.3):
    X = rng.normal(size=(n, m))
    w = rng.normal(size=m)
    y = X @ w + rng.normal() + noise * rng.normal(size=n)
    return X, y


def test_zero_penalty_recovers_exact_linear_map():
    rng = np.random.default_rng(0)
    X = rng.normal(size=(40, 5))
    w_true = rng.normal(size=5)
    y = X @ w_true + 1.7
    model = fit_elasticnet(X, y, alpha=0.0, l1_ratio=0.5)
    assert np.allclose(model.weights, w_true, atol=1e-6)
    assert model.intercept == pytest.approx(1.7, abs=1e-6)
    assert np.allclose(predict(model, X), y, atol=1e-6)
    assert model.converged


def test_huge_penalty_collapses_to_mean():
    rng = np.random.default_rng(1)
    X, y = random_problem(rng)
    model = fit_elasticnet(X, y, alpha=1e6, l1_ratio=0.5)
    assert np.all(model.weights == 0.0)
    assert model.intercept == pytest.approx(y.mean(), abs=1e-12)


def test_matches_enumeration_oracle():
    rng = np.random.default_rng(2)
    for _ in range(8):
        X, y = random_problem(rng)
        alpha = float(10 ** rng.uniform(-3, 0))
        l1_ratio = float(rng.choice([0.1, 0.5, 0.9]))
        w_o, b_o = oracles.enet_enumerate(X, y, alpha, l1_ratio)
        model = fit_elasticnet(X, y, alpha, l1_ratio)
        f_o = elasticnet_objective(X, y, w_o, b_o, alpha, l1_ratio)
        f_s = elasticnet_objective(X, y, model.weights, model.intercept, alpha, l1_ratio)
        assert abs(f_s - f_o) <= 1e-8 * max(abs(f_o), 1e-12)


def test_kkt_conditions_hold_at_solution():
    rng = np.random.default_rng(3)
    for _ in range(5):
        X, y = random_problem(rng)
        model = fit_elasticnet(X, y, alpha=0.05, l1_ratio=0.5, tol=1e-10)
        res_active, slack = elasticnet_kkt_residuals(X, y, model)
        assert res_active <= 1e-8
        assert slack <= 1e-12


def test_objective_non_increasing_over_sweeps():
    rng = np.random.default_rng(4)
    X, y = random_problem(rng, n=50, m=8)
    alpha, l1_ratio = 0.02, 0.5
    values = []
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DidNotConverge)
        for sweeps in range(1, 8):
            model = fit_elasticnet(X, y, alpha, l1_ratio, max_iter=sweeps)
            values.append(
                elasticnet_objective(X, y, model.weights, model.intercept, alpha, l1_ratio)
            )
    for prev, cur in zip(values, values[1:]):
        assert cur <= prev + 1e-12


def test_warns_when_sweep_budget_exhausted():
    rng = np.random.default_rng(5)
    # strongly correlated columns converge slowly
    base = rng.normal(size=(40, 1))
    X = base + 0.01 * rng.normal(size=(40, 6))
    y = X @ rng.normal(size=6) + rng.normal(size=40)
    with pytest.warns(DidNotConverge):
        model = fit_elasticnet(X, y, alpha=1e-6, l1_ratio=0.1, max_iter=1)
    assert not model.converged
    assert model.n_sweeps == 1


def test_model_is_immutable_and_reports_shape():
    rng = np.random.default_rng(6)
    X, y = random_problem(rng)
    model = fit_elasticnet(X, y, alpha=0.1, l1_ratio=0.5)
    assert model.n_features == 5
    with pytest.raises(ValueError):
        model.weights[0] = 1.0


def test_input_validation():
    X = np.ones((4, 2))
    y = np.ones(4)
    with pytest.raises(ValueError):
        fit_elasticnet(X, y[:3], 0.1, 0.5)
    with pytest.raises(NonFiniteInput):
        fit_elasticnet(X * np.nan, y, 0.1, 0.5)
    with pytest.raises(ValueError):
        fit_elasticnet(X, y, -0.1, 0.5)
    with pytest.raises(ValueError):
        fit_elasticnet(X, y, 0.1, 1.5)
