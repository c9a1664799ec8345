import numpy as np
import pytest

from emomix.errors import EmptyVector, LengthMismatch, NonFiniteInput, ZeroVarianceTruth
from emomix.metrics import mse, r2, rmse


def test_antipodal_predictions():
    y = np.array([-1.0, 1.0])
    pred = np.array([1.0, -1.0])
    assert mse(y, pred) == 4.0
    assert rmse(y, pred) == 2.0
    assert r2(y, pred) == -3.0


def test_perfect_predictions():
    y = np.array([0.2, -0.4, 0.9])
    assert mse(y, y) == 0.0
    assert rmse(y, y) == 0.0
    assert r2(y, y) == 1.0


def test_mean_prediction_scores_zero_r2():
    y = np.array([0.0, 0.5, 1.0, -0.3])
    pred = np.full(4, y.mean())
    assert r2(y, pred) == pytest.approx(0.0, abs=1e-15)


def test_rmse_is_root_of_mse():
    rng = np.random.default_rng(0)
    y, pred = rng.normal(size=50), rng.normal(size=50)
    assert rmse(y, pred) == pytest.approx(np.sqrt(mse(y, pred)), rel=1e-15)


def test_validation_errors():
    with pytest.raises(LengthMismatch):
        mse([1.0, 2.0], [1.0])
    with pytest.raises(EmptyVector):
        rmse([], [])
    with pytest.raises(NonFiniteInput):
        mse([np.nan], [0.0])
    with pytest.raises(ZeroVarianceTruth):
        r2([2.0, 2.0], [1.0, 2.0])
