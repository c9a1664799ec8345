"""Regression error metrics."""

import numpy as np

from .errors import EmptyVector, LengthMismatch, NonFiniteInput, ZeroVarianceTruth


def _check_pair(y_true, y_pred):
    y_true = np.asarray(y_true, dtype=np.float64)
    y_pred = np.asarray(y_pred, dtype=np.float64)
    if y_true.ndim != 1 or y_pred.ndim != 1:
        raise LengthMismatch("metrics expect 1-d arrays")
    if y_true.shape[0] != y_pred.shape[0]:
        raise LengthMismatch(f"{y_true.shape[0]} truths vs {y_pred.shape[0]} predictions")
    if y_true.shape[0] == 0:
        raise EmptyVector("cannot score zero samples")
    if not (np.all(np.isfinite(y_true)) and np.all(np.isfinite(y_pred))):
        raise NonFiniteInput("scores need finite inputs")
    return y_true, y_pred


def mse(y_true, y_pred) -> float:
    y_true, y_pred = _check_pair(y_true, y_pred)
    diff = y_true - y_pred
    return float(diff @ diff / diff.shape[0])


def rmse(y_true, y_pred) -> float:
    return float(np.sqrt(mse(y_true, y_pred)))


def r2(y_true, y_pred) -> float:
    """Coefficient of determination, 1 - SSE/SST with SST about the truth mean."""
    y_true, y_pred = _check_pair(y_true, y_pred)
    sst = float(np.sum((y_true - y_true.mean()) ** 2))
    if sst == 0.0:
        raise ZeroVarianceTruth("truth values are all identical")
    sse = float(np.sum((y_true - y_pred) ** 2))
    return 1.0 - sse / sst
