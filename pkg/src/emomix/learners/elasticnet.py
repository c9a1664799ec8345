"""Elastic-net linear regression by cyclic coordinate descent.

Minimizes

    (1/2n) ||y - Xw - b||^2 + alpha * (l1_ratio*||w||_1 + (1-l1_ratio)/2*||w||^2)

with an unpenalized intercept.  Data is centered so the intercept drops out
of the coordinate updates and is recovered afterwards from the means.
"""

import warnings
from dataclasses import dataclass

import numpy as np

from ..errors import DidNotConverge, NonFiniteInput
from ._backend import kernels


@dataclass(frozen=True, eq=False)
class LinearModel:
    weights: np.ndarray
    intercept: float
    alpha: float
    l1_ratio: float
    converged: bool = True
    n_sweeps: int = 0
    train_hash: str = ""

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=np.float64)
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    @property
    def n_features(self):
        return self.weights.shape[0]


def fit_elasticnet(X, y, alpha, l1_ratio, tol=1e-8, max_iter=10_000) -> LinearModel:
    """Fit by cyclic coordinate descent with soft-thresholding.

    Convergence is declared when the largest coefficient change in a full
    sweep drops below ``tol``; hitting ``max_iter`` sweeps instead raises a
    :class:`DidNotConverge` warning and returns the model flagged.
    """
    X = np.ascontiguousarray(X, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.float64)
    if X.ndim != 2 or y.ndim != 1 or X.shape[0] != y.shape[0]:
        raise ValueError(f"bad shapes: X {X.shape}, y {y.shape}")
    if X.shape[0] < 1:
        raise ValueError("need at least one sample")
    if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
        raise NonFiniteInput("X or y contains NaN or inf")
    if alpha < 0:
        raise ValueError("alpha must be >= 0")
    if not (0.0 <= l1_ratio <= 1.0):
        raise ValueError("l1_ratio must lie in [0, 1]")

    # fresh writable copies: the kernel takes writable views
    x_mean = X.mean(axis=0)
    y_mean = float(y.mean())
    Xc = np.ascontiguousarray(X - x_mean)
    yc = np.ascontiguousarray(y - y_mean)

    w = np.zeros(X.shape[1])
    sweeps, _, converged = kernels.enet_coordinate_descent(
        Xc, yc, alpha * l1_ratio, alpha * (1.0 - l1_ratio), w, int(max_iter), float(tol)
    )
    if not converged:
        warnings.warn(
            f"coordinate descent did not converge in {max_iter} sweeps",
            DidNotConverge,
            stacklevel=2,
        )
    intercept = y_mean - float(x_mean @ w)
    return LinearModel(
        weights=w,
        intercept=intercept,
        alpha=float(alpha),
        l1_ratio=float(l1_ratio),
        converged=bool(converged),
        n_sweeps=int(sweeps),
    )


def elasticnet_objective(X, y, weights, intercept, alpha, l1_ratio) -> float:
    """The penalized objective at the given coefficients."""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    w = np.asarray(weights, dtype=np.float64)
    resid = y - X @ w - intercept
    n = y.shape[0]
    return float(
        (resid @ resid) / (2.0 * n)
        + alpha * (l1_ratio * np.abs(w).sum() + 0.5 * (1.0 - l1_ratio) * (w @ w))
    )


def elasticnet_kkt_residuals(X, y, model: LinearModel):
    """Stationarity residuals of the fitted model on its training data.

    Returns (residual_active, slack_inactive): the largest violation of the
    subgradient condition over nonzero weights, and the largest excess of
    |smooth gradient| over alpha*l1_ratio at zero weights (0 when none).
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    n = y.shape[0]
    grad = -(X.T @ (y - X @ model.weights - model.intercept)) / n
    l1 = model.alpha * model.l1_ratio
    l2 = model.alpha * (1.0 - model.l1_ratio)
    active = model.weights != 0
    res_active = 0.0
    if active.any():
        stat = grad[active] + l2 * model.weights[active] + l1 * np.sign(model.weights[active])
        res_active = float(np.max(np.abs(stat)))
    slack = 0.0
    if (~active).any():
        slack = float(np.max(np.abs(grad[~active])) - l1)
    return res_active, max(slack, 0.0)
