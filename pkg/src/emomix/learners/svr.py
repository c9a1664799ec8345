"""Epsilon-insensitive support vector regression.

Solves the dual

    min_{a, a*}  1/2 (a-a*)^T K (a-a*) + epsilon * sum(a+a*) - y^T (a-a*)
    s.t.         0 <= a_i, a*_i <= C,   sum(a-a*) = 0

with a maximal-violating-pair working-set method, then recovers the
intercept from the free support vectors.
"""

import warnings
from dataclasses import dataclass

import numpy as np

from ..errors import NonFiniteInput, SolverStalled, TooFewRows
from ._backend import kernels


@dataclass(frozen=True)
class KernelSpec:
    """Kernel function choice: ``rbf`` with a gamma, or ``linear``."""

    kind: str
    gamma: float = 0.0

    def __post_init__(self):
        if self.kind not in ("rbf", "linear"):
            raise ValueError(f"unknown kernel kind {self.kind!r}")
        if self.kind == "rbf" and not self.gamma > 0:
            raise ValueError("rbf kernel needs gamma > 0")

    def gram(self, X) -> np.ndarray:
        return self.cross(X, X)

    def cross(self, A, B) -> np.ndarray:
        """Kernel matrix K[i, j] = k(A[i], B[j])."""
        A = np.asarray(A, dtype=np.float64)
        B = np.asarray(B, dtype=np.float64)
        if self.kind == "linear":
            return A @ B.T
        sq = (
            (A * A).sum(axis=1)[:, None]
            + (B * B).sum(axis=1)[None, :]
            - 2.0 * (A @ B.T)
        )
        np.maximum(sq, 0.0, out=sq)
        return np.exp(-self.gamma * sq)

    def as_dict(self):
        return {"kind": self.kind, "gamma": float(self.gamma)}


def solve_svr_dual(K, y, C, epsilon, tol, max_iter):
    """Run the dual solver on a precomputed Gram matrix.

    Returns ``(a, a_star, f, n_iter, converged)`` where ``f = K @ (a - a_star)``.
    """
    K = np.ascontiguousarray(K, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.float64)
    # the compiled kernel takes writable views; inputs may be frozen
    if not K.flags.writeable:
        K = K.copy()
    if not y.flags.writeable:
        y = y.copy()
    return kernels.svr_smo(K, y, float(C), float(epsilon), float(tol), int(max_iter))


def svr_dual_objective(K, y, a, a_star, epsilon) -> float:
    """Dual objective value (the minimized form) at the given multipliers."""
    beta = np.asarray(a, dtype=np.float64) - np.asarray(a_star, dtype=np.float64)
    return float(
        0.5 * beta @ (np.asarray(K) @ beta)
        + epsilon * (np.sum(a) + np.sum(a_star))
        - np.asarray(y) @ beta
    )


@dataclass(frozen=True)
class SVRModel:
    support_ids: np.ndarray
    support_vectors: np.ndarray
    dual_coefs: np.ndarray
    intercept: float
    kernel: KernelSpec
    C: float
    epsilon: float
    converged: bool = True
    n_iter: int = 0
    train_hash: str = ""

    def __post_init__(self):
        for name in ("support_ids", "support_vectors", "dual_coefs"):
            arr = np.asarray(getattr(self, name))
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def n_support(self):
        return self.support_vectors.shape[0]

    @property
    def n_features(self):
        return self.support_vectors.shape[1]


def _intercept_from_duals(y, f, a, a_star, C, epsilon) -> float:
    # Free support vectors pin b exactly; average them for stability.
    free_a = (a > 0) & (a < C)
    free_s = (a_star > 0) & (a_star < C)
    vals = np.concatenate([(y - f - epsilon)[free_a], (y - f + epsilon)[free_s]])
    if vals.size:
        return float(vals.mean())
    # All multipliers at bounds: b is only interval-constrained by KKT.
    at_zero = (a <= 0) & (a_star <= 0)
    lows = np.concatenate([(y - f + epsilon)[a_star >= C], (y - f - epsilon)[at_zero]])
    highs = np.concatenate([(y - f - epsilon)[a >= C], (y - f + epsilon)[at_zero]])
    lo = float(lows.max()) if lows.size else -np.inf
    hi = float(highs.min()) if highs.size else np.inf
    if not np.isfinite(lo):
        return hi
    if not np.isfinite(hi):
        return lo
    return 0.5 * (lo + hi)


def fit_svr(X, y, C, epsilon, kernel: KernelSpec, seed=0, tol=None, max_iter=None) -> SVRModel:
    """Fit epsilon-SVR; keeps only samples with nonzero dual coefficient.

    ``tol`` defaults to ``1e-3 * C`` (the working-set violation gap) and
    ``max_iter`` to ``max(10_000_000, 100 * n)`` pair updates.  The solver
    itself is deterministic; ``seed`` is accepted for interface stability.
    """
    X = np.ascontiguousarray(X, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.float64)
    if X.ndim != 2 or y.ndim != 1 or X.shape[0] != y.shape[0]:
        raise ValueError(f"bad shapes: X {X.shape}, y {y.shape}")
    if X.shape[0] < 2:
        raise TooFewRows("need at least two samples")
    if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
        raise NonFiniteInput("X or y contains NaN or inf")
    if not C > 0:
        raise ValueError("C must be > 0")
    if epsilon < 0:
        raise ValueError("epsilon must be >= 0")
    if tol is None:
        tol = 1e-3 * C
    if max_iter is None:
        max_iter = max(10_000_000, 100 * X.shape[0])

    K = kernel.gram(X)
    a, a_star, f, n_iter, converged = solve_svr_dual(K, y, C, epsilon, tol, max_iter)
    if not converged:
        warnings.warn(
            f"dual solver stalled after {n_iter} pair updates",
            SolverStalled,
            stacklevel=2,
        )
    intercept = _intercept_from_duals(y, f, a, a_star, C, epsilon)

    beta = a - a_star
    sv = np.flatnonzero(beta != 0.0)
    return SVRModel(
        support_ids=sv,
        support_vectors=X[sv].copy(),
        dual_coefs=beta[sv].copy(),
        intercept=intercept,
        kernel=kernel,
        C=float(C),
        epsilon=float(epsilon),
        converged=bool(converged),
        n_iter=int(n_iter),
    )


def svr_predict(model: SVRModel, X) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if model.n_support == 0:
        return np.full(X.shape[0], model.intercept)
    K = model.kernel.cross(X, model.support_vectors)
    return K @ model.dual_coefs + model.intercept
