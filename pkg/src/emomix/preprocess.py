"""Feature standardization and variance-thresholded PCA.

Acoustic descriptors span wildly different units, so columns are centered
and scaled before PCA; the number of retained components is the smallest m
whose cumulative explained variance ratio reaches a configurable threshold.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ThresholdOutOfRange, TooFewRows

STD_FLOOR = 1e-12


@dataclass(frozen=True)
class Standardizer:
    mean: np.ndarray
    stddev: np.ndarray

    def __post_init__(self):
        for name in ("mean", "stddev"):
            a = np.asarray(getattr(self, name), dtype=np.float64)
            a.setflags(write=False)
            object.__setattr__(self, name, a)


def fit_standardizer(X: np.ndarray) -> Standardizer:
    """Column means and (floored) population standard deviations."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] < 2:
        raise TooFewRows("standardization needs at least 2 rows")
    mean = X.mean(axis=0)
    std = X.std(axis=0)
    std = np.maximum(std, STD_FLOOR)
    return Standardizer(mean=mean, stddev=std)


def apply_standardizer(s: Standardizer, X: np.ndarray) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    return (X - s.mean) / s.stddev


@dataclass(frozen=True)
class PCAModel:
    """Principal axes of a centered matrix with a retention threshold.

    ``components`` holds all computed axes (rows, orthonormal); the first
    ``m`` of them satisfy the cumulative explained-variance threshold and
    are the ones used by :func:`apply_pca`.
    """

    mean: np.ndarray
    components: np.ndarray
    explained_variance_ratio: np.ndarray
    m: int
    threshold: float

    def __post_init__(self):
        for name in ("mean", "components", "explained_variance_ratio"):
            a = np.asarray(getattr(self, name), dtype=np.float64)
            a.setflags(write=False)
            object.__setattr__(self, name, a)

    @property
    def n_components(self):
        return self.m

    def save(self, path) -> None:
        np.savez(
            path,
            mean=self.mean,
            components=self.components,
            explained_variance_ratio=self.explained_variance_ratio,
            m=self.m,
            threshold=self.threshold,
        )

    @classmethod
    def load(cls, path) -> "PCAModel":
        with np.load(path) as z:
            return cls(
                mean=z["mean"],
                components=z["components"],
                explained_variance_ratio=z["explained_variance_ratio"],
                m=int(z["m"]),
                threshold=float(z["threshold"]),
            )


def fit_pca(X: np.ndarray, threshold: float) -> PCAModel:
    """Principal axes via SVD of the centered matrix.

    Keeps the smallest m components whose cumulative explained variance
    ratio reaches ``threshold``.  Ratios are taken over the leading
    min(n-1, F) axes (a centered n-row matrix has rank at most n-1) and sum
    to 1.  Component signs are fixed by making each axis' largest-magnitude
    entry non-negative.
    """
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] < 2:
        raise TooFewRows("PCA needs at least 2 rows")
    if not (0.0 < threshold <= 1.0):
        raise ThresholdOutOfRange(f"threshold must lie in (0, 1], got {threshold}")

    mean = X.mean(axis=0)
    Xc = X - mean
    n, f = Xc.shape
    _, s, vt = np.linalg.svd(Xc, full_matrices=False)

    n_keep = min(n - 1, f)
    s = s[:n_keep]
    vt = vt[:n_keep]

    # deterministic sign: largest-|entry| of each axis made non-negative
    pivot = np.argmax(np.abs(vt), axis=1)
    signs = np.sign(vt[np.arange(n_keep), pivot])
    signs[signs == 0] = 1.0
    vt = vt * signs[:, None]

    var = s**2
    total = var.sum()
    if total <= 0.0:
        # all-constant input: a single degenerate axis explaining "all" variance
        ratio = np.zeros(n_keep)
        if n_keep:
            ratio[0] = 1.0
        m = 1 if n_keep else 0
        return PCAModel(mean=mean, components=vt, explained_variance_ratio=ratio, m=m, threshold=threshold)
    ratio = var / total

    cumulative = np.cumsum(ratio)
    m = int(np.searchsorted(cumulative, threshold - 1e-12) + 1)
    m = min(m, n_keep)

    return PCAModel(
        mean=mean,
        components=vt,
        explained_variance_ratio=ratio,
        m=m,
        threshold=threshold,
    )


def apply_pca(model: PCAModel, X: np.ndarray) -> np.ndarray:
    """Scores on the retained axes: (X - mean) projected onto the first m components."""
    X = np.asarray(X, dtype=np.float64)
    return (X - model.mean) @ model.components[: model.m].T
