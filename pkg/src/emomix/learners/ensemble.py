"""Weighted ensemble of fitted regressors."""

from dataclasses import dataclass

import numpy as np

from ..errors import LengthMismatch


@dataclass(frozen=True)
class EnsembleModel:
    """Convex combination of member models.

    Weights are nonnegative and sum to 1; prediction is the weighted mean
    of member predictions.
    """

    members: tuple
    weights: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=np.float64)
        if len(self.members) == 0:
            raise ValueError("ensemble needs at least one member")
        if w.shape != (len(self.members),):
            raise LengthMismatch(
                f"{len(self.members)} members but {w.shape} weights"
            )
        if np.any(w < 0) or not np.isclose(w.sum(), 1.0):
            raise ValueError("weights must be nonnegative and sum to 1")
        w.setflags(write=False)
        object.__setattr__(self, "members", tuple(self.members))
        object.__setattr__(self, "weights", w)

    @property
    def n_members(self):
        return len(self.members)


def ensemble_from_counts(members, counts) -> EnsembleModel:
    """Build an ensemble whose weights are normalized selection counts."""
    counts = np.asarray(counts, dtype=np.float64)
    keep = counts > 0
    kept = [m for m, k in zip(members, keep) if k]
    return EnsembleModel(members=tuple(kept), weights=counts[keep] / counts.sum())
