"""Composition of two-domain training sets.

A mix is governed by a (k, p) pair: fraction k of dataset A and fraction p
of dataset B, with at least one of the two pinned to 1 so that one dataset
is always fully included.  Sub-sampling is stratified along each dataset's
own cluster structure, and every sample keeps its original features and
labels bit-exactly.  The randomized-label baseline replaces a dataset's
labels with i.i.d. uniform noise on [-1, 1].
"""

import hashlib
import json
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ._seeding import derive_seed, rng_for
from .dataset import LabeledDataset
from .errors import FeatureDimensionMismatch
from .stratification import ClusterAssignment, stratified_indices


@dataclass(frozen=True)
class MixSpec:
    """Contribution fractions (k for dataset A, p for dataset B)."""

    k: float
    p: float

    def __post_init__(self):
        for name, v in (("k", self.k), ("p", self.p)):
            if not (0.0 <= v <= 1.0):
                raise ValueError(f"{name} must lie in [0, 1], got {v}")
        if max(self.k, self.p) != 1.0:
            raise ValueError(f"one of k, p must equal 1, got (k={self.k}, p={self.p})")

    def label(self) -> str:
        return f"k={self.k:g},p={self.p:g}"


@dataclass(frozen=True)
class MixedDataset:
    """Concatenated sub-samples of two domains with per-sample provenance.

    ``strat_class`` is a dense id combining (source domain, source cluster),
    usable for stratified splits of the mixed set itself.
    """

    ids: tuple
    features: np.ndarray
    valence: np.ndarray
    arousal: np.ndarray
    provenance: tuple
    strat_class: np.ndarray
    spec: MixSpec
    seed: int

    def __post_init__(self):
        for name in ("features", "valence", "arousal"):
            a = np.asarray(getattr(self, name), dtype=np.float64)
            a.setflags(write=False)
            object.__setattr__(self, name, a)
        sc = np.asarray(self.strat_class, dtype=np.intp)
        sc.setflags(write=False)
        object.__setattr__(self, "strat_class", sc)
        object.__setattr__(self, "ids", tuple(self.ids))
        object.__setattr__(self, "provenance", tuple(self.provenance))

    def __len__(self):
        return len(self.ids)

    def target(self, name: str) -> np.ndarray:
        if name == "valence":
            return self.valence
        if name == "arousal":
            return self.arousal
        raise KeyError(f"unknown target {name!r}")

    def domain_mask(self, domain: str) -> np.ndarray:
        return np.array([p == domain for p in self.provenance], dtype=bool)

    def manifest(self) -> dict:
        """JSON-ready experiment record of what went into this mix."""
        counts: dict = {}
        for p in self.provenance:
            counts[p] = counts.get(p, 0) + 1
        return {
            "spec": {"k": self.spec.k, "p": self.spec.p},
            "seed": self.seed,
            "total": len(self),
            "per_domain_counts": counts,
            "sample_ids": [list(pair) for pair in zip(self.provenance, self.ids)],
            "feature_checksum": hashlib.sha256(self.features.tobytes()).hexdigest(),
        }

    def manifest_json(self) -> str:
        return json.dumps(self.manifest(), indent=2, sort_keys=True)


def mix_datasets(
    a: LabeledDataset,
    a_assign: ClusterAssignment,
    b: LabeledDataset,
    b_assign: ClusterAssignment,
    spec: MixSpec,
    seed: int,
) -> MixedDataset:
    """Merge stratified sub-samples of A (fraction k) and B (fraction p).

    Sub-sample draws use seeds derived from (seed, domain), so the two
    domains are independent and the result does not depend on evaluation
    order.  Stratification classes of the mixed set are (domain, cluster)
    pairs relabeled densely, with A's clusters first.
    """
    if a.n_features != b.n_features:
        raise FeatureDimensionMismatch(
            f"feature column counts differ: {a.n_features} vs {b.n_features}"
        )
    idx_a = stratified_indices(a_assign.cluster_of, spec.k, derive_seed(seed, a.domain))
    idx_b = stratified_indices(b_assign.cluster_of, spec.p, derive_seed(seed, b.domain))

    features = np.vstack([a.features[idx_a], b.features[idx_b]])
    valence = np.concatenate([a.valence[idx_a], b.valence[idx_b]])
    arousal = np.concatenate([a.arousal[idx_a], b.arousal[idx_b]])
    ids = tuple(a.ids[i] for i in idx_a) + tuple(b.ids[i] for i in idx_b)
    provenance = (a.domain,) * len(idx_a) + (b.domain,) * len(idx_b)
    # dense (domain, cluster) classes: A keeps its ids, B's are offset
    offset = a_assign.n_clusters
    strat = np.concatenate(
        [a_assign.cluster_of[idx_a], b_assign.cluster_of[idx_b] + offset]
    ).astype(np.intp)

    return MixedDataset(
        ids=ids,
        features=features,
        valence=valence,
        arousal=arousal,
        provenance=provenance,
        strat_class=strat,
        spec=spec,
        seed=seed,
    )


def randomize_labels(ds: LabeledDataset, seed: int) -> LabeledDataset:
    """Replace both targets with i.i.d. uniform draws on [-1, 1].

    Features and ids are untouched; the same seed always yields the same
    labels.
    """
    rng = rng_for(seed, "labels")
    n = len(ds)
    valence = rng.uniform(-1.0, 1.0, size=n)
    arousal = rng.uniform(-1.0, 1.0, size=n)
    return ds.with_labels(valence, arousal)
