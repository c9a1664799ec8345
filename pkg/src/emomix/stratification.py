"""Stratification machinery for continuous 2-D emotion labels.

The (valence, arousal) pairs are clustered bottom-up with Ward's minimum
variance criterion; the resulting cluster id doubles as a stratification
class for building balanced cross-validation folds and proportional
sub-samples.  Merging stops at the first partition in which every cluster
holds at least ``min_cluster_size`` samples.
"""

import csv
import math
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import List, Sequence, Tuple

import numpy as np

from ._seeding import rng_for
from .dataset import LabeledDataset
from .errors import (
    EmptyInput,
    FoldCountExceedsClusterSize,
    NonFiniteLabel,
)


@dataclass(frozen=True)
class ClusterAssignment:
    """Per-sample cluster ids (dense, 0..C-1) for one dataset."""

    dataset_domain: str
    cluster_of: np.ndarray
    cluster_sizes: tuple

    def __post_init__(self):
        cl = np.asarray(self.cluster_of, dtype=np.intp)
        cl.setflags(write=False)
        object.__setattr__(self, "cluster_of", cl)
        object.__setattr__(self, "cluster_sizes", tuple(int(s) for s in self.cluster_sizes))
        c = len(self.cluster_sizes)
        if cl.size and (cl.min() < 0 or cl.max() > c - 1):
            raise ValueError("cluster ids must be dense 0..C-1")
        counts = np.bincount(cl, minlength=c)
        if tuple(int(x) for x in counts) != self.cluster_sizes:
            raise ValueError("cluster_sizes inconsistent with cluster_of")

    @property
    def n_clusters(self):
        return len(self.cluster_sizes)

    def __len__(self):
        return int(self.cluster_of.size)

    def members(self, cluster_id: int) -> np.ndarray:
        return np.flatnonzero(self.cluster_of == cluster_id)


@dataclass(frozen=True)
class FoldPlan:
    """Per-sample fold ids forming a stratified partition."""

    n_folds: int
    fold_of: np.ndarray
    seed: int

    def __post_init__(self):
        f = np.asarray(self.fold_of, dtype=np.intp)
        f.setflags(write=False)
        object.__setattr__(self, "fold_of", f)
        if f.size and (f.min() < 0 or f.max() >= self.n_folds):
            raise ValueError("fold ids must lie in 0..n_folds-1")

    def test_indices(self, fold: int) -> np.ndarray:
        return np.flatnonzero(self.fold_of == fold)

    def train_indices(self, fold: int) -> np.ndarray:
        return np.flatnonzero(self.fold_of != fold)


@dataclass(frozen=True)
class WardMerge:
    """One executed merge: its exact cost and the two member groups joined."""

    cost: float
    members_a: tuple
    members_b: tuple


def ward_linkage(labels: np.ndarray) -> List[WardMerge]:
    """Full agglomerative Ward merge sequence down to a single cluster.

    Merge costs are the exact increase in within-cluster sum of squares,
    maintained by the Lance-Williams recurrence on squared-Euclidean merge
    costs.  Ties are broken by the lowest (slot, slot) pair, where a merged
    cluster occupies the lower slot of its two parents.
    """
    x = np.asarray(labels, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] == 0:
        raise EmptyInput("labels must be a non-empty n-by-d matrix")
    if not np.all(np.isfinite(x)):
        raise NonFiniteLabel("labels contain NaN or inf")
    n = x.shape[0]

    # cost[i, j] (i < j) holds the Ward cost of merging slots i and j;
    # cost of merging singletons i, j is ||x_i - x_j||^2 / 2.
    sq = np.sum((x[:, None, :] - x[None, :, :]) ** 2, axis=2) / 2.0
    cost = np.full((n, n), np.inf)
    iu = np.triu_indices(n, k=1)
    cost[iu] = sq[iu]

    sizes = np.ones(n, dtype=np.int64)
    members = [[i] for i in range(n)]
    active = np.ones(n, dtype=bool)
    merges: List[WardMerge] = []

    for _ in range(n - 1):
        # row-major argmin over the upper triangle = lexicographic tie-break
        flat = int(np.argmin(cost))
        i, j = divmod(flat, n)
        c_ij = cost[i, j]

        merges.append(WardMerge(float(c_ij), tuple(members[i]), tuple(members[j])))

        ks = np.flatnonzero(active)
        ks = ks[(ks != i) & (ks != j)]
        if ks.size:
            c_ik = cost[np.minimum(i, ks), np.maximum(i, ks)]
            c_jk = cost[np.minimum(j, ks), np.maximum(j, ks)]
            nk = sizes[ks]
            new = ((sizes[i] + nk) * c_ik + (sizes[j] + nk) * c_jk - nk * c_ij) / (
                sizes[i] + sizes[j] + nk
            )
            cost[np.minimum(i, ks), np.maximum(i, ks)] = new

        members[i] = members[i] + members[j]
        members[j] = []
        sizes[i] += sizes[j]
        active[j] = False
        cost[j, :] = np.inf
        cost[:, j] = np.inf

    return merges


def _partition_to_assignment(domain: str, n: int, groups: Sequence[Sequence[int]]) -> ClusterAssignment:
    # dense ids ordered by each group's smallest member index
    ordered = sorted((tuple(sorted(g)) for g in groups), key=lambda g: g[0])
    cluster_of = np.empty(n, dtype=np.intp)
    for cid, g in enumerate(ordered):
        for idx in g:
            cluster_of[idx] = cid
    return ClusterAssignment(
        dataset_domain=domain,
        cluster_of=cluster_of,
        cluster_sizes=tuple(len(g) for g in ordered),
    )


def ward_cluster(labels: np.ndarray, min_cluster_size: int, domain: str = "") -> ClusterAssignment:
    """Cluster label pairs with Ward's method until every cluster is large enough.

    Starting from singletons, the globally cheapest merge is executed while
    any cluster has fewer than ``min_cluster_size`` members; the returned
    partition is the first state where all clusters meet the minimum.  When
    the rule is unsatisfiable (n < min_cluster_size) everything is merged
    into one cluster.
    """
    if min_cluster_size < 1:
        raise ValueError("min_cluster_size must be >= 1")
    x = np.asarray(labels, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] == 0:
        raise EmptyInput("labels must be a non-empty n-by-d matrix")
    if not np.all(np.isfinite(x)):
        raise NonFiniteLabel("labels contain NaN or inf")
    n = x.shape[0]

    groups = [[i] for i in range(n)]
    if min(len(g) for g in groups) >= min_cluster_size:
        return _partition_to_assignment(domain, n, groups)

    for merge in ward_linkage(x):
        sa, sb = set(merge.members_a), set(merge.members_b)
        groups = [g for g in groups if set(g) not in (sa, sb)]
        groups.append(sorted(merge.members_a + merge.members_b))
        if min(len(g) for g in groups) >= min_cluster_size:
            break

    return _partition_to_assignment(domain, n, groups)


def assign_classes(assignment: ClusterAssignment) -> np.ndarray:
    """Stratification class per sample: the identity map over cluster ids."""
    return np.asarray(assignment.cluster_of, dtype=np.intp).copy()


def stratified_kfold(assignment: ClusterAssignment, n_folds: int, seed: int) -> FoldPlan:
    """Deal each cluster's samples round-robin into ``n_folds`` folds.

    Within a cluster, samples are shuffled by a generator seeded from
    (seed, cluster id) and assigned fold ``position mod n_folds``, so per
    cluster the fold counts differ by at most one.  A cluster smaller than
    ``n_folds`` triggers a :class:`FoldCountExceedsClusterSize` warning.
    """
    if n_folds < 2:
        raise ValueError("n_folds must be >= 2")
    fold_of = np.empty(len(assignment), dtype=np.intp)
    for cid, size in enumerate(assignment.cluster_sizes):
        if size < n_folds:
            warnings.warn(
                f"cluster {cid} has {size} samples for {n_folds} folds; "
                "some folds will miss this class",
                FoldCountExceedsClusterSize,
                stacklevel=2,
            )
        idx = assignment.members(cid)
        shuffled = rng_for(seed, cid).permutation(idx)
        for pos, sample in enumerate(shuffled):
            fold_of[sample] = pos % n_folds
    return FoldPlan(n_folds=n_folds, fold_of=fold_of, seed=seed)


def _round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def subsample_quotas(cluster_sizes: Sequence[int], fraction: float) -> List[int]:
    """Per-cluster quotas for a stratified sub-sample of the given fraction.

    The total is round-half-up of fraction * n; per-cluster quotas follow
    largest-remainder apportionment (exact integer arithmetic), remainder
    ties broken by lower cluster id.
    """
    if not (0.0 <= fraction <= 1.0):
        raise ValueError("fraction must lie in [0, 1]")
    sizes = [int(s) for s in cluster_sizes]
    n = sum(sizes)
    if n == 0:
        return []
    m = _round_half_up(fraction * n)
    base = [(m * s) // n for s in sizes]
    rema = [(m * s) % n for s in sizes]
    short = m - sum(base)
    order = sorted(range(len(sizes)), key=lambda c: (-rema[c], c))
    quotas = list(base)
    for c in order[:short]:
        quotas[c] += 1
    return quotas


def stratified_indices(classes: np.ndarray, fraction: float, seed: int) -> np.ndarray:
    """Indices of a stratified sub-sample, drawn per class without replacement.

    ``classes`` are dense stratification class ids.  Each class is sampled
    with a generator seeded from (seed, class id); the selected indices are
    returned in ascending order.
    """
    classes = np.asarray(classes, dtype=np.intp)
    if classes.size == 0:
        return np.empty(0, dtype=np.intp)
    n_classes = int(classes.max()) + 1
    sizes = np.bincount(classes, minlength=n_classes)
    quotas = subsample_quotas(sizes, fraction)
    chosen: List[np.ndarray] = []
    for cid in range(n_classes):
        members = np.flatnonzero(classes == cid)
        take = quotas[cid]
        if take == 0:
            continue
        perm = rng_for(seed, cid).permutation(members)
        chosen.append(perm[:take])
    if not chosen:
        return np.empty(0, dtype=np.intp)
    return np.sort(np.concatenate(chosen))


def stratified_subsample(
    ds: LabeledDataset, assignment: ClusterAssignment, fraction: float, seed: int
) -> LabeledDataset:
    """Proportionally sub-sample a dataset along its cluster structure."""
    if len(assignment) != len(ds):
        raise ValueError("assignment does not cover the dataset")
    idx = stratified_indices(assignment.cluster_of, fraction, seed)
    return ds.subset(idx)


# --- split persistence (id,cluster / id,fold delimited text) ---

def export_assignment_csv(path, ids: Sequence[str], assignment: ClusterAssignment) -> None:
    _export_pairs(path, "cluster", ids, assignment.cluster_of)


def export_fold_csv(path, ids: Sequence[str], plan: FoldPlan) -> None:
    _export_pairs(path, "fold", ids, plan.fold_of)


def _export_pairs(path, colname, ids, values):
    if len(ids) != len(values):
        raise ValueError("ids and values must align")
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["id", colname])
        for i, v in zip(ids, values):
            w.writerow([i, int(v)])


def _import_pairs(path, colname, ids):
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0] != ["id", colname]:
        raise ValueError(f"{path}: expected header id,{colname}")
    mapping = {r[0]: int(r[1]) for r in rows[1:]}
    if set(mapping) != set(ids):
        raise ValueError(f"{path}: ids do not match the dataset")
    return np.array([mapping[i] for i in ids], dtype=np.intp)


def import_assignment_csv(path, ids: Sequence[str], domain: str = "") -> ClusterAssignment:
    cluster_of = _import_pairs(path, "cluster", ids)
    sizes = np.bincount(cluster_of)
    return ClusterAssignment(dataset_domain=domain, cluster_of=cluster_of, cluster_sizes=tuple(sizes))


def import_fold_csv(path, ids: Sequence[str], seed: int = -1) -> FoldPlan:
    fold_of = _import_pairs(path, "fold", ids)
    return FoldPlan(n_folds=int(fold_of.max()) + 1, fold_of=fold_of, seed=seed)
