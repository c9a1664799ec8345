import warnings
from fractions import Fraction

import numpy as np
import pytest

import oracles
from emomix.errors import EmptyInput, FoldCountExceedsClusterSize, NonFiniteLabel
from emomix.stratification import (
    ClusterAssignment,
    export_assignment_csv,
    export_fold_csv,
    import_assignment_csv,
    import_fold_csv,
    stratified_indices,
    stratified_kfold,
    stratified_subsample,
    subsample_quotas,
    ward_cluster,
    ward_linkage,
    _round_half_up,
)

from conftest import build_dataset


def partition_of(assign):
    return {
        frozenset(np.flatnonzero(assign.cluster_of == c).tolist())
        for c in range(assign.n_clusters)
    }


# --- Ward linkage ---

def test_linkage_costs_on_a_line():
    # points 0, 1, 3: first merge {0,1} costs 0.5, then joining 3 costs 25/6
    merges = ward_linkage(np.array([[0.0], [1.0], [3.0]]))
    assert merges[0].members_a == (0,) and merges[0].members_b == (1,)
    assert merges[0].cost == pytest.approx(0.5, abs=1e-12)
    assert merges[1].cost == pytest.approx(25.0 / 6.0, abs=1e-12)


def test_linkage_matches_exhaustive_recomputation():
    rng = np.random.default_rng(11)
    for _ in range(6):
        labels = rng.uniform(-1, 1, size=(int(rng.integers(6, 18)), 2))
        got = ward_linkage(labels)
        want = oracles.ward_merge_sequence(labels)
        assert len(got) == len(want)
        for g, w in zip(got, want):
            assert {frozenset(g.members_a), frozenset(g.members_b)} == {
                frozenset(w[1]),
                frozenset(w[2]),
            }
            assert g.cost == pytest.approx(w[0], rel=1e-9, abs=1e-12)


def test_linkage_rejects_bad_input():
    with pytest.raises(EmptyInput):
        ward_linkage(np.empty((0, 2)))
    with pytest.raises(NonFiniteLabel):
        ward_linkage(np.array([[0.0], [np.nan]]))


# --- Ward partitioning ---

def test_cluster_minimum_size_holds():
    rng = np.random.default_rng(3)
    for _ in range(5):
        labels = rng.uniform(-1, 1, size=(40, 2))
        assign = ward_cluster(labels, 7)
        assert min(assign.cluster_sizes) >= 7
        assert sum(assign.cluster_sizes) == 40


def test_cluster_matches_oracle_partition():
    rng = np.random.default_rng(21)
    for _ in range(5):
        n = int(rng.integers(10, 30))
        labels = rng.uniform(-1, 1, size=(n, 2))
        mcs = int(rng.integers(2, 6))
        assert partition_of(ward_cluster(labels, mcs)) == oracles.ward_partition(labels, mcs)


def test_cluster_stops_at_first_valid_partition():
    # one more merge than necessary would over-merge; sizes (2, 2) expected
    labels = np.array([[0.0, 0.0], [0.1, 0.0], [5.0, 5.0], [5.1, 5.0]])
    assign = ward_cluster(labels, 2)
    assert sorted(assign.cluster_sizes) == [2, 2]


def test_cluster_unsatisfiable_collapses_to_one():
    labels = np.random.default_rng(0).normal(size=(5, 2))
    assign = ward_cluster(labels, 10)
    assert assign.n_clusters == 1
    assert assign.cluster_sizes == (5,)


def test_cluster_already_satisfied_keeps_singletons():
    labels = np.array([[0.0, 0.0], [1.0, 1.0], [2.0, 2.0]])
    assign = ward_cluster(labels, 1)
    assert assign.n_clusters == 3


def test_cluster_deterministic():
    labels = np.random.default_rng(9).uniform(-1, 1, size=(30, 2))
    a = ward_cluster(labels, 5)
    b = ward_cluster(labels, 5)
    assert np.array_equal(a.cluster_of, b.cluster_of)


def test_assignment_validates_consistency():
    with pytest.raises(ValueError):
        ClusterAssignment("d", np.array([0, 2]), (1, 1))
    with pytest.raises(ValueError):
        ClusterAssignment("d", np.array([0, 0]), (1, 1))


# --- stratified folds ---

def test_folds_balanced_within_every_cluster():
    rng = np.random.default_rng(5)
    for trial in range(10):
        labels = rng.uniform(-1, 1, size=(int(rng.integers(40, 90)), 2))
        assign = ward_cluster(labels, 10)
        plan = stratified_kfold(assign, 5, seed=trial)
        # partition: every sample in exactly one fold
        assert plan.fold_of.size == len(assign)
        for cid in range(assign.n_clusters):
            counts = np.bincount(plan.fold_of[assign.members(cid)], minlength=5)
            assert counts.max() - counts.min() <= 1
        covered = np.concatenate([plan.test_indices(f) for f in range(5)])
        assert np.array_equal(np.sort(covered), np.arange(len(assign)))


def test_folds_test_train_disjoint_and_complementary():
    labels = np.random.default_rng(1).uniform(-1, 1, size=(50, 2))
    assign = ward_cluster(labels, 8)
    plan = stratified_kfold(assign, 4, seed=0)
    for f in range(4):
        te, tr = set(plan.test_indices(f)), set(plan.train_indices(f))
        assert not te & tr
        assert te | tr == set(range(50))


def test_folds_deterministic_and_seed_sensitive():
    labels = np.random.default_rng(2).uniform(-1, 1, size=(60, 2))
    assign = ward_cluster(labels, 10)
    a = stratified_kfold(assign, 5, seed=4)
    b = stratified_kfold(assign, 5, seed=4)
    c = stratified_kfold(assign, 5, seed=5)
    assert np.array_equal(a.fold_of, b.fold_of)
    assert not np.array_equal(a.fold_of, c.fold_of)


def test_small_cluster_warns():
    assign = ClusterAssignment("d", np.array([0, 0, 0, 1, 1]), (3, 2))
    with pytest.warns(FoldCountExceedsClusterSize):
        stratified_kfold(assign, 3, seed=0)


def test_fold_count_validation():
    assign = ClusterAssignment("d", np.array([0, 0]), (2,))
    with pytest.raises(ValueError):
        stratified_kfold(assign, 1, seed=0)


# --- sub-sample quotas ---

def test_round_half_up_behaviour():
    assert _round_half_up(0.5) == 1
    assert _round_half_up(1.5) == 2
    assert _round_half_up(2.5) == 3
    assert _round_half_up(2.4) == 2
    assert _round_half_up(-0.5) == 0


def test_quota_hand_cases():
    assert subsample_quotas((10, 10), 0.5) == [5, 5]
    # total 3 of 6; equal remainders resolved toward the lower cluster id
    assert subsample_quotas((3, 3), 0.5) == [2, 1]
    # total 4 of 6; remainders 4, 2, 0 give the extra seat to cluster 0
    assert subsample_quotas((1, 2, 3), 2.0 / 3.0) == [1, 1, 2]
    assert subsample_quotas((5,), 0.1) == [1]
    assert subsample_quotas((4, 9), 0.0) == [0, 0]
    assert subsample_quotas((4, 9), 1.0) == [4, 9]
    assert subsample_quotas((), 0.5) == []


def test_quota_totals_and_proportionality():
    rng = np.random.default_rng(17)
    for _ in range(50):
        sizes = tuple(int(s) for s in rng.integers(1, 40, size=rng.integers(1, 6)))
        frac = float(rng.uniform(0, 1))
        quotas = subsample_quotas(sizes, frac)
        n = sum(sizes)
        m = int(np.floor(frac * n + 0.5))
        assert sum(quotas) == m
        for q, s in zip(quotas, sizes):
            assert 0 <= q <= s
            # largest-remainder stays within one seat of the exact share
            exact = Fraction(m) * s / n
            assert abs(q - exact) < 1


def test_quota_rejects_bad_fraction():
    with pytest.raises(ValueError):
        subsample_quotas((3, 3), 1.5)


def test_stratified_indices_sorted_unique_and_counted():
    classes = np.array([0] * 10 + [1] * 6 + [2] * 4)
    idx = stratified_indices(classes, 0.5, seed=8)
    assert np.array_equal(idx, np.unique(idx))
    quotas = subsample_quotas((10, 6, 4), 0.5)
    took = np.bincount(classes[idx], minlength=3)
    assert list(took) == quotas
    assert np.array_equal(idx, stratified_indices(classes, 0.5, seed=8))
    assert not np.array_equal(idx, stratified_indices(classes, 0.5, seed=9))


def test_stratified_subsample_keeps_rows_intact():
    ds = build_dataset(n=20, m=3)
    assign = ward_cluster(ds.labels(), 5, domain=ds.domain)
    sub = stratified_subsample(ds, assign, 0.5, seed=1)
    assert len(sub) == 10
    for i, sid in enumerate(sub.ids):
        src = ds.ids.index(sid)
        assert np.array_equal(sub.features[i], ds.features[src])
        assert sub.valence[i] == ds.valence[src]


# --- split persistence ---

def test_assignment_csv_round_trip(tmp_path):
    ds = build_dataset(n=25)
    assign = ward_cluster(ds.labels(), 6, domain=ds.domain)
    path = tmp_path / "clusters.csv"
    export_assignment_csv(path, ds.ids, assign)
    back = import_assignment_csv(path, ds.ids, domain=ds.domain)
    assert np.array_equal(back.cluster_of, assign.cluster_of)
    assert back.cluster_sizes == assign.cluster_sizes
    with pytest.raises(ValueError):
        import_assignment_csv(path, ds.ids[:-1], domain=ds.domain)


def test_fold_csv_round_trip(tmp_path):
    ds = build_dataset(n=25)
    assign = ward_cluster(ds.labels(), 6, domain=ds.domain)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", FoldCountExceedsClusterSize)
        plan = stratified_kfold(assign, 5, seed=3)
    path = tmp_path / "folds.csv"
    export_fold_csv(path, ds.ids, plan)
    back = import_fold_csv(path, ds.ids, seed=3)
    assert back.n_folds == 5
    assert np.array_equal(back.fold_of, plan.fold_of)
