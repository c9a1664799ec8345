"""Acceptance gate: one test per shipped guarantee, tolerances as documented.

Run with ``pytest -v tests/test_acceptance.py`` to get a single pass/fail
line per criterion.  The last test exercises licensed external data and is
skipped unless ``EMOMIX_REAL_DATA_CONFIG`` names an experiment config whose
role ``a`` is the general-sound corpus (music excluded) and role ``b`` the
music-chorus corpus.
"""

import json
import os

import numpy as np
import pytest

from emomix.cli import DEFAULTS, DEFAULT_PIPELINE, load_config
from emomix.cli import main as cli_main
from emomix.dataset import LabelScale, exclude_by_category, load_dataset
from emomix.evaluation import cross_validate, run_kp_sweep, run_randomized_baseline
from emomix.learners import (
    KernelSpec,
    elasticnet_kkt_residuals,
    fit_elasticnet,
    solve_svr_dual,
)
from emomix.mixing import MixSpec, mix_datasets
from emomix.pipeline import PipelineConfig
from emomix.preprocess import apply_pca, fit_pca
from emomix.stratification import _round_half_up, stratified_kfold, ward_cluster
from emomix.synthetic import export_csvs, make_domain_pair

from conftest import build_dataset
from oracles import (
    enet_enumerate,
    enet_objective,
    pca_eigen,
    svr_dual_objective,
    svr_enumerate,
    ward_partition,
)

SVR_PIPELINE = PipelineConfig.from_dict(DEFAULT_PIPELINE)


def test_criterion_01_elasticnet_matches_enumeration_oracle():
    """50 problems (n=30, m=5): objective within 1e-8 relative, KKT clean."""
    rng = np.random.default_rng(101)
    l1_ratios = (0.1, 0.5, 0.9)
    for t in range(50):
        X = rng.normal(size=(30, 5))
        y = X @ rng.normal(size=5) + 0.3 * rng.normal(size=30)
        alpha = float(10.0 ** rng.uniform(-3, 0))
        l1 = l1_ratios[t % 3]
        model = fit_elasticnet(X, y, alpha, l1, tol=1e-10, max_iter=100_000)
        w_o, b_o = enet_enumerate(X, y, alpha, l1)
        f_s = enet_objective(X, y, model.weights, model.intercept, alpha, l1)
        f_o = enet_objective(X, y, w_o, b_o, alpha, l1)
        assert abs(f_s - f_o) <= 1e-8 * max(abs(f_o), 1e-12), f"problem {t}"
        res_active, slack = elasticnet_kkt_residuals(X, y, model)
        assert res_active <= 1e-8 and slack <= 1e-12, f"problem {t}"


def test_criterion_02_svr_matches_exhaustive_qp_oracle():
    """20 tiny duals, linear and rbf: objective within 1e-4, feasible at 1e-8."""
    rng = np.random.default_rng(202)
    for t in range(20):
        n = int(rng.integers(4, 8))
        X = rng.normal(size=(n, 3))
        y = np.tanh(X @ rng.normal(size=3)) + 0.1 * rng.normal(size=n)
        kernel = (
            KernelSpec("rbf", gamma=float(10.0 ** rng.uniform(-1, 0.5)) / 3.0)
            if t % 2
            else KernelSpec("linear")
        )
        K = kernel.gram(X)
        C = float(10.0 ** rng.uniform(-0.5, 1.0))
        eps = float(10.0 ** rng.uniform(-2.0, -0.7))
        a, a_star, f, _, converged = solve_svr_dual(
            K, y, C, eps, tol=1e-8, max_iter=10_000_000
        )
        assert converged, f"problem {t}"
        beta = a - a_star
        assert abs(beta.sum()) <= 1e-8
        assert np.all(a >= -1e-8) and np.all(a <= C + 1e-8)
        assert np.all(a_star >= -1e-8) and np.all(a_star <= C + 1e-8)
        f_s = svr_dual_objective(K, y, beta, eps)
        f_o = svr_dual_objective(K, y, svr_enumerate(K, y, C, eps), eps)
        assert abs(f_s - f_o) <= 1e-4 * max(1.0, abs(f_o)), f"problem {t}"


def test_criterion_03_pca_properties_and_eigen_oracle():
    """Random 50x10: orthonormal axes, ordered ratios, exact reconstruction."""
    rng = np.random.default_rng(303)
    for t in range(10):
        X = rng.normal(size=(50, 10)) * rng.uniform(0.5, 2.0, size=10)
        pca = fit_pca(X, 1.0)
        comp = pca.components
        ratios = pca.explained_variance_ratio
        assert np.allclose(comp @ comp.T, np.eye(comp.shape[0]), atol=1e-8)
        assert np.all(np.diff(ratios) <= 1e-12) and np.all(ratios >= -1e-12)
        assert abs(ratios.sum() - 1.0) <= 1e-8
        X_hat = apply_pca(pca, X) @ comp + pca.mean
        assert np.allclose(X_hat, X, atol=1e-8), f"matrix {t}"
        oracle_ratios, axes = pca_eigen(X)
        assert np.allclose(ratios, oracle_ratios[: len(ratios)], atol=1e-8)
        for i in range(pca.m):
            assert abs(abs(comp[i] @ axes[i]) - 1.0) <= 1e-8, f"matrix {t} axis {i}"


def test_criterion_04_ward_matches_exhaustive_oracle():
    """25 random instances (n <= 50): identical partitions, member for member."""
    rng = np.random.default_rng(404)
    min_sizes = (1, 3, 5, 8)
    for t in range(25):
        n = int(rng.integers(5, 51))
        labels = rng.uniform(-1, 1, size=(n, 2))
        mcs = min_sizes[t % 4]
        assign = ward_cluster(labels, mcs, domain="t")
        got = {
            frozenset(np.flatnonzero(assign.cluster_of == c).tolist())
            for c in range(assign.n_clusters)
        }
        assert got == ward_partition(labels, mcs), f"instance {t} (n={n}, mcs={mcs})"


def test_criterion_05_fold_balance_and_no_leakage():
    """100 random label sets: per-cluster fold counts differ by <= 1, folds partition."""
    rng = np.random.default_rng(505)
    for t in range(100):
        n = int(rng.integers(16, 81))
        labels = rng.uniform(-1, 1, size=(n, 2))
        n_folds = int(rng.integers(2, 6))
        mcs = max(int(rng.integers(3, 9)), n_folds)
        assign = ward_cluster(labels, mcs, domain="t")
        plan = stratified_kfold(assign, n_folds, seed=1000 + t)
        for c in range(assign.n_clusters):
            counts = np.bincount(plan.fold_of[assign.cluster_of == c], minlength=n_folds)
            assert counts.max() - counts.min() <= 1, f"set {t} cluster {c}"
        everything = np.arange(n)
        for fold in range(n_folds):
            train = plan.train_indices(fold)
            test = plan.test_indices(fold)
            assert np.intersect1d(train, test).size == 0, f"set {t} fold {fold}"
            assert np.array_equal(np.sort(np.concatenate([train, test])), everything)


def test_criterion_06_mixture_size_is_the_rounded_quota_sum():
    """|mix| == round_half_up(k*|A|) + round_half_up(p*|B|) over the default grid."""
    a = build_dataset(domain="A", n=137, m=6, seed=61)
    b = build_dataset(domain="B", n=93, m=6, seed=62)
    a_assign = ward_cluster(a.labels(), 12, domain="A")
    b_assign = ward_cluster(b.labels(), 12, domain="B")
    steps = (0.0, 0.25, 0.5, 0.75, 1.0)
    quarter = [(k, p) for k in steps for p in steps if max(k, p) == 1.0]
    cells = {(float(k), float(p)) for k, p in DEFAULTS["kp_grid"]} | set(quarter)
    for k, p in sorted(cells):
        spec = MixSpec(float(k), float(p))
        mixed = mix_datasets(a, a_assign, b, b_assign, spec, seed=63)
        want_a = _round_half_up(k * len(a))
        want_b = _round_half_up(p * len(b))
        assert len(mixed) == want_a + want_b, spec.label()
        counts = mixed.manifest()["per_domain_counts"]
        assert counts.get("A", 0) == want_a and counts.get("B", 0) == want_b


@pytest.fixture(scope="module")
def synthetic_benchmark():
    """Mean per-domain r2 of merged / single-domain / baseline training, 10 seeds."""
    rows = []
    for seed in range(10):
        a, b = make_domain_pair(seed)
        merged, only_a, only_b = run_kp_sweep(
            a, b, [MixSpec(1, 1), MixSpec(1, 0), MixSpec(0, 1)],
            SVR_PIPELINE, seed=seed,
        )
        base = run_randomized_baseline(a, b, MixSpec(1, 1), SVR_PIPELINE, seed=seed)

        def dom(report, domain):
            return np.mean([r.r2 for r in report.records if r.test_domain == domain])

        rows.append((dom(merged, "synthA"), dom(merged, "synthB"),
                     dom(only_a, "synthA"), dom(only_b, "synthB"),
                     dom(base, "synthB")))
    arr = np.asarray(rows).mean(axis=0)
    return dict(zip(("merged_a", "merged_b", "single_a", "single_b", "baseline_b"), arr))


def test_criterion_07_merged_training_beats_single_domain(synthetic_benchmark):
    """Two synthetic domains, shared map: (1,1) r2 >= single-domain r2 + 0.02."""
    bench = synthetic_benchmark
    assert bench["merged_a"] >= bench["single_a"] + 0.02, bench
    assert bench["merged_b"] >= bench["single_b"] + 0.02, bench


def test_criterion_08_genuine_labels_beat_randomized_baseline(synthetic_benchmark):
    """Merged training beats the randomized-label mix by >= 0.05 r2 on domain B."""
    bench = synthetic_benchmark
    assert bench["merged_b"] >= bench["baseline_b"] + 0.05, bench


def test_criterion_09_sweep_output_is_byte_identical_across_jobs(tmp_path):
    """Two sweep runs, same seed, --jobs 1 vs 4: identical records.tsv bytes."""
    a, b = make_domain_pair(9, n_per_domain=60, n_features=12, n_signal=4)
    b = b.subset(np.arange(48))
    data = tmp_path / "data"
    data.mkdir()
    paths = {}
    for tag, ds in (("a", a), ("b", b)):
        paths[tag] = (data / f"{tag}_feat.csv", data / f"{tag}_lab.csv")
        export_csvs(ds, *paths[tag])
    blobs = []
    for tag, jobs in (("j1", 1), ("j4", 4)):
        out = tmp_path / tag
        cfg_path = tmp_path / f"{tag}.json"
        cfg_path.write_text(json.dumps({
            "out": str(out),
            "datasets": {
                "a": {"name": "A", "features": str(paths["a"][0]),
                      "labels": str(paths["a"][1]), "scale": [-1, 1]},
                "b": {"name": "B", "features": str(paths["b"][0]),
                      "labels": str(paths["b"][1]), "scale": [-1, 1]},
            },
        }))
        for command in ("ingest", "cluster", "split"):
            assert cli_main([command, "--config", str(cfg_path)]) == 0, command
        assert cli_main(["sweep", "--config", str(cfg_path), "--jobs", str(jobs)]) == 0
        blobs.append((out / "sweep" / "records.tsv").read_bytes())
    assert blobs[0] == blobs[1]


@pytest.mark.skipif(
    "EMOMIX_REAL_DATA_CONFIG" not in os.environ,
    reason="licensed audio-feature datasets not configured",
)
def test_criterion_10_real_data_reference_errors():
    """Merged (1,1) SVR lands within +-0.05 RMSE of the published reference runs."""
    cfg = load_config(os.environ["EMOMIX_REAL_DATA_CONFIG"])
    datasets = {}
    for role in ("a", "b"):
        entry = cfg["datasets"][role]
        ds = load_dataset(
            entry["features"], entry["labels"], entry["name"],
            LabelScale(float(entry["scale"][0]), float(entry["scale"][1])),
        )
        if entry["exclude_category"]:
            ds = exclude_by_category(ds, entry["exclude_category"])
        datasets[role] = ds
    report = cross_validate(
        datasets["a"], datasets["b"], MixSpec(1, 1), SVR_PIPELINE,
        n_folds=cfg["n_folds"], seed=cfg["seed"],
        min_cluster_size=cfg["min_cluster_size"],
    )
    agg = report.aggregates()
    rmse_b_valence = agg[(datasets["b"].domain, "valence")]["rmse"][0]
    rmse_a_arousal = agg[(datasets["a"].domain, "arousal")]["rmse"][0]
    print(f"\nrole b (music-chorus) valence RMSE {rmse_b_valence:.4f}, reference 0.168")
    print(f"role a (general-sound) arousal RMSE {rmse_a_arousal:.4f}, reference 0.125")
    assert abs(rmse_b_valence - 0.168) <= 0.05
    assert abs(rmse_a_arousal - 0.125) <= 0.05
