"""Outer cross-validation protocol and per-domain metric reporting.

Each fold mixes the two datasets' training portions under a (k, p) spec,
fits one pipeline per target on the mixture, and scores the unmixed,
unsubsampled test fold of each domain separately.  Sweeps share fold plans
across (k, p) cells so cells differ only by mixing; the randomized baseline
replaces dataset A's train-side labels with uniform noise before mixing.
"""

import hashlib
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ._seeding import derive_seed
from .dataset import LabeledDataset
from .errors import FoldPlanMissing, LeakageDetected
from .learners import EnsembleModel
from .metrics import mse, r2, rmse
from .mixing import MixSpec, mix_datasets, randomize_labels
from .pipeline import PipelineConfig, fit_pipeline
from .search import (
    HalvingSchedule,
    SearchRecipe,
    ensemble_recipe,
    greedy_ensemble,
    successive_halving,
)
from .stratification import (
    ClusterAssignment,
    FoldPlan,
    stratified_kfold,
    ward_cluster,
)

TARGETS = ("valence", "arousal")

TSV_HEADER = "spec_k\tspec_p\tmodel\ttest_domain\ttarget\tfold\trmse\tmse\tr2"


@dataclass(frozen=True)
class MetricRecord:
    """One (train spec, test domain, target, fold) scoring outcome."""

    spec_k: float
    spec_p: float
    model: str
    test_domain: str
    target: str
    fold: int
    rmse: float
    mse: float
    r2: float
    baseline: bool = False

    def __post_init__(self):
        if self.target not in TARGETS:
            raise ValueError(f"unknown target {self.target!r}")
        if self.rmse < 0 or self.mse < 0:
            raise ValueError("error metrics cannot be negative")
        if self.r2 > 1.0 + 1e-12:
            raise ValueError("r2 cannot exceed 1")
        if abs(self.rmse**2 - self.mse) > 1e-12 * max(self.mse, 1.0):
            raise ValueError("rmse and mse are inconsistent")

    def tsv_row(self) -> str:
        return "\t".join(
            [
                f"{self.spec_k:g}",
                f"{self.spec_p:g}",
                self.model,
                self.test_domain,
                self.target,
                str(self.fold),
                repr(self.rmse),
                repr(self.mse),
                repr(self.r2),
            ]
        )

    def as_dict(self) -> dict:
        return {
            "spec_k": self.spec_k,
            "spec_p": self.spec_p,
            "model": self.model,
            "test_domain": self.test_domain,
            "target": self.target,
            "fold": self.fold,
            "rmse": self.rmse,
            "mse": self.mse,
            "r2": self.r2,
            "baseline": self.baseline,
        }


@dataclass(frozen=True)
class CVReport:
    """All fold records for one train spec, plus the run manifest."""

    spec: MixSpec
    seed: int
    n_folds: int
    records: tuple
    manifest: dict = field(default_factory=dict)
    baseline: bool = False

    def __post_init__(self):
        object.__setattr__(self, "records", tuple(self.records))
        seen = set()
        for rec in self.records:
            key = (rec.test_domain, rec.target, rec.fold)
            if key in seen:
                raise ValueError(f"duplicate record for {key}")
            seen.add(key)
        domains = {rec.test_domain for rec in self.records}
        expected = {
            (d, t, f) for d in domains for t in TARGETS for f in range(self.n_folds)
        }
        if seen != expected:
            raise ValueError("records do not cover every (domain, target, fold) once")

    def aggregates(self) -> dict:
        """Mean and sample std of each metric per (test_domain, target)."""
        out = {}
        keys = sorted({(r.test_domain, r.target) for r in self.records})
        for domain, target in keys:
            sub = [r for r in self.records if r.test_domain == domain and r.target == target]
            sub.sort(key=lambda r: r.fold)
            entry = {}
            for metric in ("rmse", "mse", "r2"):
                vals = np.array([getattr(r, metric) for r in sub])
                std = float(vals.std(ddof=1)) if len(vals) > 1 else 0.0
                entry[metric] = (float(vals.mean()), std)
            out[(domain, target)] = entry
        return out

    def tsv_lines(self, header: bool = True) -> list:
        lines = [TSV_HEADER] if header else []
        order = sorted(
            range(len(self.records)),
            key=lambda i: (
                self.records[i].test_domain,
                self.records[i].target,
                self.records[i].fold,
            ),
        )
        lines.extend(self.records[i].tsv_row() for i in order)
        return lines

    def as_dict(self) -> dict:
        return {
            "spec": {"k": self.spec.k, "p": self.spec.p},
            "seed": self.seed,
            "n_folds": self.n_folds,
            "baseline": self.baseline,
            "manifest": self.manifest,
            "records": [r.as_dict() for r in self.records],
            "aggregates": {
                f"{d}/{t}": {
                    m: {"mean": v[0], "std": v[1]} for m, v in entry.items()
                }
                for (d, t), entry in self.aggregates().items()
            },
        }

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), indent=2, sort_keys=True)


def aggregate_table(reports) -> str:
    """Fixed-width mean ± std RMSE/R² table, one block per train spec."""
    lines = []
    for report in reports:
        tag = "baseline " if report.baseline else ""
        lines.append(f"train spec {tag}({report.spec.label()})")
        lines.append(
            f"  {'test domain':<18} {'target':<8} {'RMSE':>22} {'R2':>22}"
        )
        for (domain, target), entry in sorted(report.aggregates().items()):
            rm, rs = entry["rmse"]
            qm, qs = entry["r2"]
            lines.append(
                f"  {domain:<18} {target:<8} {rm:>11.3e} ± {rs:<8.2e} {qm:>11.3f} ± {qs:<8.3f}"
            )
    return "\n".join(lines)


def dataset_checksum(ds: LabeledDataset) -> str:
    h = hashlib.sha256()
    h.update(np.ascontiguousarray(ds.features).tobytes())
    h.update("\x1f".join(ds.ids).encode("utf-8"))
    h.update(np.ascontiguousarray(ds.valence).tobytes())
    h.update(np.ascontiguousarray(ds.arousal).tobytes())
    return h.hexdigest()


def _restrict_assignment(assign: ClusterAssignment, indices) -> ClusterAssignment:
    sub = assign.cluster_of[np.asarray(indices, dtype=np.intp)]
    sizes = np.bincount(sub, minlength=assign.n_clusters)
    return ClusterAssignment(
        dataset_domain=assign.dataset_domain,
        cluster_of=sub,
        cluster_sizes=tuple(int(s) for s in sizes),
    )


def _recipe_for_target(recipe, target: str):
    if isinstance(recipe, dict) and set(recipe) <= {"valence", "arousal"}:
        if target not in recipe:
            raise KeyError(f"recipe lacks an entry for target {target!r}")
        return recipe[target]
    return recipe


def recipe_label(recipe) -> str:
    if isinstance(recipe, PipelineConfig):
        return recipe.model
    if isinstance(recipe, dict) and "members" in recipe:
        return "ensemble"
    if isinstance(recipe, SearchRecipe):
        return "auto"
    raise TypeError(f"not a pipeline config or ensemble recipe: {recipe!r}")


def fit_recipe(X, y, recipe):
    """Fit a single config or an ensemble recipe; returns a predictor."""
    if isinstance(recipe, PipelineConfig):
        return fit_pipeline(X, y, recipe)
    members = []
    weights = []
    for item in recipe["members"]:
        cfg = item["config"]
        if isinstance(cfg, dict):
            cfg = PipelineConfig.from_dict(cfg)
        members.append(fit_pipeline(X, y, cfg))
        weights.append(float(item["weight"]))
    ensemble = EnsembleModel(members=tuple(members), weights=np.array(weights))

    class _Predictor:
        def predict(self, X):
            out = np.zeros(np.asarray(X).shape[0])
            for member, weight in zip(ensemble.members, ensemble.weights):
                out += weight * member.predict(X)
            return out

    return _Predictor()


def _check_no_leakage(train_ids, test_ids, fold: int) -> None:
    overlap = set(train_ids) & set(test_ids)
    if overlap:
        raise LeakageDetected(
            f"fold {fold}: {len(overlap)} train ids appear in the test fold"
        )


def default_assignment(ds: LabeledDataset, min_cluster_size: int = 25) -> ClusterAssignment:
    return ward_cluster(ds.labels(), min_cluster_size, domain=ds.domain)


def default_folds(assign: ClusterAssignment, n_folds: int, seed: int) -> FoldPlan:
    return stratified_kfold(assign, n_folds, derive_seed(seed, "folds", assign.dataset_domain))


def _evaluate_fold(
    a, b, a_assign, b_assign, a_folds, b_folds, spec, recipe, seed, fold, baseline
):
    a_train_idx = a_folds.train_indices(fold)
    b_train_idx = b_folds.train_indices(fold)
    a_train = a.subset(a_train_idx)
    b_train = b.subset(b_train_idx)
    if baseline:
        a_train = randomize_labels(a_train, derive_seed(seed, "baseline", spec.label(), fold))
    mixed = mix_datasets(
        a_train,
        _restrict_assignment(a_assign, a_train_idx),
        b_train,
        _restrict_assignment(b_assign, b_train_idx),
        spec,
        derive_seed(seed, "mix", spec.label(), fold),
    )

    records = []
    predictors = {}
    for target in TARGETS:
        item = _recipe_for_target(recipe, target)
        if isinstance(item, SearchRecipe):
            result = successive_halving(
                list(item.candidates),
                mixed,
                target,
                schedule=HalvingSchedule(
                    n_candidates=len(item.candidates),
                    eta=item.eta,
                    min_resource=item.min_resource,
                ),
                seed=derive_seed(seed, "fold-search", spec.label(), target, fold),
            )
            if item.ensemble:
                selected = greedy_ensemble(
                    result.survivors, result.val_y, max_members=item.max_members
                )
                resolved = ensemble_recipe(result.survivors, selected)
            else:
                resolved = result.best_config
            predictor = fit_recipe(mixed.features, mixed.target(target), resolved)
        else:
            predictor = fit_recipe(mixed.features, mixed.target(target), item)
        predictors[target] = (predictor, item)

    for ds, plan in ((a, a_folds), (b, b_folds)):
        test_idx = plan.test_indices(fold)
        test = ds.subset(test_idx)
        _check_no_leakage(mixed.ids, test.ids, fold)
        for target in TARGETS:
            predictor, item = predictors[target]
            pred = predictor.predict(test.features)
            truth = test.target(target)
            records.append(
                MetricRecord(
                    spec_k=spec.k,
                    spec_p=spec.p,
                    model=recipe_label(item),
                    test_domain=ds.domain,
                    target=target,
                    fold=fold,
                    rmse=rmse(truth, pred),
                    mse=mse(truth, pred),
                    r2=r2(truth, pred),
                    baseline=baseline,
                )
            )
    return records


def _recipe_manifest(recipe):
    if isinstance(recipe, PipelineConfig):
        return recipe.as_dict()
    if isinstance(recipe, SearchRecipe):
        return {
            "fold_search": {
                "n_candidates": len(recipe.candidates),
                "eta": recipe.eta,
                "min_resource": recipe.min_resource,
                "max_members": recipe.max_members,
                "ensemble": recipe.ensemble,
            }
        }
    if isinstance(recipe, dict) and "members" in recipe:
        return {
            "members": [
                {
                    "config": (
                        item["config"].as_dict()
                        if isinstance(item["config"], PipelineConfig)
                        else item["config"]
                    ),
                    "weight": float(item["weight"]),
                }
                for item in recipe["members"]
            ]
        }
    return {t: _recipe_manifest(_recipe_for_target(recipe, t)) for t in sorted(recipe)}


def cross_validate(
    a: LabeledDataset,
    b: LabeledDataset,
    spec: MixSpec,
    recipe,
    n_folds: int = 5,
    seed: int = 0,
    min_cluster_size: int = 25,
    a_assign: ClusterAssignment = None,
    b_assign: ClusterAssignment = None,
    a_folds: FoldPlan = None,
    b_folds: FoldPlan = None,
    baseline: bool = False,
    jobs: int = 1,
) -> CVReport:
    """Mixed-training, per-domain-tested k-fold cross-validation.

    ``recipe`` is a PipelineConfig, an ensemble recipe dict (``members`` of
    config + weight), or a per-target mapping of either.  Fold plans derive
    deterministically from (seed, domain) when not supplied, so runs with
    equal seeds share folds.
    """
    if a_assign is None:
        a_assign = default_assignment(a, min_cluster_size)
    if b_assign is None:
        b_assign = default_assignment(b, min_cluster_size)
    if a_folds is None:
        a_folds = default_folds(a_assign, n_folds, seed)
    if b_folds is None:
        b_folds = default_folds(b_assign, n_folds, seed)
    for name, plan, ds in (("a", a_folds, a), ("b", b_folds, b)):
        if plan.n_folds != n_folds:
            raise FoldPlanMissing(f"fold plan for dataset {name} has {plan.n_folds} folds")
        if plan.fold_of.size != len(ds):
            raise FoldPlanMissing(f"fold plan for dataset {name} does not cover it")

    def run_fold(fold):
        return _evaluate_fold(
            a, b, a_assign, b_assign, a_folds, b_folds, spec, recipe, seed, fold, baseline
        )

    folds = range(n_folds)
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            per_fold = list(pool.map(run_fold, folds))
    else:
        per_fold = [run_fold(f) for f in folds]

    records = [rec for fold_recs in per_fold for rec in fold_recs]
    records.sort(key=lambda r: (r.test_domain, r.target, r.fold))
    manifest = {
        "spec": {"k": spec.k, "p": spec.p},
        "seed": seed,
        "n_folds": n_folds,
        "baseline": baseline,
        "recipe": _recipe_manifest(recipe),
        "datasets": {
            ds.domain: {"n": len(ds), "checksum": dataset_checksum(ds)}
            for ds in (a, b)
        },
    }
    return CVReport(
        spec=spec,
        seed=seed,
        n_folds=n_folds,
        records=records,
        manifest=manifest,
        baseline=baseline,
    )


def run_kp_sweep(
    a: LabeledDataset,
    b: LabeledDataset,
    grid,
    recipe,
    seed: int = 0,
    n_folds: int = 5,
    min_cluster_size: int = 25,
    jobs: int = 1,
    a_assign: ClusterAssignment = None,
    b_assign: ClusterAssignment = None,
    a_folds: FoldPlan = None,
    b_folds: FoldPlan = None,
) -> list:
    """One CVReport per (k, p) cell, all sharing the same fold plans."""
    grid = list(grid)
    if not grid:
        raise ValueError("sweep grid is empty")
    if a_assign is None:
        a_assign = default_assignment(a, min_cluster_size)
    if b_assign is None:
        b_assign = default_assignment(b, min_cluster_size)
    if a_folds is None:
        a_folds = default_folds(a_assign, n_folds, seed)
    if b_folds is None:
        b_folds = default_folds(b_assign, n_folds, seed)
    return [
        cross_validate(
            a,
            b,
            spec,
            recipe,
            n_folds=n_folds,
            seed=seed,
            a_assign=a_assign,
            b_assign=b_assign,
            a_folds=a_folds,
            b_folds=b_folds,
            jobs=jobs,
        )
        for spec in grid
    ]


def run_randomized_baseline(
    a: LabeledDataset,
    b: LabeledDataset,
    spec: MixSpec,
    recipe,
    seed: int = 0,
    n_folds: int = 5,
    min_cluster_size: int = 25,
    jobs: int = 1,
) -> CVReport:
    """cross_validate with dataset A's train-side labels randomized."""
    return cross_validate(
        a,
        b,
        spec,
        recipe,
        n_folds=n_folds,
        seed=seed,
        min_cluster_size=min_cluster_size,
        baseline=True,
        jobs=jobs,
    )


def sweep_tsv_lines(reports) -> list:
    """Tidy rows for every record of every report, header first."""
    lines = [TSV_HEADER]
    for report in reports:
        lines.extend(report.tsv_lines(header=False))
    return lines
