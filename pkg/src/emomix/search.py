"""Successive-halving hyperparameter search and greedy ensembling.

The search holds out a stratified validation slice of the mixed training
set, then runs rungs of growing training-subset fractions: every surviving
candidate pipeline is fit on the rung's stratified sub-sample and scored by
the average of its per-domain validation MSEs.  The top ceil(count/eta)
advance.  Survivors of the full-resource rung feed a greedy forward-selected
ensemble built on their cached validation predictions.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ._seeding import derive_seed
from .errors import ConfigInvalid, EmptyCandidates, NoCandidates
from .learners import EnsembleModel
from .metrics import mse
from .mixing import MixedDataset
from .pipeline import FittedPipeline, PipelineConfig, fit_pipeline
from .stratification import stratified_indices

ENET_ALPHAS = tuple(np.logspace(-4, 1, 6))
ENET_L1_RATIOS = (0.1, 0.5, 0.9)
SVR_CS = tuple(np.logspace(-2, 3, 6))
SVR_EPSILONS = (0.01, 0.1, 0.2)
SVR_GAMMA_SCALES = (1.0, 10.0, 0.1)
PCA_THRESHOLDS = (0.80, 0.90, 0.95, 0.99)

VALIDATION_FRACTION = 0.2


def default_candidates(pca_thresholds=PCA_THRESHOLDS) -> list:
    """The full default hyperparameter grid over both model families."""
    out = []
    for thr in pca_thresholds:
        for alpha in ENET_ALPHAS:
            for l1 in ENET_L1_RATIOS:
                out.append(
                    PipelineConfig(
                        model="enet",
                        pca_threshold=thr,
                        model_params=(("alpha", float(alpha)), ("l1_ratio", l1)),
                    )
                )
        for C in SVR_CS:
            for eps in SVR_EPSILONS:
                for gs in SVR_GAMMA_SCALES:
                    out.append(
                        PipelineConfig(
                            model="svr",
                            pca_threshold=thr,
                            model_params=(
                                ("C", float(C)),
                                ("epsilon", eps),
                                ("kernel", "rbf"),
                                ("gamma_scale", gs),
                            ),
                        )
                    )
                out.append(
                    PipelineConfig(
                        model="svr",
                        pca_threshold=thr,
                        model_params=(("C", float(C)), ("epsilon", eps), ("kernel", "linear")),
                    )
                )
    return out


@dataclass(frozen=True)
class HalvingSchedule:
    """Rung plan: survivor counts ceil(n/eta^r) against growing train fractions."""

    n_candidates: int
    eta: float = 3.0
    min_resource: float = 0.0
    max_resource: float = 1.0

    def __post_init__(self):
        if self.n_candidates < 1:
            raise ConfigInvalid("n_candidates", "must be >= 1")
        if not self.eta > 1.0:
            raise ConfigInvalid("eta", "must be > 1")
        if self.max_resource != 1.0:
            raise ConfigInvalid("max_resource", "must be 1.0")
        if self.min_resource == 0.0:
            # Auto: at most 3 rungs below full resource, fewer for tiny grids.
            depth = min(math.ceil(math.log(self.n_candidates, self.eta) - 1e-9), 3)
            object.__setattr__(self, "min_resource", self.eta ** -max(depth, 0))
        if not (0.0 < self.min_resource <= 1.0):
            raise ConfigInvalid("min_resource", "must lie in (0, 1]")

    def resolve(self) -> list:
        """The (survivor_count, resource) sequence, last rung at full resource."""
        rungs = []
        r = 0
        while True:
            count = max(1, math.ceil(self.n_candidates / self.eta**r))
            resource = min(self.min_resource * self.eta**r, 1.0)
            if count == 1 or resource >= 1.0:
                rungs.append((count, 1.0))
                break
            rungs.append((count, float(resource)))
            r += 1
        return rungs


@dataclass(frozen=True)
class SearchRecipe:
    """Instruction to run the search inside each evaluation fold.

    The outer protocol fits this per fold: halving over ``candidates`` on
    the fold's mixed train, then either the greedy ensemble (refit on the
    full fold train) or the single best config.
    """

    candidates: tuple
    eta: float = 3.0
    min_resource: float = 0.0
    max_members: int = 10
    ensemble: bool = True

    def __post_init__(self):
        object.__setattr__(self, "candidates", tuple(self.candidates))
        if not self.candidates:
            raise EmptyCandidates("fold search needs at least one candidate")


@dataclass(frozen=True)
class ScoredCandidate:
    """A full-resource survivor: its fit and cached validation predictions."""

    config: PipelineConfig
    score: float
    pipeline: FittedPipeline
    val_pred: np.ndarray


@dataclass(frozen=True)
class SearchResult:
    target: str
    seed: int
    ranked: tuple  # (PipelineConfig, score) over all candidates, best first
    survivors: tuple  # ScoredCandidate for the full-resource rung, best first
    val_indices: np.ndarray
    val_y: np.ndarray
    val_domains: np.ndarray
    rungs: tuple  # (survivor_count, resource) actually run
    trace: tuple = field(default=())  # per rung: dicts with per-candidate scores

    @property
    def best_config(self) -> PipelineConfig:
        return self.ranked[0][0]

    def trace_payload(self) -> dict:
        return {
            "target": self.target,
            "seed": self.seed,
            "rungs": [
                {
                    "rung": i,
                    "resource": res,
                    "n_candidates": count,
                    "candidates": list(entries),
                }
                for i, ((count, res), entries) in enumerate(zip(self.rungs, self.trace))
            ],
        }


def _domain_mean_mse(y, pred, domains, objective) -> float:
    vals = [objective(y[domains == d], pred[domains == d]) for d in np.unique(domains)]
    return float(np.mean(vals))


def successive_halving(
    candidates,
    train: MixedDataset,
    target: str,
    schedule: HalvingSchedule = None,
    objective=mse,
    seed: int = 0,
    jobs: int = 1,
) -> SearchResult:
    """Rank pipeline configs for one target on a mixed training set.

    Deterministic for a fixed seed regardless of ``jobs``: per-rung work is
    keyed by candidate index and merged in index order.
    """
    candidates = list(candidates)
    if not candidates:
        raise EmptyCandidates("no pipeline candidates to search")
    if schedule is None:
        schedule = HalvingSchedule(n_candidates=len(candidates))
    elif schedule.n_candidates != len(candidates):
        raise ConfigInvalid("n_candidates", "schedule does not match candidate count")

    n = len(train)
    val_idx = stratified_indices(
        train.strat_class, VALIDATION_FRACTION, derive_seed(seed, "search-val")
    )
    val_mask = np.zeros(n, dtype=bool)
    val_mask[val_idx] = True
    pool_idx = np.flatnonzero(~val_mask)

    X_val = train.features[val_idx]
    y_val = train.target(target)[val_idx]
    dom_val = np.asarray(train.provenance)[val_idx]

    X_pool = train.features[pool_idx]
    y_pool = train.target(target)[pool_idx]
    class_pool = train.strat_class[pool_idx]

    rungs = schedule.resolve()
    alive = list(range(len(candidates)))
    # (rung_reached, score) per candidate; eliminated ones keep their last score.
    last_seen = {}
    trace = []
    final_fits = {}

    for rung_no, (count, resource) in enumerate(rungs):
        alive = alive[:count]
        if resource >= 1.0:
            sub = np.arange(len(pool_idx))
        else:
            sub = stratified_indices(
                class_pool, resource, derive_seed(seed, "rung", rung_no)
            )
        X_r, y_r = X_pool[sub], y_pool[sub]

        def run_one(ci):
            fitted = fit_pipeline(X_r, y_r, candidates[ci])
            pred = fitted.predict(X_val)
            return fitted, pred, _domain_mean_mse(y_val, pred, dom_val, objective)

        if jobs > 1 and len(alive) > 1:
            with ThreadPoolExecutor(max_workers=jobs) as pool:
                outs = dict(zip(alive, pool.map(run_one, alive)))
        else:
            outs = {ci: run_one(ci) for ci in alive}

        entries = []
        for ci in alive:
            fitted, pred, score = outs[ci]
            last_seen[ci] = (rung_no, score)
            entries.append({"config": candidates[ci].as_dict(), "score": score})
            if resource >= 1.0:
                final_fits[ci] = ScoredCandidate(
                    config=candidates[ci], score=score, pipeline=fitted, val_pred=pred
                )
        trace.append(tuple(entries))
        alive.sort(key=lambda ci: (last_seen[ci][1], candidates[ci].sort_key()))
        if resource >= 1.0:
            break

    def rank_key(ci):
        rung_no, score = last_seen[ci]
        return (-rung_no, score, candidates[ci].sort_key())

    order = sorted(last_seen, key=rank_key)
    ranked = tuple((candidates[ci], last_seen[ci][1]) for ci in order)
    survivors = tuple(final_fits[ci] for ci in order if ci in final_fits)
    return SearchResult(
        target=target,
        seed=seed,
        ranked=ranked,
        survivors=survivors,
        val_indices=val_idx,
        val_y=y_val,
        val_domains=dom_val,
        rungs=tuple(rungs),
        trace=tuple(trace),
    )


def greedy_ensemble(
    candidates, val_y, max_members: int = 10, objective=mse
) -> EnsembleModel:
    """Forward selection with replacement over cached validation predictions.

    Starts empty and repeatedly adds the candidate minimizing the validation
    objective of the uniform average, stopping at ``max_members`` picks or
    when no addition strictly improves; weights are the normalized selection
    frequencies.  The result never scores worse than its best single member.
    """
    candidates = list(candidates)
    if not candidates:
        raise NoCandidates("greedy selection needs at least one candidate")
    if max_members < 1:
        raise ConfigInvalid("max_members", "must be >= 1")
    val_y = np.asarray(val_y, dtype=np.float64)
    preds = np.stack([np.asarray(c.val_pred, dtype=np.float64) for c in candidates])

    counts = np.zeros(len(candidates), dtype=np.intp)
    total = np.zeros_like(val_y)
    best = math.inf
    for k in range(1, max_members + 1):
        scores = [objective(val_y, (total + preds[i]) / k) for i in range(len(candidates))]
        pick = int(np.argmin(scores))
        if not scores[pick] < best:
            break
        counts[pick] += 1
        total += preds[pick]
        best = scores[pick]

    keep = np.flatnonzero(counts)
    members = tuple(candidates[i].pipeline for i in keep)
    weights = counts[keep] / counts.sum()
    return EnsembleModel(members=members, weights=weights)


def ensemble_recipe(candidates, ensemble: EnsembleModel) -> dict:
    """JSON-ready recipe: member configs and weights of a greedy ensemble."""
    by_pipeline = {id(c.pipeline): c.config for c in candidates}
    return {
        "members": [
            {
                "config": by_pipeline[id(m)].as_dict(),
                "weight": float(w),
            }
            for m, w in zip(ensemble.members, ensemble.weights)
        ]
    }
