"""emomix: cross-domain audio emotion regression experiments.

Ingests two labeled sound datasets, stratifies their continuous
(valence, arousal) label space by Ward clustering, composes (k, p)-mixed
training sets, fits standardize -> PCA -> {elastic net, epsilon-SVR}
pipelines tuned by successive halving with greedy ensembling, and reports
per-domain cross-validated RMSE/MSE/R².
"""

from ._seeding import derive_seed, rng_for
from .dataset import (
    LabeledDataset,
    LabelScale,
    exclude_by_category,
    load_dataset,
    load_dataset_npz,
    rescale_label,
    save_dataset_npz,
)
from .evaluation import (
    CVReport,
    MetricRecord,
    aggregate_table,
    cross_validate,
    run_kp_sweep,
    run_randomized_baseline,
    sweep_tsv_lines,
)
from .learners import (
    EnsembleModel,
    KernelSpec,
    LinearModel,
    SVRModel,
    backend_name,
    fit_elasticnet,
    fit_svr,
    load_model,
    predict,
    save_model,
)
from .metrics import mse, r2, rmse
from .mixing import MixedDataset, MixSpec, mix_datasets, randomize_labels
from .pipeline import FittedPipeline, PipelineConfig, fit_pipeline
from .preprocess import (
    PCAModel,
    Standardizer,
    apply_pca,
    apply_standardizer,
    fit_pca,
    fit_standardizer,
)
from .search import (
    HalvingSchedule,
    SearchRecipe,
    default_candidates,
    greedy_ensemble,
    successive_halving,
)
from .stratification import (
    ClusterAssignment,
    FoldPlan,
    stratified_kfold,
    stratified_subsample,
    ward_cluster,
    ward_linkage,
)
from .synthetic import make_domain_pair

__version__ = "0.1.0"

__all__ = [
    "LabelScale",
    "LabeledDataset",
    "load_dataset",
    "rescale_label",
    "exclude_by_category",
    "save_dataset_npz",
    "load_dataset_npz",
    "ClusterAssignment",
    "FoldPlan",
    "ward_linkage",
    "ward_cluster",
    "stratified_kfold",
    "stratified_subsample",
    "MixSpec",
    "MixedDataset",
    "mix_datasets",
    "randomize_labels",
    "Standardizer",
    "PCAModel",
    "fit_standardizer",
    "apply_standardizer",
    "fit_pca",
    "apply_pca",
    "LinearModel",
    "SVRModel",
    "KernelSpec",
    "EnsembleModel",
    "fit_elasticnet",
    "fit_svr",
    "predict",
    "save_model",
    "load_model",
    "backend_name",
    "PipelineConfig",
    "FittedPipeline",
    "fit_pipeline",
    "HalvingSchedule",
    "SearchRecipe",
    "default_candidates",
    "successive_halving",
    "greedy_ensemble",
    "mse",
    "rmse",
    "r2",
    "MetricRecord",
    "CVReport",
    "cross_validate",
    "run_kp_sweep",
    "run_randomized_baseline",
    "aggregate_table",
    "sweep_tsv_lines",
    "make_domain_pair",
    "derive_seed",
    "rng_for",
    "__version__",
]
