"""Standardize -> project -> regress pipelines.

A pipeline config names a model family, a variance-retention threshold for
the projection step, and the model hyperparameters.  Fitting learns the
standardizer and projection on the training features, then the regressor
on the projected ones; prediction replays the same chain.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ConfigInvalid
from .learners import KernelSpec, fit_elasticnet, fit_svr, predict
from .preprocess import apply_pca, apply_standardizer, fit_pca, fit_standardizer

_ENET_PARAMS = {"alpha", "l1_ratio"}
_SVR_PARAMS = {"C", "epsilon", "kernel", "gamma_scale"}


@dataclass(frozen=True)
class PipelineConfig:
    """Hyperparameter point: model family, projection threshold, params."""

    model: str
    pca_threshold: float
    model_params: tuple

    def __post_init__(self):
        if self.model not in ("enet", "svr"):
            raise ConfigInvalid("model", f"unknown model {self.model!r}")
        if not (0.0 < self.pca_threshold <= 1.0):
            raise ConfigInvalid("pca_threshold", "must lie in (0, 1]")
        params = tuple(sorted((str(k), v) for k, v in self.model_params))
        names = {k for k, _ in params}
        if len(names) != len(params):
            raise ConfigInvalid("model_params", "duplicate parameter name")
        allowed = _ENET_PARAMS if self.model == "enet" else _SVR_PARAMS
        extra = names - allowed
        if extra:
            raise ConfigInvalid("model_params", f"unknown parameters {sorted(extra)}")
        if self.model == "enet":
            missing = _ENET_PARAMS - names
            if missing:
                raise ConfigInvalid("model_params", f"missing {sorted(missing)}")
        else:
            missing = {"C", "epsilon", "kernel"} - names
            if missing:
                raise ConfigInvalid("model_params", f"missing {sorted(missing)}")
            kind = dict(params)["kernel"]
            if kind == "rbf" and "gamma_scale" not in names:
                raise ConfigInvalid("model_params", "rbf kernel needs gamma_scale")
            if kind == "linear" and "gamma_scale" in names:
                raise ConfigInvalid("model_params", "linear kernel takes no gamma_scale")
        object.__setattr__(self, "model_params", params)

    def params_dict(self) -> dict:
        return dict(self.model_params)

    def sort_key(self):
        """Total order over configs, used for deterministic tie-breaking."""
        params = tuple(
            (k, 0, float(v)) if not isinstance(v, str) else (k, 1, v)
            for k, v in self.model_params
        )
        return (self.model, self.pca_threshold, params)

    def as_dict(self) -> dict:
        return {
            "model": self.model,
            "pca_threshold": self.pca_threshold,
            "model_params": {
                k: (v if isinstance(v, str) else float(v)) for k, v in self.model_params
            },
        }

    @classmethod
    def from_dict(cls, d) -> "PipelineConfig":
        return cls(
            model=d["model"],
            pca_threshold=float(d["pca_threshold"]),
            model_params=tuple(d["model_params"].items()),
        )

    def label(self) -> str:
        parts = [f"{k}={v}" for k, v in self.model_params]
        return f"{self.model}(pca={self.pca_threshold:g}, {', '.join(parts)})"


@dataclass(frozen=True)
class FittedPipeline:
    config: PipelineConfig
    standardizer: object
    pca: object
    model: object

    def transform(self, X) -> np.ndarray:
        Z = apply_standardizer(self.standardizer, np.asarray(X, dtype=np.float64))
        return apply_pca(self.pca, Z)

    def predict(self, X) -> np.ndarray:
        return predict(self.model, self.transform(X))


def fit_pipeline(X, y, config: PipelineConfig) -> FittedPipeline:
    """Fit the full chain on one training matrix and target vector.

    For rbf pipelines the kernel width is ``gamma_scale / m`` where m is
    the number of retained projection components, so the width tracks the
    dimensionality the regressor actually sees.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    standardizer = fit_standardizer(X)
    Z = apply_standardizer(standardizer, X)
    pca = fit_pca(Z, config.pca_threshold)
    T = apply_pca(pca, Z)

    params = config.params_dict()
    if config.model == "enet":
        model = fit_elasticnet(T, y, alpha=params["alpha"], l1_ratio=params["l1_ratio"])
    else:
        if params["kernel"] == "rbf":
            kernel = KernelSpec("rbf", gamma=params["gamma_scale"] / pca.m)
        else:
            kernel = KernelSpec("linear")
        model = fit_svr(T, y, C=params["C"], epsilon=params["epsilon"], kernel=kernel)
    return FittedPipeline(config=config, standardizer=standardizer, pca=pca, model=model)
