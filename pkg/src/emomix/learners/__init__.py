"""Regression learners: elastic net, epsilon-SVR, and ensembles."""

import numpy as np

from ..errors import DimensionMismatch
from ._backend import backend_name, kernels
from .elasticnet import (
    LinearModel,
    elasticnet_kkt_residuals,
    elasticnet_objective,
    fit_elasticnet,
)
from .ensemble import EnsembleModel, ensemble_from_counts
from .svr import (
    KernelSpec,
    SVRModel,
    fit_svr,
    solve_svr_dual,
    svr_dual_objective,
    svr_predict,
)

__all__ = [
    "LinearModel",
    "SVRModel",
    "KernelSpec",
    "EnsembleModel",
    "fit_elasticnet",
    "fit_svr",
    "predict",
    "save_model",
    "load_model",
    "solve_svr_dual",
    "svr_dual_objective",
    "elasticnet_objective",
    "elasticnet_kkt_residuals",
    "ensemble_from_counts",
    "svr_predict",
    "backend_name",
    "kernels",
]


def predict(model, X) -> np.ndarray:
    """Predict with any supported model type."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise DimensionMismatch(f"expected 2-d features, got shape {X.shape}")
    if isinstance(model, LinearModel):
        if X.shape[1] != model.n_features:
            raise DimensionMismatch(
                f"model has {model.n_features} features, input has {X.shape[1]}"
            )
        return X @ model.weights + model.intercept
    if isinstance(model, SVRModel):
        if model.n_support and X.shape[1] != model.n_features:
            raise DimensionMismatch(
                f"model has {model.n_features} features, input has {X.shape[1]}"
            )
        return svr_predict(model, X)
    if isinstance(model, EnsembleModel):
        out = np.zeros(X.shape[0])
        for member, weight in zip(model.members, model.weights):
            # Members may be bare learners or full predict()-bearing pipelines.
            if isinstance(member, (LinearModel, SVRModel, EnsembleModel)):
                out += weight * predict(member, X)
            else:
                out += weight * np.asarray(member.predict(X), dtype=np.float64)
        return out
    raise TypeError(f"cannot predict with {type(model).__name__}")


def _linear_payload(model: LinearModel, prefix=""):
    return {
        prefix + "kind": np.array("linear"),
        prefix + "weights": model.weights,
        prefix + "intercept": np.array(model.intercept),
        prefix + "alpha": np.array(model.alpha),
        prefix + "l1_ratio": np.array(model.l1_ratio),
        prefix + "converged": np.array(model.converged),
        prefix + "n_sweeps": np.array(model.n_sweeps),
        prefix + "train_hash": np.array(model.train_hash),
    }


def _svr_payload(model: SVRModel, prefix=""):
    return {
        prefix + "kind": np.array("svr"),
        prefix + "support_ids": model.support_ids,
        prefix + "support_vectors": model.support_vectors,
        prefix + "dual_coefs": model.dual_coefs,
        prefix + "intercept": np.array(model.intercept),
        prefix + "kernel_kind": np.array(model.kernel.kind),
        prefix + "gamma": np.array(model.kernel.gamma),
        prefix + "C": np.array(model.C),
        prefix + "epsilon": np.array(model.epsilon),
        prefix + "converged": np.array(model.converged),
        prefix + "n_iter": np.array(model.n_iter),
        prefix + "train_hash": np.array(model.train_hash),
    }


def _model_payload(model, prefix=""):
    if isinstance(model, LinearModel):
        return _linear_payload(model, prefix)
    if isinstance(model, SVRModel):
        return _svr_payload(model, prefix)
    if isinstance(model, EnsembleModel):
        if prefix:
            raise TypeError("nested ensembles are not serializable")
        payload = {
            "kind": np.array("ensemble"),
            "n_members": np.array(model.n_members),
            "weights": np.asarray(model.weights),
        }
        for i, member in enumerate(model.members):
            payload.update(_model_payload(member, prefix=f"m{i}."))
        return payload
    raise TypeError(f"cannot serialize {type(model).__name__}")


def save_model(model, path) -> None:
    """Serialize a fitted model to an .npz archive."""
    np.savez(path, **_model_payload(model))


def _model_from_arrays(data, prefix=""):
    kind = str(data[prefix + "kind"])
    if kind == "linear":
        return LinearModel(
            weights=data[prefix + "weights"],
            intercept=float(data[prefix + "intercept"]),
            alpha=float(data[prefix + "alpha"]),
            l1_ratio=float(data[prefix + "l1_ratio"]),
            converged=bool(data[prefix + "converged"]),
            n_sweeps=int(data[prefix + "n_sweeps"]),
            train_hash=str(data[prefix + "train_hash"]),
        )
    if kind == "svr":
        return SVRModel(
            support_ids=data[prefix + "support_ids"],
            support_vectors=data[prefix + "support_vectors"],
            dual_coefs=data[prefix + "dual_coefs"],
            intercept=float(data[prefix + "intercept"]),
            kernel=KernelSpec(
                kind=str(data[prefix + "kernel_kind"]),
                gamma=float(data[prefix + "gamma"]),
            ),
            C=float(data[prefix + "C"]),
            epsilon=float(data[prefix + "epsilon"]),
            converged=bool(data[prefix + "converged"]),
            n_iter=int(data[prefix + "n_iter"]),
            train_hash=str(data[prefix + "train_hash"]),
        )
    if kind == "ensemble":
        members = tuple(
            _model_from_arrays(data, prefix=f"m{i}.")
            for i in range(int(data["n_members"]))
        )
        return EnsembleModel(members=members, weights=data["weights"])
    raise ValueError(f"unknown model kind {kind!r}")


def load_model(path):
    """Load a model written by :func:`save_model`."""
    with np.load(path, allow_pickle=False) as data:
        return _model_from_arrays({k: data[k] for k in data.files})
