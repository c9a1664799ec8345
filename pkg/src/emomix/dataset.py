"""Loading, validation and label normalization for sound-emotion datasets.

A dataset is ingested from two delimited text files: a feature CSV
(header row, first column ``id``, remaining columns numeric) and a labels
CSV (header ``id,valence,arousal`` with an optional ``category`` column).
Rows are paired by sample id, not by file order.  Raw valence/arousal
annotations are rescaled from their source range to the canonical
``[-1, 1]`` interval shared by every dataset in an experiment.
"""

from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
import pandas as pd

from .errors import (
    DuplicateSampleId,
    LabelOutOfRange,
    MissingFile,
    NoCategoryMetadata,
    NonFiniteFeature,
    SchemaMismatch,
    UnpairedSample,
)

LABEL_COLUMNS = ("id", "valence", "arousal")


@dataclass(frozen=True)
class LabelScale:
    """Source annotation range, e.g. the endpoints of a SAM rating scale."""

    lo: float
    hi: float

    def __post_init__(self):
        if not (self.lo < self.hi):
            raise ValueError(f"label scale requires lo < hi, got [{self.lo}, {self.hi}]")


def rescale_label(raw, scale: LabelScale):
    """Affine map from ``[scale.lo, scale.hi]`` onto ``[-1, 1]``.

    Accepts scalars or arrays; raises :class:`LabelOutOfRange` if any raw
    value falls outside the source range.
    """
    raw = np.asarray(raw, dtype=np.float64)
    if np.any(raw < scale.lo) or np.any(raw > scale.hi):
        bad = raw[(raw < scale.lo) | (raw > scale.hi)]
        raise LabelOutOfRange(
            f"raw label(s) {np.atleast_1d(bad)[:5].tolist()} outside [{scale.lo}, {scale.hi}]"
        )
    if scale.lo == -1.0 and scale.hi == 1.0:
        # already canonical; skip the affine map so values pass through exactly
        out = raw.copy()
    else:
        out = 2.0 * (raw - scale.lo) / (scale.hi - scale.lo) - 1.0
    if out.ndim == 0:
        return float(out)
    return out


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class LabeledDataset:
    """Immutable feature matrix with per-sample valence/arousal in [-1, 1].

    Attributes
    ----------
    domain : str
        Domain tag, e.g. ``"iads-e"`` or ``"pmemo"``.
    ids : tuple of str
        Sample ids, unique, aligned with the rows of ``features``.
    features : ndarray of shape (n_samples, n_features)
        Dense float64 matrix; read-only.
    valence, arousal : ndarray of shape (n_samples,)
        Labels in [-1, 1]; read-only.
    category : tuple of str or None
        Optional per-sample semantic class.
    """

    domain: str
    ids: tuple
    features: np.ndarray
    valence: np.ndarray
    arousal: np.ndarray
    category: Optional[tuple] = None
    feature_names: tuple = field(default=(), repr=False)

    def __post_init__(self):
        object.__setattr__(self, "ids", tuple(self.ids))
        object.__setattr__(self, "features", _frozen(np.asarray(self.features, dtype=np.float64)))
        object.__setattr__(self, "valence", _frozen(np.asarray(self.valence, dtype=np.float64)))
        object.__setattr__(self, "arousal", _frozen(np.asarray(self.arousal, dtype=np.float64)))
        if self.category is not None:
            object.__setattr__(self, "category", tuple(self.category))
        object.__setattr__(self, "feature_names", tuple(self.feature_names))
        n = len(self.ids)
        if self.features.ndim != 2 or self.features.shape[0] != n:
            raise ValueError(f"feature matrix has {self.features.shape[0]} rows for {n} ids")
        if self.valence.shape != (n,) or self.arousal.shape != (n,):
            raise ValueError("label vectors must match the number of ids")
        if self.category is not None and len(self.category) != n:
            raise ValueError("category metadata must match the number of ids")
        if len(set(self.ids)) != n:
            seen = set()
            dupes = set()
            for i in self.ids:
                if i in seen:
                    dupes.add(i)
                seen.add(i)
            raise DuplicateSampleId(sorted(dupes))
        for name, arr in (("valence", self.valence), ("arousal", self.arousal)):
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"non-finite {name} label")
            if np.any(arr < -1.0) or np.any(arr > 1.0):
                raise ValueError(f"{name} labels must lie in [-1, 1]")

    def __len__(self):
        return len(self.ids)

    @property
    def n_features(self):
        return self.features.shape[1]

    def labels(self) -> np.ndarray:
        """(n, 2) matrix of (valence, arousal) pairs."""
        return np.column_stack([self.valence, self.arousal])

    def target(self, name: str) -> np.ndarray:
        if name == "valence":
            return self.valence
        if name == "arousal":
            return self.arousal
        raise KeyError(f"unknown target {name!r}")

    def subset(self, indices) -> "LabeledDataset":
        """Dataset restricted to the given row indices (order as given)."""
        idx = np.asarray(indices, dtype=np.intp)
        return LabeledDataset(
            domain=self.domain,
            ids=tuple(self.ids[i] for i in idx),
            features=self.features[idx],
            valence=self.valence[idx],
            arousal=self.arousal[idx],
            category=None if self.category is None else tuple(self.category[i] for i in idx),
            feature_names=self.feature_names,
        )

    def with_labels(self, valence, arousal) -> "LabeledDataset":
        """Copy with replaced labels; features and ids untouched."""
        return LabeledDataset(
            domain=self.domain,
            ids=self.ids,
            features=self.features,
            valence=valence,
            arousal=arousal,
            category=self.category,
            feature_names=self.feature_names,
        )


def _read_csv(path, what):
    path = Path(path)
    if not path.exists():
        raise MissingFile(f"{what} file not found: {path}")
    try:
        # round_trip parsing keeps re-ingested exports bit-identical
        return pd.read_csv(
            path, dtype={"id": str}, encoding="utf-8", float_precision="round_trip"
        )
    except (pd.errors.ParserError, pd.errors.EmptyDataError, ValueError) as exc:
        raise SchemaMismatch(f"{what} file {path}: {exc}") from exc


def load_dataset(features_path, labels_path, domain: str, scale: LabelScale) -> LabeledDataset:
    """Load and validate one domain from a feature CSV and a labels CSV.

    Samples are paired by id; row order of the returned dataset follows the
    feature file.  Raw labels are rescaled to [-1, 1] via ``scale``.

    Raises
    ------
    MissingFile, SchemaMismatch, DuplicateSampleId, UnpairedSample,
    NonFiniteFeature, LabelOutOfRange
    """
    feats = _read_csv(features_path, "feature")
    labels = _read_csv(labels_path, "labels")

    if len(feats.columns) < 2 or feats.columns[0] != "id":
        raise SchemaMismatch(
            f"feature file must have first column 'id' plus numeric columns, got {list(feats.columns[:3])}..."
        )
    expected = set(LABEL_COLUMNS)
    got = set(labels.columns)
    if not expected.issubset(got):
        raise SchemaMismatch(f"labels file missing columns {sorted(expected - got)}")
    extra = got - expected - {"category"}
    if extra:
        raise SchemaMismatch(f"labels file has unexpected columns {sorted(extra)}")

    for frame, what in ((feats, "feature"), (labels, "labels")):
        counts = frame["id"].value_counts()
        dupes = counts[counts > 1]
        if len(dupes):
            raise DuplicateSampleId(sorted(dupes.index.tolist()))

    feat_ids = set(feats["id"])
    label_ids = set(labels["id"])
    if feat_ids != label_ids:
        raise UnpairedSample(sorted(feat_ids.symmetric_difference(label_ids)))

    feature_names = tuple(feats.columns[1:])
    try:
        matrix = feats[list(feature_names)].to_numpy(dtype=np.float64)
    except (TypeError, ValueError) as exc:
        raise SchemaMismatch(f"non-numeric feature value: {exc}") from exc
    bad = ~np.isfinite(matrix)
    if bad.any():
        r, c = np.argwhere(bad)[0]
        raise NonFiniteFeature(feats["id"].iloc[int(r)], feature_names[int(c)])

    labels = labels.set_index("id").loc[list(feats["id"])]
    for col in ("valence", "arousal"):
        vals = labels[col].to_numpy()
        try:
            vals = vals.astype(np.float64)
        except (TypeError, ValueError) as exc:
            raise SchemaMismatch(f"non-numeric {col} label: {exc}") from exc
        if not np.all(np.isfinite(vals)):
            raise SchemaMismatch(f"non-finite {col} label")

    valence = rescale_label(labels["valence"].to_numpy(dtype=np.float64), scale)
    arousal = rescale_label(labels["arousal"].to_numpy(dtype=np.float64), scale)
    category = None
    if "category" in labels.columns:
        category = tuple(str(c) for c in labels["category"])

    return LabeledDataset(
        domain=domain,
        ids=tuple(feats["id"]),
        features=matrix,
        valence=valence,
        arousal=arousal,
        category=category,
        feature_names=feature_names,
    )


def exclude_by_category(ds: LabeledDataset, category: str) -> LabeledDataset:
    """Drop every sample tagged with ``category``, preserving order."""
    if ds.category is None:
        raise NoCategoryMetadata(f"dataset {ds.domain!r} carries no category metadata")
    keep = [i for i, c in enumerate(ds.category) if c != category]
    return ds.subset(keep)


def save_dataset_npz(ds: LabeledDataset, path) -> None:
    """Persist a validated dataset as a single .npz archive."""
    payload = {
        "domain": np.array(ds.domain),
        "ids": np.array(ds.ids),
        "features": ds.features,
        "valence": ds.valence,
        "arousal": ds.arousal,
        "feature_names": np.array(ds.feature_names),
        "has_category": np.array(ds.category is not None),
    }
    if ds.category is not None:
        payload["category"] = np.array(ds.category)
    np.savez(path, **payload)


def load_dataset_npz(path) -> LabeledDataset:
    """Load a dataset written by :func:`save_dataset_npz`."""
    path = Path(path)
    if not path.exists():
        raise MissingFile(str(path))
    with np.load(path, allow_pickle=False) as data:
        category = tuple(str(c) for c in data["category"]) if bool(data["has_category"]) else None
        return LabeledDataset(
            domain=str(data["domain"]),
            ids=tuple(str(i) for i in data["ids"]),
            features=data["features"],
            valence=data["valence"],
            arousal=data["arousal"],
            category=category,
            feature_names=tuple(str(n) for n in data["feature_names"]),
        )
