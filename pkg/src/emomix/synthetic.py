"""Synthetic two-domain benchmark with a shared label-generating map.

Both domains draw latent factors from the same distribution and label them
through one shared linear-plus-quadratic map; they differ in domain-specific
label noise and in which nuisance feature block carries variance.  Training
on the union therefore ought to beat training on either domain alone, which
is the effect the evaluation protocol is designed to measure.
"""

import csv

import numpy as np

from ._seeding import rng_for
from .dataset import LabeledDataset


def make_domain_pair(
    seed: int,
    n_per_domain: int = 400,
    n_features: int = 50,
    noise: float = 0.2,
    n_signal: int = 36,
    domain_a: str = "synthA",
    domain_b: str = "synthB",
):
    """Two LabeledDatasets with shared signal columns and disjoint nuisance.

    Feature layout: columns [0, n_signal) hold the shared latent factors,
    the remaining columns split into two equal nuisance blocks, one active
    per domain (standard normal there, zero in the other domain).  The wide
    default signal block keeps a single domain's sample count the binding
    constraint, so models fit on the union measurably beat single-domain
    ones at the default sizes.
    """
    if n_signal >= n_features:
        raise ValueError("need room for nuisance columns")
    rng = rng_for(seed, "synthetic")
    w = rng.normal(size=(2, n_signal))
    q = rng.normal(size=(2, n_signal)) * 0.6

    n_nuis = (n_features - n_signal) // 2
    blocks = {
        domain_a: (n_signal, n_signal + n_nuis),
        domain_b: (n_signal + n_nuis, n_signal + 2 * n_nuis),
    }

    raw = {}
    feats = {}
    for domain in (domain_a, domain_b):
        z = rng.normal(size=(n_per_domain, n_signal))
        X = np.zeros((n_per_domain, n_features))
        X[:, :n_signal] = z
        lo, hi = blocks[domain]
        X[:, lo:hi] = rng.normal(size=(n_per_domain, hi - lo))
        feats[domain] = X
        # centered quadratic term keeps the two halves comparable in scale
        raw[domain] = z @ w.T + (z * z - 1.0) @ q.T

    scale = np.concatenate([raw[domain_a], raw[domain_b]]).std(axis=0)
    out = []
    for domain in (domain_a, domain_b):
        y = raw[domain] / scale + noise * rng.normal(size=(n_per_domain, 2))
        y = np.tanh(0.8 * y)
        ids = tuple(f"{domain}-{i:04d}" for i in range(n_per_domain))
        out.append(
            LabeledDataset(
                domain=domain,
                ids=ids,
                features=feats[domain],
                valence=y[:, 0],
                arousal=y[:, 1],
            )
        )
    return tuple(out)


def export_csvs(ds: LabeledDataset, features_path, labels_path) -> None:
    """Write a dataset as the feature/label CSV pair the loader ingests.

    Labels are written on the [-1, 1] scale, so the matching ingestion
    scale is lo=-1, hi=1.
    """
    names = ds.feature_names or tuple(f"f{j}" for j in range(ds.n_features))
    with open(features_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(("id",) + tuple(names))
        for i, sid in enumerate(ds.ids):
            writer.writerow((sid,) + tuple(repr(float(v)) for v in ds.features[i]))
    with open(labels_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        header = ["id", "valence", "arousal"]
        if ds.category is not None:
            header.append("category")
        writer.writerow(header)
        for i, sid in enumerate(ds.ids):
            row = [sid, repr(float(ds.valence[i])), repr(float(ds.arousal[i]))]
            if ds.category is not None:
                row.append(ds.category[i])
            writer.writerow(row)
