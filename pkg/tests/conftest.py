import numpy as np
import pytest

from emomix.dataset import LabeledDataset


def build_dataset(domain="demo", n=30, m=4, seed=0, category=None):
    """Small deterministic dataset with learnable labels."""
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(n, m))
    w = rng.normal(size=(m, 2))
    y = np.tanh(0.5 * X @ w + 0.1 * rng.normal(size=(n, 2)))
    cats = None
    if category:
        cats = tuple(category[i % len(category)] for i in range(n))
    return LabeledDataset(
        domain=domain,
        ids=tuple(f"{domain}-{i:03d}" for i in range(n)),
        features=X,
        valence=y[:, 0],
        arousal=y[:, 1],
        category=cats,
        feature_names=tuple(f"f{j}" for j in range(m)),
    )


@pytest.fixture
def dataset_factory():
    return build_dataset


def write_csv_pair(directory, ds, raw_scale=(-1.0, 1.0)):
    """Feature/labels CSV pair for a dataset, labels mapped to raw_scale."""
    lo, hi = raw_scale
    feat = directory / f"{ds.domain}_features.csv"
    lab = directory / f"{ds.domain}_labels.csv"
    names = ds.feature_names or tuple(f"f{j}" for j in range(ds.n_features))
    rows = ["id," + ",".join(names)]
    for i, sid in enumerate(ds.ids):
        rows.append(sid + "," + ",".join(repr(float(v)) for v in ds.features[i]))
    feat.write_text("\n".join(rows) + "\n")

    header = "id,valence,arousal" + (",category" if ds.category else "")
    rows = [header]
    identity = (lo, hi) == (-1.0, 1.0)
    for i, sid in enumerate(ds.ids):
        if identity:
            v, a = ds.valence[i], ds.arousal[i]
        else:
            v = lo + (ds.valence[i] + 1.0) * (hi - lo) / 2.0
            a = lo + (ds.arousal[i] + 1.0) * (hi - lo) / 2.0
        cells = [sid, repr(float(v)), repr(float(a))]
        if ds.category:
            cells.append(ds.category[i])
        rows.append(",".join(cells))
    lab.write_text("\n".join(rows) + "\n")
    return feat, lab
