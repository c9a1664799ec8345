import numpy as np
import pytest

from emomix.dataset import (
    LabelScale,
    LabeledDataset,
    exclude_by_category,
    load_dataset,
    load_dataset_npz,
    rescale_label,
    save_dataset_npz,
)
from emomix.errors import (
    DuplicateSampleId,
    LabelOutOfRange,
    MissingFile,
    NoCategoryMetadata,
    NonFiniteFeature,
    SchemaMismatch,
    UnpairedSample,
)

from conftest import build_dataset, write_csv_pair


def test_rescale_endpoints_and_midpoint():
    scale = LabelScale(1.0, 9.0)
    assert rescale_label(1.0, scale) == -1.0
    assert rescale_label(9.0, scale) == 1.0
    assert rescale_label(5.0, scale) == 0.0
    out = rescale_label(np.array([1.0, 3.0, 9.0]), scale)
    assert np.allclose(out, [-1.0, -0.5, 1.0])


def test_rescale_rejects_out_of_range():
    with pytest.raises(LabelOutOfRange):
        rescale_label(9.5, LabelScale(1.0, 9.0))


def test_scale_requires_lo_below_hi():
    with pytest.raises(ValueError):
        LabelScale(2.0, 2.0)


def test_load_pairs_rows_by_id(tmp_path):
    feat = tmp_path / "f.csv"
    lab = tmp_path / "l.csv"
    feat.write_text("id,f0,f1\ns1,1.0,2.0\ns2,3.0,4.0\n")
    # labels listed in the opposite order of the feature file
    lab.write_text("id,valence,arousal\ns2,9,1\ns1,5,5\n")
    ds = load_dataset(feat, lab, "demo", LabelScale(1.0, 9.0))
    assert ds.ids == ("s1", "s2")
    assert np.array_equal(ds.features, [[1.0, 2.0], [3.0, 4.0]])
    assert np.allclose(ds.valence, [0.0, 1.0])
    assert np.allclose(ds.arousal, [0.0, -1.0])
    assert ds.feature_names == ("f0", "f1")
    assert ds.category is None


def test_load_reads_category_column(tmp_path):
    feat = tmp_path / "f.csv"
    lab = tmp_path / "l.csv"
    feat.write_text("id,f0\ns1,1.0\ns2,2.0\n")
    lab.write_text("id,valence,arousal,category\ns1,0,0,music\ns2,1,-1,speech\n")
    ds = load_dataset(feat, lab, "demo", LabelScale(-1.0, 1.0))
    assert ds.category == ("music", "speech")


def test_load_missing_file(tmp_path):
    lab = tmp_path / "l.csv"
    lab.write_text("id,valence,arousal\ns1,0,0\n")
    with pytest.raises(MissingFile):
        load_dataset(tmp_path / "nope.csv", lab, "demo", LabelScale(-1, 1))


def test_load_schema_errors(tmp_path):
    feat = tmp_path / "f.csv"
    lab = tmp_path / "l.csv"
    feat.write_text("sample,f0\ns1,1.0\n")
    lab.write_text("id,valence,arousal\ns1,0,0\n")
    with pytest.raises(SchemaMismatch):
        load_dataset(feat, lab, "demo", LabelScale(-1, 1))

    feat.write_text("id,f0\ns1,1.0\n")
    lab.write_text("id,valence\ns1,0\n")
    with pytest.raises(SchemaMismatch):
        load_dataset(feat, lab, "demo", LabelScale(-1, 1))

    lab.write_text("id,valence,arousal,mood\ns1,0,0,calm\n")
    with pytest.raises(SchemaMismatch):
        load_dataset(feat, lab, "demo", LabelScale(-1, 1))


def test_load_duplicate_and_unpaired_ids(tmp_path):
    feat = tmp_path / "f.csv"
    lab = tmp_path / "l.csv"
    feat.write_text("id,f0\ns1,1.0\ns1,2.0\n")
    lab.write_text("id,valence,arousal\ns1,0,0\n")
    with pytest.raises(DuplicateSampleId):
        load_dataset(feat, lab, "demo", LabelScale(-1, 1))

    feat.write_text("id,f0\ns1,1.0\ns2,2.0\n")
    with pytest.raises(UnpairedSample):
        load_dataset(feat, lab, "demo", LabelScale(-1, 1))


def test_load_rejects_bad_feature_values(tmp_path):
    feat = tmp_path / "f.csv"
    lab = tmp_path / "l.csv"
    lab.write_text("id,valence,arousal\ns1,0,0\ns2,0,0\n")
    feat.write_text("id,f0,f1\ns1,1.0,nan\ns2,1.0,2.0\n")
    with pytest.raises(NonFiniteFeature) as err:
        load_dataset(feat, lab, "demo", LabelScale(-1, 1))
    assert "s1" in str(err.value) and "f1" in str(err.value)

    feat.write_text("id,f0,f1\ns1,1.0,loud\ns2,1.0,2.0\n")
    with pytest.raises(SchemaMismatch):
        load_dataset(feat, lab, "demo", LabelScale(-1, 1))


def test_load_rejects_label_out_of_scale(tmp_path):
    feat = tmp_path / "f.csv"
    lab = tmp_path / "l.csv"
    feat.write_text("id,f0\ns1,1.0\n")
    lab.write_text("id,valence,arousal\ns1,9.5,5\n")
    with pytest.raises(LabelOutOfRange):
        load_dataset(feat, lab, "demo", LabelScale(1, 9))


def test_csv_round_trip_is_exact(tmp_path):
    ds = build_dataset(n=12, m=3, seed=5)
    feat, lab = write_csv_pair(tmp_path, ds, raw_scale=(-1.0, 1.0))
    back = load_dataset(feat, lab, ds.domain, LabelScale(-1.0, 1.0))
    assert back.ids == ds.ids
    assert np.array_equal(back.features, ds.features)
    assert np.array_equal(back.valence, ds.valence)
    assert np.array_equal(back.arousal, ds.arousal)


def test_dataset_arrays_are_read_only():
    ds = build_dataset(n=6)
    for arr in (ds.features, ds.valence, ds.arousal):
        with pytest.raises(ValueError):
            arr[0] = 0


def test_dataset_validates_construction():
    with pytest.raises(DuplicateSampleId):
        LabeledDataset("d", ("a", "a"), np.zeros((2, 1)), [0.0, 0.0], [0.0, 0.0])
    with pytest.raises(ValueError):
        LabeledDataset("d", ("a", "b"), np.zeros((2, 1)), [0.0, 2.0], [0.0, 0.0])
    with pytest.raises(ValueError):
        LabeledDataset("d", ("a", "b"), np.zeros((3, 1)), [0.0, 0.0], [0.0, 0.0])


def test_subset_and_labels_accessors():
    ds = build_dataset(n=10, m=3)
    sub = ds.subset([4, 1, 7])
    assert sub.ids == (ds.ids[4], ds.ids[1], ds.ids[7])
    assert np.array_equal(sub.features, ds.features[[4, 1, 7]])
    assert np.array_equal(ds.labels(), np.column_stack([ds.valence, ds.arousal]))
    assert np.array_equal(ds.target("valence"), ds.valence)
    with pytest.raises(KeyError):
        ds.target("dominance")


def test_with_labels_revalidates():
    ds = build_dataset(n=4)
    swapped = ds.with_labels(ds.arousal, ds.valence)
    assert np.array_equal(swapped.valence, ds.arousal)
    with pytest.raises(ValueError):
        ds.with_labels(np.full(4, 2.0), ds.arousal)


def test_exclude_by_category():
    ds = build_dataset(n=9, category=("music", "speech", "noise"))
    kept = exclude_by_category(ds, "speech")
    assert len(kept) == 6
    assert all(c != "speech" for c in kept.category)
    plain = build_dataset(n=4)
    with pytest.raises(NoCategoryMetadata):
        exclude_by_category(plain, "speech")


def test_npz_round_trip(tmp_path):
    for cats in (None, ("music", "speech")):
        ds = build_dataset(n=8, m=3, seed=2, category=cats)
        path = tmp_path / f"ds_{bool(cats)}.npz"
        save_dataset_npz(ds, path)
        back = load_dataset_npz(path)
        assert back.domain == ds.domain
        assert back.ids == ds.ids
        assert np.array_equal(back.features, ds.features)
        assert np.array_equal(back.valence, ds.valence)
        assert np.array_equal(back.arousal, ds.arousal)
        assert back.category == ds.category
        assert back.feature_names == ds.feature_names
    with pytest.raises(MissingFile):
        load_dataset_npz(tmp_path / "absent.npz")
