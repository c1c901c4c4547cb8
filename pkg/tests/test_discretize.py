import numpy as np
import pytest

from conftest import make_dataset, random_labels
from generank import CategoryEncoder, discretize
from generank.columnar import ColumnarMatrix, _equal_frequency_levels


def test_binary_feature_passes_through():
    labels = np.array([1, 0, 1, 0], dtype=np.uint8)
    ds = make_dataset(np.array([[0], [1], [1], [0]]), labels)
    m = discretize(ds)
    assert m.cardinality[0] == 2
    assert m.codes[:, 0].tolist() == [0, 1, 1, 0]


def test_constant_feature_collapses_to_single_code():
    labels = np.array([1, 0, 1, 0], dtype=np.uint8)
    ds = make_dataset(np.zeros((4, 1), dtype=np.uint8), labels)
    m = discretize(ds)
    assert m.cardinality[0] == 1
    assert np.all(m.codes[:, 0] == 0)


def test_rank_dense_mapping():
    # values 3,7,7,9 map to 0,1,1,2 with cardinality 3
    labels = np.array([1, 0, 1, 0], dtype=np.uint8)
    ds = make_dataset(np.array([[3], [7], [7], [9]]), labels)
    m = discretize(ds, max_levels=256)
    assert m.codes[:, 0].tolist() == [0, 1, 1, 2]
    assert m.cardinality[0] == 3


def test_rediscretizing_dense_codes_is_identity():
    rng = np.random.default_rng(21)
    codes = rng.integers(0, 5, size=(40, 6)).astype(np.uint8)
    for j in range(6):  # force dense coding: every value below the max occurs
        codes[:5, j] = np.arange(5)
    labels = random_labels(rng, 40)
    ds = make_dataset(codes, labels)
    m = discretize(ds)
    assert np.array_equal(m.codes, codes)
    m2 = discretize(make_dataset(m.codes, labels))
    assert np.array_equal(m2.codes, m.codes)


def test_cardinality_equals_distinct_count_when_small():
    rng = np.random.default_rng(22)
    values = rng.integers(0, 30, size=(100, 8))
    ds = make_dataset(values.astype(np.uint8), random_labels(rng, 100))
    m = discretize(ds, max_levels=256)
    for j in range(8):
        assert m.cardinality[j] == len(np.unique(values[:, j]))


def test_contingency_counts_survive_discretization():
    # the (value, label) joint determines the (code, label) joint
    rng = np.random.default_rng(23)
    values = rng.choice([0, 3, 9, 200], size=(60, 4))
    labels = random_labels(rng, 60)
    ds = make_dataset(values.astype(np.uint8), labels)
    m = discretize(ds)
    for j in range(4):
        distinct = np.unique(values[:, j])
        for code, value in enumerate(distinct):
            for lab in (0, 1):
                raw_count = np.sum((values[:, j] == value) & (labels == lab))
                code_count = np.sum((m.codes[:, j] == code) & (labels == lab))
                assert raw_count == code_count


def test_equal_frequency_binning_caps_cardinality():
    rng = np.random.default_rng(24)
    col = rng.permutation(256).astype(np.int64).repeat(2)
    levels = _equal_frequency_levels(col, 8)
    assert 1 <= len(levels) <= 8
    codes = np.searchsorted(levels, col, side="right") - 1
    # bins are within a factor of the ideal equal-frequency size
    counts = np.bincount(codes)
    assert counts.min() >= 1
    assert counts.max() <= 2 * (len(col) // 8 + 1)


def test_equal_frequency_keeps_ties_together():
    col = np.array([5] * 50 + [9] * 3 + list(range(10, 60)), dtype=np.int64)
    encoder = CategoryEncoder(max_levels=4).fit(col.reshape(-1, 1))
    codes = encoder.transform(col.reshape(-1, 1))[:, 0]
    assert len(set(codes[:50].tolist())) == 1  # all 5s share a bin
    assert encoder.cardinality_[0] <= 4


def test_monotone_mapping():
    rng = np.random.default_rng(25)
    col = rng.integers(0, 200, size=300)
    encoder = CategoryEncoder(max_levels=6).fit(col.reshape(-1, 1))
    codes = encoder.transform(col.reshape(-1, 1))[:, 0]
    order = np.argsort(col, kind="mergesort")
    assert np.all(np.diff(codes[order].astype(np.int64)) >= 0)


def test_transform_handles_unseen_values():
    encoder = CategoryEncoder().fit(np.array([[2], [5], [9]]))
    out = encoder.transform(np.array([[0], [2], [4], [5], [7], [9], [200]]))
    assert out[:, 0].tolist() == [0, 0, 0, 1, 1, 2, 2]


def test_transform_rejects_wrong_width():
    encoder = CategoryEncoder().fit(np.zeros((4, 3), dtype=np.int64))
    with pytest.raises(ValueError, match="3"):
        encoder.transform(np.zeros((4, 2), dtype=np.int64))


@pytest.mark.parametrize("bad", [1, 0, 257, 1000])
def test_max_levels_bounds(bad):
    with pytest.raises(ValueError, match="max_levels"):
        CategoryEncoder(max_levels=bad).fit(np.zeros((4, 1), dtype=np.int64))


def test_codes_stored_feature_major():
    rng = np.random.default_rng(26)
    ds = make_dataset(rng.integers(0, 2, (30, 5)).astype(np.uint8), random_labels(rng, 30))
    m = discretize(ds)
    assert m.codes.flags.f_contiguous
    assert m.column(2).flags.c_contiguous  # a column view is contiguous bytes


def test_columnar_matrix_invariants():
    labels = np.array([1, 0], dtype=np.uint8)
    codes = np.array([[0, 1], [1, 0]], dtype=np.uint8)
    with pytest.raises(ValueError, match="cardinality"):
        ColumnarMatrix(codes, np.array([2, 1]), labels)  # code 1 under cardinality 1
    with pytest.raises(ValueError):
        ColumnarMatrix(codes, np.array([2, 2]), np.array([1, 1], dtype=np.uint8))
    m = ColumnarMatrix(codes, np.array([2, 2]), labels)
    assert m.n_genes == 2 and m.n_features == 2
