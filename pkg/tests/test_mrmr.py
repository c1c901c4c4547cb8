import numpy as np
import pytest
from sklearn.base import clone
from sklearn.pipeline import Pipeline

from conftest import naive_mrmr, random_columnar
from generank import (
    BalancedRandomForest,
    FastMrmrSelector,
    LABEL,
    mutual_information,
    select,
    threshold_to_k,
)
from generank.columnar import ColumnarMatrix


def columns_to_matrix(cols, labels):
    codes = np.asfortranarray(np.array(cols, dtype=np.uint8).T)
    cards = codes.max(axis=0).astype(np.int64) + 1
    return ColumnarMatrix(codes, np.maximum(cards, 1), np.array(labels, dtype=np.uint8))


def near_label_duplicate_matrix():
    """Feature 0 is the label with two flips, feature 1 copies feature 0,
    feature 2 is exactly independent of both the label and feature 0."""
    labels = np.array([0] * 8 + [1] * 8, dtype=np.uint8)
    a = labels.copy()
    a[7] = 1
    a[15] = 0
    b = a.copy()
    c = np.arange(16) % 2
    return columns_to_matrix([a, b, c], labels)


def test_k1_is_max_relevance_lowest_index():
    m = near_label_duplicate_matrix()
    result = select(m, k=1)
    # features 0 and 1 tie on relevance; the lower index wins
    assert result.selected.tolist() == [0]
    assert result.mean_redundancy[0] == 0.0
    assert result.criterion[0] == result.relevance[0]


def test_redundant_copy_loses_to_independent_noise():
    m = near_label_duplicate_matrix()
    # sanity: construction gives the copy negative criterion, the noise zero
    assert mutual_information(m, 2, LABEL) == 0.0
    assert mutual_information(m, 2, 0) == 0.0
    result = select(m, k=2)
    assert result.selected.tolist() == [0, 2]
    assert result.selected.tolist() == naive_mrmr(m, 2)
    assert result.criterion[1] == 0.0


def test_matches_naive_selector_on_random_instances():
    rng = np.random.default_rng(31)
    for _ in range(15):
        n = int(rng.integers(10, 60))
        f = int(rng.integers(2, 20))
        k = int(rng.integers(1, min(10, f) + 1))
        m = random_columnar(rng, n, f)
        assert select(m, k=k).selected.tolist() == naive_mrmr(m, k)


def test_accumulated_redundancy_matches_recomputation():
    rng = np.random.default_rng(32)
    m = random_columnar(rng, 40, 12)
    result = select(m, k=6, collect_trace=True)
    assert len(result.trace) == 6
    for t in range(1, 6):
        chosen = result.selected[:t]
        for f in range(m.n_features):
            if f in chosen:
                continue
            direct = sum(mutual_information(m, f, int(s)) for s in chosen)
            assert result.trace[t][f] == pytest.approx(direct, abs=1e-9)


def test_prefix_property():
    rng = np.random.default_rng(33)
    m = random_columnar(rng, 50, 15)
    full = select(m, k=10).selected.tolist()
    for j in (1, 3, 7, 10):
        assert select(m, k=j).selected.tolist() == full[:j]


def test_scores_are_consistent():
    rng = np.random.default_rng(34)
    m = random_columnar(rng, 40, 10)
    result = select(m, k=5)
    assert len(set(result.selected.tolist())) == 5
    for i in range(5):
        assert result.criterion[i] == result.relevance[i] - result.mean_redundancy[i]


def test_truncation_flag():
    rng = np.random.default_rng(35)
    m = random_columnar(rng, 20, 4)
    result = select(m, k=10)
    assert result.truncated
    assert result.requested_k == 10
    assert len(result) == 4
    assert not select(m, k=4).truncated


def test_selection_never_stops_early():
    # zero-relevance features still get picked when k demands it
    labels = np.array([1, 0, 1, 0, 1, 0], dtype=np.uint8)
    m = columns_to_matrix(
        [labels, np.zeros(6, dtype=np.uint8), [0, 0, 0, 1, 1, 1]], labels
    )
    result = select(m, k=3)
    assert sorted(result.selected.tolist()) == [0, 1, 2]


def test_fraction_argument():
    rng = np.random.default_rng(36)
    m = random_columnar(rng, 30, 40)
    result = select(m, fraction=0.1)
    assert len(result) == 4
    with pytest.raises(ValueError):
        select(m)
    with pytest.raises(ValueError):
        select(m, k=2, fraction=0.5)


def test_threshold_to_k_reference_values():
    assert threshold_to_k(0.05, 8640) == 432
    assert threshold_to_k(0.25, 1640) == 410
    assert threshold_to_k(1.0, 7) == 7
    assert threshold_to_k(0.001, 10) == 1  # floor of 1
    assert threshold_to_k(0.1, 55) == 6  # ceil(5.5)
    with pytest.raises(ValueError):
        threshold_to_k(0.0, 10)
    with pytest.raises(ValueError):
        threshold_to_k(1.5, 10)


def test_export_lines_format():
    m = near_label_duplicate_matrix()
    result = select(m, k=2)
    lines = result.export_lines(["alpha", "beta", "gamma"])
    assert len(lines) == 2
    name, rel, red, crit = lines[0].split("\t")
    assert name == "alpha"
    assert float(crit) == pytest.approx(float(rel) - float(red), abs=1e-6)


def test_estimator_fit_transform():
    rng = np.random.default_rng(37)
    X = rng.integers(0, 2, size=(40, 12))
    y = rng.integers(0, 2, size=40)
    y[:2] = [0, 1]
    X[:, 3] = y  # perfectly relevant column
    selector = FastMrmrSelector(k=4).fit(X, y)
    assert selector.selected_[0] == 3
    reduced = selector.transform(X)
    assert reduced.shape == (40, 4)
    assert np.array_equal(reduced[:, 0], X[:, 3])
    cloned = clone(selector)
    assert cloned.get_params()["k"] == 4


def test_estimator_in_pipeline():
    rng = np.random.default_rng(38)
    X = rng.integers(0, 2, size=(60, 15))
    y = rng.integers(0, 2, size=60)
    y[:2] = [0, 1]
    X[:, 5] = y
    pipe = Pipeline(
        [
            ("fs", FastMrmrSelector(fraction=0.2)),
            ("clf", BalancedRandomForest(n_estimators=10, random_state=1)),
        ]
    )
    pipe.fit(X, y)
    proba = pipe.predict_proba(X)
    assert proba.shape == (60, 2)
    assert np.all((proba >= 0) & (proba <= 1))
