"""Feature-major byte matrix and categorical discretization.

The selection hot path reads whole feature columns, so codes are stored in
Fortran (column-major) order: the byte buffer holds all values of feature 0,
then feature 1, and so on.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from ._validation import check_code_matrix, check_feature_values, check_labels
from .dataset import Dataset


@dataclass(frozen=True)
class ColumnarMatrix:
    """Discretized feature-major byte matrix plus label codes.

    codes[:, j] is a contiguous uint8 view of feature j with values in
    0..cardinality[j]-1. label_codes holds 1 for positives, 0 for unlabeled,
    and always contains both.
    """

    codes: np.ndarray
    cardinality: np.ndarray
    label_codes: np.ndarray

    def __post_init__(self):
        codes = check_code_matrix(self.codes, name="codes")
        card = np.asarray(self.cardinality, dtype=np.int64)
        labels = check_labels(self.label_codes)
        if card.shape != (codes.shape[1],):
            raise ValueError(
                f"cardinality has shape {card.shape}, expected ({codes.shape[1]},)"
            )
        if (card < 1).any():
            raise ValueError("every feature needs cardinality >= 1")
        if labels.shape[0] != codes.shape[0]:
            raise ValueError(
                f"{labels.shape[0]} labels for {codes.shape[0]} matrix rows"
            )
        col_max = codes.max(axis=0).astype(np.int64)
        if (col_max >= card).any():
            j = int(np.flatnonzero(col_max >= card)[0])
            raise ValueError(
                f"feature {j} holds code {col_max[j]} but cardinality is {card[j]}"
            )
        codes.setflags(write=False)
        card.setflags(write=False)
        labels.setflags(write=False)
        object.__setattr__(self, "codes", codes)
        object.__setattr__(self, "cardinality", card)
        object.__setattr__(self, "label_codes", labels)

    @property
    def n_genes(self) -> int:
        return self.codes.shape[0]

    @property
    def n_features(self) -> int:
        return self.codes.shape[1]

    def column(self, j: int) -> np.ndarray:
        return self.codes[:, j]


class CategoryEncoder(BaseEstimator, TransformerMixin):
    """Map integer feature columns to dense category codes 0..cardinality-1.

    Distinct values are ranked in ascending order; a feature with more than
    `max_levels` distinct values is first reduced by equal-frequency binning
    (equal raw values always share a bin, so bins can be unequal). Transform
    maps values unseen during fit onto the nearest lower learned level.

    Parameters
    ----------
    max_levels : int, default 256
        Upper bound on per-feature cardinality, between 2 and 256.
    """

    def __init__(self, max_levels: int = 256):
        self.max_levels = max_levels

    def fit(self, X, y=None):
        if not 2 <= self.max_levels <= 256:
            raise ValueError(f"max_levels must be in 2..256, got {self.max_levels}")
        X = check_feature_values(X)
        levels = []
        for j in range(X.shape[1]):
            col = X[:, j]
            distinct = np.unique(col)
            if len(distinct) > self.max_levels:
                distinct = _equal_frequency_levels(col, self.max_levels)
            levels.append(distinct)
        self.levels_ = levels
        self.cardinality_ = np.array([len(lv) for lv in levels], dtype=np.int64)
        self.n_features_in_ = X.shape[1]
        return self

    def transform(self, X) -> np.ndarray:
        X = check_feature_values(X)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(
                f"X has {X.shape[1]} features, encoder was fit on {self.n_features_in_}"
            )
        out = np.empty(X.shape, dtype=np.uint8, order="F")
        for j, lv in enumerate(self.levels_):
            code = np.searchsorted(lv, X[:, j], side="right") - 1
            np.clip(code, 0, len(lv) - 1, out=code)
            out[:, j] = code
        return out


def _equal_frequency_levels(col: np.ndarray, max_levels: int) -> np.ndarray:
    """Representative values (bin minima) for equal-frequency binning."""
    svals = np.sort(col)
    n = len(svals)
    positions = (np.arange(1, max_levels) * n) // max_levels
    edges = np.unique(svals[positions])
    bins = np.searchsorted(edges, svals, side="right")
    first_of_bin = np.r_[True, bins[1:] != bins[:-1]]
    return svals[first_of_bin]


def discretize(dataset: Dataset, max_levels: int = 256) -> ColumnarMatrix:
    """Discretize a dataset into the feature-major byte layout."""
    encoder = CategoryEncoder(max_levels=max_levels).fit(dataset.features)
    codes = encoder.transform(dataset.features)
    return ColumnarMatrix(codes, encoder.cardinality_, dataset.labels)
