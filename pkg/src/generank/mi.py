"""Discrete mutual information over the byte-columnar layout.

All estimates are plug-in (maximum likelihood) from empirical contingency
counts, reported in bits. No bias correction is applied. Values are clamped
to be non-negative to guard against floating-point cancellation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .columnar import ColumnarMatrix

# sentinel accepted wherever a feature index is expected
LABEL = "label"


@dataclass(frozen=True)
class ContingencyTable:
    """Joint counts of two discrete variables."""

    counts: np.ndarray
    total: int

    @classmethod
    def from_codes(
        cls, x: np.ndarray, y: np.ndarray, card_x: int, card_y: int
    ) -> "ContingencyTable":
        counts = _pair_counts(x, y, card_x, card_y)
        return cls(counts=counts, total=int(counts.sum()))

    def marginal_x(self) -> np.ndarray:
        return self.counts.sum(axis=1)

    def marginal_y(self) -> np.ndarray:
        return self.counts.sum(axis=0)


def _pair_counts(x: np.ndarray, y: np.ndarray, card_x: int, card_y: int) -> np.ndarray:
    joint = x.astype(np.int64) * card_y + y
    return np.bincount(joint, minlength=card_x * card_y).reshape(card_x, card_y)


def mi_from_counts(counts: np.ndarray) -> float:
    """I(X;Y) in bits from a joint count table. Zero cells contribute 0."""
    counts = np.asarray(counts, dtype=np.float64)
    n = counts.sum()
    if n == 0:
        return 0.0
    px = counts.sum(axis=1)
    py = counts.sum(axis=0)
    nz = counts > 0
    c = counts[nz]
    outer = (px[:, None] * py[None, :])[nz]
    mi = float(np.sum((c / n) * np.log2(c * n / outer)))
    return mi if mi > 0.0 else 0.0


def entropy_from_counts(counts: np.ndarray) -> float:
    """Plug-in Shannon entropy in bits from a count vector."""
    counts = np.asarray(counts, dtype=np.float64)
    n = counts.sum()
    if n == 0:
        return 0.0
    p = counts[counts > 0] / n
    h = float(-np.sum(p * np.log2(p)))
    return h if h > 0.0 else 0.0


def _resolve(m: ColumnarMatrix, which) -> tuple[np.ndarray, int]:
    if isinstance(which, str):
        if which != LABEL:
            raise ValueError(f"expected a feature index or '{LABEL}', got '{which}'")
        return m.label_codes, 2
    j = int(which)
    if not 0 <= j < m.n_features:
        raise IndexError(f"feature index {j} out of range for {m.n_features} features")
    return m.column(j), int(m.cardinality[j])


def mutual_information(m: ColumnarMatrix, x, y) -> float:
    """Histogram MI in bits between two columns (feature index or LABEL)."""
    x_codes, card_x = _resolve(m, x)
    y_codes, card_y = _resolve(m, y)
    return mi_from_counts(_pair_counts(x_codes, y_codes, card_x, card_y))


def batch_relevance(m: ColumnarMatrix) -> np.ndarray:
    """MI of every feature with the label, one pass per feature column."""
    labels = m.label_codes
    out = np.empty(m.n_features, dtype=np.float64)
    for j in range(m.n_features):
        counts = _pair_counts(m.column(j), labels, int(m.cardinality[j]), 2)
        out[j] = mi_from_counts(counts)
    return out
