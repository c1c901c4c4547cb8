"""Greedy minimum-redundancy maximum-relevance feature selection.

Uses the difference criterion: pick the unselected feature maximizing
relevance(f) - mean_{s in S} I(f; s). Redundancy is held as a per-candidate
running sum updated with I(candidate; last pick) once per iteration, so each
greedy step costs one MI evaluation per remaining candidate instead of |S|.
The running sum adds terms in pick order, which makes the result bitwise
equal to a naive selector that recomputes the sum from scratch in the same
order. Ties always break toward the lowest feature index.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from ._validation import check_consistent_length, check_feature_values, check_labels
from .columnar import CategoryEncoder, ColumnarMatrix
from .mi import _pair_counts, batch_relevance, mi_from_counts


@dataclass(frozen=True)
class SelectionResult:
    """Ordered picks with per-pick scores.

    relevance, mean_redundancy and criterion are aligned with `selected`;
    criterion = relevance - mean_redundancy for every pick and the first
    pick always has mean_redundancy 0. `truncated` flags a request for more
    features than the matrix holds. `trace`, when collected, holds a copy
    of the accumulated redundancy sums as they stood at each pick.
    """

    selected: np.ndarray
    relevance: np.ndarray
    mean_redundancy: np.ndarray
    criterion: np.ndarray
    requested_k: int
    truncated: bool
    trace: tuple[np.ndarray, ...] | None = None

    def __len__(self) -> int:
        return len(self.selected)

    def export_lines(self, feature_names) -> list[str]:
        """One `name<TAB>relevance<TAB>mean_redundancy<TAB>criterion` per pick."""
        lines = []
        for i, j in enumerate(self.selected):
            lines.append(
                f"{feature_names[j]}\t{self.relevance[i]:.6f}"
                f"\t{self.mean_redundancy[i]:.6f}\t{self.criterion[i]:.6f}"
            )
        return lines


def threshold_to_k(fraction: float, n_features: int) -> int:
    """Feature count kept by a fractional threshold: ceil, minimum 1.

    The product is rounded to 9 decimals before the ceiling so that binary
    float representation (0.05 * 8640 = 432.0000000000001) cannot inflate
    the count.
    """
    if not 0.0 < fraction <= 1.0:
        raise ValueError(f"fraction must be in (0, 1], got {fraction}")
    if n_features < 1:
        raise ValueError(f"n_features must be >= 1, got {n_features}")
    return max(1, math.ceil(round(fraction * n_features, 9)))


def select(
    m: ColumnarMatrix,
    k: int | None = None,
    fraction: float | None = None,
    *,
    collect_trace: bool = False,
) -> SelectionResult:
    """Greedy mRMR selection of k features (or a fraction of them).

    Exactly one of `k` and `fraction` must be given. Requests larger than
    the number of features are truncated and flagged.
    """
    if (k is None) == (fraction is None):
        raise ValueError("exactly one of k and fraction must be set")
    if fraction is not None:
        k = threshold_to_k(fraction, m.n_features)
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")

    n_features = m.n_features
    truncated = k > n_features
    k_eff = min(k, n_features)

    relevance = batch_relevance(m)
    red_sum = np.zeros(n_features, dtype=np.float64)
    available = np.ones(n_features, dtype=bool)

    selected = np.empty(k_eff, dtype=np.int64)
    pick_rel = np.empty(k_eff, dtype=np.float64)
    pick_red = np.empty(k_eff, dtype=np.float64)
    pick_crit = np.empty(k_eff, dtype=np.float64)
    trace: list[np.ndarray] | None = [] if collect_trace else None

    # first pick: pure relevance, np.argmax takes the lowest index on ties
    j = int(np.argmax(relevance))
    selected[0] = j
    pick_rel[0] = relevance[j]
    pick_red[0] = 0.0
    pick_crit[0] = relevance[j]
    available[j] = False
    if trace is not None:
        trace.append(red_sum.copy())

    cards = m.cardinality
    for t in range(1, k_eff):
        last = int(selected[t - 1])
        last_col = m.column(last)
        last_card = int(cards[last])
        for f in np.flatnonzero(available):
            counts = _pair_counts(m.column(f), last_col, int(cards[f]), last_card)
            red_sum[f] += mi_from_counts(counts)
        criterion = relevance - red_sum / t
        criterion[~available] = -np.inf
        j = int(np.argmax(criterion))
        selected[t] = j
        pick_rel[t] = relevance[j]
        pick_red[t] = red_sum[j] / t
        pick_crit[t] = criterion[j]
        available[j] = False
        if trace is not None:
            trace.append(red_sum.copy())

    return SelectionResult(
        selected=selected,
        relevance=pick_rel,
        mean_redundancy=pick_red,
        criterion=pick_crit,
        requested_k=k,
        truncated=truncated,
        trace=tuple(trace) if trace is not None else None,
    )


class FastMrmrSelector(BaseEstimator, TransformerMixin):
    """mRMR feature selection as a scikit-learn style transformer.

    Discretizes the input internally, ranks features by the greedy
    difference criterion and keeps the top `k` (or `ceil(fraction * F)`).
    `transform` returns the selected columns of the raw input, in pick
    order.

    Parameters
    ----------
    k : int, optional
        Number of features to keep. Mutually exclusive with `fraction`.
    fraction : float, optional
        Fraction of features to keep, in (0, 1].
    max_levels : int, default 256
        Discretization cap per feature.
    """

    def __init__(self, k: int | None = None, fraction: float | None = None,
                 max_levels: int = 256):
        self.k = k
        self.fraction = fraction
        self.max_levels = max_levels

    def fit(self, X, y):
        X = check_feature_values(X)
        y = check_labels(y)
        check_consistent_length(X, y)
        encoder = CategoryEncoder(max_levels=self.max_levels).fit(X)
        matrix = ColumnarMatrix(encoder.transform(X), encoder.cardinality_, y)
        self.result_ = select(matrix, k=self.k, fraction=self.fraction)
        self.selected_ = self.result_.selected
        self.n_features_in_ = X.shape[1]
        return self

    def transform(self, X):
        X = np.asarray(X)
        if X.ndim != 2 or X.shape[1] != self.n_features_in_:
            raise ValueError(
                f"X has shape {X.shape}, expected (*, {self.n_features_in_})"
            )
        return X[:, self.selected_]
