"""Balanced random forest over category-code features.

Each tree trains on every positive gene plus an equal-size uniform draw of
negatives (without replacement when enough negatives exist). Trees are CART
stumps-to-full-trees grown greedily on Gini impurity; splits are binary
"code <= threshold" tests over the dense category-code order, which on
binary features is the usual 0-vs-1 split. Leaves keep their positive and
total counts, and the forest probability is the plain mean of leaf positive
fractions across trees.

Per-tree seeds come from a splittable hash of the master seed, so training
and prediction are bitwise reproducible for a fixed seed no matter how many
worker threads are used.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin

from ._seeds import derive_seed
from ._validation import check_code_matrix, check_consistent_length, check_labels

_FORMAT = "generank-forest"
_VERSION = 1


@dataclass(frozen=True)
class Tree:
    """Flat array representation of one decision tree.

    feature[i] is -1 at leaves; left/right hold child node ids; pos/total
    hold the class counts of the training samples that reached each node.
    """

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    pos: np.ndarray
    total: np.ndarray

    def n_nodes(self) -> int:
        return len(self.feature)

    def predict(self, X: np.ndarray) -> np.ndarray:
        """Positive-class fraction of the leaf each row lands in."""
        node = np.zeros(X.shape[0], dtype=np.int64)
        while True:
            f = self.feature[node]
            rows = np.flatnonzero(f >= 0)
            if rows.size == 0:
                break
            at = node[rows]
            codes = X[rows, f[rows]]
            go_left = codes <= self.threshold[at]
            node[rows] = np.where(go_left, self.left[at], self.right[at])
        return self.pos[node] / self.total[node]


def _ordered_map(fn, items, n_jobs):
    if n_jobs is not None and n_jobs > 1:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            return list(pool.map(fn, items))
    return [fn(item) for item in items]


def _balanced_sample(rng, pos_idx: np.ndarray, neg_idx: np.ndarray) -> np.ndarray:
    """All positives plus an equal-size uniform draw of negatives."""
    n_pos = len(pos_idx)
    replace = len(neg_idx) < n_pos
    neg = rng.choice(neg_idx, size=n_pos, replace=replace)
    return np.concatenate([pos_idx, neg])


def _grow_tree(X, y, sample, rng, *, max_depth, min_leaf, mtry, cards):
    feature: list[int] = []
    threshold: list[int] = []
    left: list[int] = []
    right: list[int] = []
    pos: list[int] = []
    total: list[int] = []
    n_features = X.shape[1]

    # stack holds (indices, depth, parent id, is_right_child); pushing the
    # right child first keeps node creation in left-first preorder, which
    # pins the per-node RNG consumption order
    stack = [(sample, 0, -1, False)]
    while stack:
        idx, depth, parent, is_right = stack.pop()
        node_id = len(feature)
        if parent >= 0:
            if is_right:
                right[parent] = node_id
            else:
                left[parent] = node_id

        ys = y[idx]
        n = idx.size
        n_pos = int(ys.sum())
        pos.append(n_pos)
        total.append(n)

        pure = n_pos == 0 or n_pos == n
        if pure or n < 2 * min_leaf or (max_depth is not None and depth >= max_depth):
            feature.append(-1)
            threshold.append(-1)
            left.append(-1)
            right.append(-1)
            continue

        candidates = rng.permutation(n_features)[:mtry]
        best_gini = np.inf
        best_feature = -1
        best_threshold = -1
        for f in candidates:
            card = int(cards[f])
            if card < 2:
                continue
            col = X[:, f][idx]
            cnt = np.bincount(col, minlength=card)
            cnt_pos = np.bincount(col[ys == 1], minlength=card)
            nl = np.cumsum(cnt)[: card - 1].astype(np.float64)
            pl = np.cumsum(cnt_pos)[: card - 1].astype(np.float64)
            nr = n - nl
            pr = n_pos - pl
            valid = (nl >= min_leaf) & (nr >= min_leaf)
            if not valid.any():
                continue
            nl_safe = np.where(valid, nl, 1.0)
            nr_safe = np.where(valid, nr, 1.0)
            gini_l = 1.0 - (pl / nl_safe) ** 2 - ((nl - pl) / nl_safe) ** 2
            gini_r = 1.0 - (pr / nr_safe) ** 2 - ((nr - pr) / nr_safe) ** 2
            weighted = (nl * gini_l + nr * gini_r) / n
            weighted[~valid] = np.inf
            t = int(np.argmin(weighted))
            if weighted[t] < best_gini:
                best_gini = weighted[t]
                best_feature = int(f)
                best_threshold = t

        if best_feature < 0:
            feature.append(-1)
            threshold.append(-1)
            left.append(-1)
            right.append(-1)
            continue

        feature.append(best_feature)
        threshold.append(best_threshold)
        left.append(-1)
        right.append(-1)
        go_left = X[:, best_feature][idx] <= best_threshold
        stack.append((idx[~go_left], depth + 1, node_id, True))
        stack.append((idx[go_left], depth + 1, node_id, False))

    return Tree(
        feature=np.array(feature, dtype=np.int32),
        threshold=np.array(threshold, dtype=np.int32),
        left=np.array(left, dtype=np.int32),
        right=np.array(right, dtype=np.int32),
        pos=np.array(pos, dtype=np.int64),
        total=np.array(total, dtype=np.int64),
    )


class BalancedRandomForest(BaseEstimator, ClassifierMixin):
    """Balanced random forest classifier for category-code matrices.

    Parameters
    ----------
    n_estimators : int, default 500
        Number of trees.
    max_depth : int or None, default None
        Depth cap; None grows until purity or the leaf-size floor.
    min_samples_leaf : int, default 1
        Minimum samples on each side of every split.
    max_features : "sqrt", int or None, default "sqrt"
        Features considered per split: floor(sqrt(F)) for "sqrt" (at least
        1), an explicit count, or all features for None.
    random_state : int, default 0
        Master seed; per-tree seeds are derived by a splittable hash.
    n_jobs : int, default 1
        Worker threads for training and prediction. Never affects results.
    store_sample_indices : bool, default False
        Keep each tree's training index array (debug aid, not serialized).
    """

    def __init__(
        self,
        n_estimators: int = 500,
        max_depth: int | None = None,
        min_samples_leaf: int = 1,
        max_features="sqrt",
        random_state: int = 0,
        n_jobs: int = 1,
        store_sample_indices: bool = False,
    ):
        self.n_estimators = n_estimators
        self.max_depth = max_depth
        self.min_samples_leaf = min_samples_leaf
        self.max_features = max_features
        self.random_state = random_state
        self.n_jobs = n_jobs
        self.store_sample_indices = store_sample_indices

    def _mtry(self, n_features: int) -> int:
        if self.max_features is None:
            return n_features
        if self.max_features == "sqrt":
            return max(1, int(math.isqrt(n_features)))
        m = int(self.max_features)
        if m < 1:
            raise ValueError(f"max_features must be >= 1, got {m}")
        return min(m, n_features)

    def fit(self, X, y):
        if self.n_estimators < 1:
            raise ValueError(f"n_estimators must be >= 1, got {self.n_estimators}")
        if self.min_samples_leaf < 1:
            raise ValueError(
                f"min_samples_leaf must be >= 1, got {self.min_samples_leaf}"
            )
        X = check_code_matrix(X)
        y = check_labels(y)
        check_consistent_length(X, y)

        pos_idx = np.flatnonzero(y == 1)
        neg_idx = np.flatnonzero(y == 0)
        cards = X.max(axis=0).astype(np.int64) + 1
        mtry = self._mtry(X.shape[1])
        seeds = [derive_seed(self.random_state, t) for t in range(self.n_estimators)]

        def build(t):
            rng = np.random.Generator(np.random.PCG64(seeds[t]))
            sample = _balanced_sample(rng, pos_idx, neg_idx)
            tree = _grow_tree(
                X, y, sample, rng,
                max_depth=self.max_depth,
                min_leaf=self.min_samples_leaf,
                mtry=mtry,
                cards=cards,
            )
            return tree, sample

        built = _ordered_map(build, range(self.n_estimators), self.n_jobs)
        self.trees_ = [tree for tree, _ in built]
        self.per_tree_seed_ = seeds
        self.sample_indices_ = (
            [sample for _, sample in built] if self.store_sample_indices else None
        )
        self.cardinality_ = cards
        self.classes_ = np.array([0, 1])
        self.n_features_in_ = X.shape[1]
        return self

    def _check_predict_input(self, X) -> np.ndarray:
        X = check_code_matrix(X)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(
                f"X has {X.shape[1]} features, model was trained on "
                f"{self.n_features_in_}"
            )
        return X

    def predict_proba(self, X) -> np.ndarray:
        """Class probabilities, columns ordered (negative, positive)."""
        X = self._check_predict_input(X)
        parts = _ordered_map(lambda tree: tree.predict(X), self.trees_, self.n_jobs)
        acc = np.zeros(X.shape[0], dtype=np.float64)
        for part in parts:  # fixed tree order keeps the mean deterministic
            acc += part
        p_pos = acc / len(self.trees_)
        return np.column_stack([1.0 - p_pos, p_pos])

    def predict(self, X) -> np.ndarray:
        return (self.predict_proba(X)[:, 1] > 0.5).astype(np.int64)

    def to_dict(self) -> dict:
        """Version-tagged plain-data form, stable across identical runs."""
        return {
            "format": _FORMAT,
            "version": _VERSION,
            "params": {
                "n_estimators": self.n_estimators,
                "max_depth": self.max_depth,
                "min_samples_leaf": self.min_samples_leaf,
                "max_features": self.max_features,
                "random_state": self.random_state,
            },
            "n_features": self.n_features_in_,
            "cardinality": self.cardinality_.tolist(),
            "per_tree_seed": list(self.per_tree_seed_),
            "trees": [
                {
                    "feature": tree.feature.tolist(),
                    "threshold": tree.threshold.tolist(),
                    "left": tree.left.tolist(),
                    "right": tree.right.tolist(),
                    "pos": tree.pos.tolist(),
                    "total": tree.total.tolist(),
                }
                for tree in self.trees_
            ],
        }

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), sort_keys=True))

    @classmethod
    def from_dict(cls, payload: dict) -> "BalancedRandomForest":
        if payload.get("format") != _FORMAT:
            raise ValueError("not a serialized forest model")
        if payload.get("version") != _VERSION:
            raise ValueError(f"unsupported forest model version {payload.get('version')}")
        model = cls(**payload["params"])
        model.trees_ = [
            Tree(
                feature=np.array(t["feature"], dtype=np.int32),
                threshold=np.array(t["threshold"], dtype=np.int32),
                left=np.array(t["left"], dtype=np.int32),
                right=np.array(t["right"], dtype=np.int32),
                pos=np.array(t["pos"], dtype=np.int64),
                total=np.array(t["total"], dtype=np.int64),
            )
            for t in payload["trees"]
        ]
        model.per_tree_seed_ = list(payload["per_tree_seed"])
        model.sample_indices_ = None
        model.cardinality_ = np.array(payload["cardinality"], dtype=np.int64)
        model.classes_ = np.array([0, 1])
        model.n_features_in_ = payload["n_features"]
        return model

    @classmethod
    def load(cls, path) -> "BalancedRandomForest":
        return cls.from_dict(json.loads(Path(path).read_text()))
