"""Stratified cross-validation fold plans.

Positives and negatives are shuffled separately and dealt into folds whose
per-class counts are fixed up front: extra positives go to the lowest fold
numbers and extra negatives to the highest, which keeps both the positive
count and the total fold size within one gene of an even share.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._validation import check_labels


def _class_counts(total: int, n_folds: int, *, extras_first: bool) -> np.ndarray:
    base, extra = divmod(total, n_folds)
    counts = np.full(n_folds, base, dtype=np.int64)
    if extra:
        if extras_first:
            counts[:extra] += 1
        else:
            counts[n_folds - extra:] += 1
    return counts


def stratified_folds(labels, n_folds: int, seed: int) -> list[np.ndarray]:
    """Partition indices into stratified folds; each returned array is one
    test fold, sorted ascending. Every fold must receive at least one gene
    of each class."""
    labels = check_labels(labels)
    if n_folds < 2:
        raise ValueError(f"n_folds must be >= 2, got {n_folds}")
    pos = np.flatnonzero(labels == 1)
    neg = np.flatnonzero(labels == 0)
    pos_counts = _class_counts(len(pos), n_folds, extras_first=True)
    neg_counts = _class_counts(len(neg), n_folds, extras_first=False)
    if pos_counts.min() < 1:
        raise ValueError(
            f"cannot stratify {len(pos)} positives into {n_folds} folds; "
            "every fold needs at least one positive"
        )
    if neg_counts.min() < 1:
        raise ValueError(
            f"cannot stratify {len(neg)} negatives into {n_folds} folds; "
            "every fold needs at least one negative"
        )
    rng = np.random.Generator(np.random.PCG64(seed))
    pos_order = rng.permutation(pos)
    neg_order = rng.permutation(neg)
    folds = []
    pos_at = neg_at = 0
    for f in range(n_folds):
        chunk = np.concatenate(
            [
                pos_order[pos_at: pos_at + pos_counts[f]],
                neg_order[neg_at: neg_at + neg_counts[f]],
            ]
        )
        pos_at += pos_counts[f]
        neg_at += neg_counts[f]
        folds.append(np.sort(chunk))
    return folds


@dataclass(frozen=True)
class FoldPlan:
    """Outer cross-validation plan: test index arrays plus the seed that
    generated them."""

    n_genes: int
    seed: int
    test_folds: tuple[np.ndarray, ...]

    @classmethod
    def build(cls, labels, n_folds: int, seed: int) -> "FoldPlan":
        folds = stratified_folds(labels, n_folds, seed)
        return cls(n_genes=len(labels), seed=seed, test_folds=tuple(folds))

    @property
    def n_folds(self) -> int:
        return len(self.test_folds)

    def test_indices(self, i: int) -> np.ndarray:
        return self.test_folds[i]

    def train_indices(self, i: int) -> np.ndarray:
        mask = np.ones(self.n_genes, dtype=bool)
        mask[self.test_folds[i]] = False
        return np.flatnonzero(mask)

    def __iter__(self):
        for i in range(self.n_folds):
            yield self.train_indices(i), self.test_indices(i)
