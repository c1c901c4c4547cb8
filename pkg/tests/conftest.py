"""Shared synthetic data builders and independent oracles for the tests.

The oracle functions here deliberately avoid the library's fast paths: MI
through an explicit nested loop over joint probabilities, AUC through pair
counting and threshold sweeping, mRMR through from-scratch recomputation.
"""

import math

import numpy as np

from generank import Dataset, LABEL, mutual_information
from generank.columnar import ColumnarMatrix


# ---------------------------------------------------------------- builders

def make_dataset(features, labels, *, provenance="synth", gene_prefix="G",
                 feature_prefix="f") -> Dataset:
    features = np.asarray(features, dtype=np.uint8)
    n, f = features.shape
    return Dataset(
        gene_ids=tuple(f"{gene_prefix}{i:05d}" for i in range(n)),
        features=features,
        feature_names=tuple(f"{feature_prefix}{j}" for j in range(f)),
        labels=np.asarray(labels, dtype=np.uint8),
        provenance=provenance,
    )


def random_labels(rng, n, pos_rate=0.3) -> np.ndarray:
    labels = (rng.random(n) < pos_rate).astype(np.uint8)
    labels[0] = 1
    labels[1] = 0
    return labels


def random_columnar(rng, n_genes, n_features, max_card=4) -> ColumnarMatrix:
    cards = rng.integers(2, max_card + 1, size=n_features).astype(np.int64)
    codes = np.empty((n_genes, n_features), dtype=np.uint8, order="F")
    for j in range(n_features):
        codes[:, j] = rng.integers(0, cards[j], size=n_genes)
    labels = random_labels(rng, n_genes, 0.4)
    return ColumnarMatrix(codes, cards, labels)


def planted_features(rng, labels, *, n_signal=5, n_noise=200, flip=0.0):
    """Binary matrix whose first n_signal columns follow the labels (with
    optional flip noise); the rest are independent coin flips."""
    n = len(labels)
    out = rng.integers(0, 2, size=(n, n_signal + n_noise)).astype(np.uint8)
    for j in range(n_signal):
        noise = rng.random(n) < flip
        out[:, j] = np.where(noise, 1 - labels, labels)
    return out


def separable_dataset(seed, *, n_genes=300, n_signal=5, n_noise=200):
    """Labels are the majority vote of the signal columns, so the task is
    exactly solvable from the features."""
    rng = np.random.default_rng(seed)
    signal = rng.integers(0, 2, size=(n_genes, n_signal)).astype(np.uint8)
    labels = (signal.sum(axis=1) * 2 > n_signal).astype(np.uint8)
    noise = rng.integers(0, 2, size=(n_genes, n_noise)).astype(np.uint8)
    features = np.hstack([signal, noise])
    if labels.all() or not labels.any():  # vanishingly unlikely
        labels[0] = 1 - labels[0]
    return features, labels


# ----------------------------------------------------------------- oracles

def oracle_mi_bits(x, y) -> float:
    """Plug-in MI through the joint distribution, nested-loop style."""
    x = np.asarray(x)
    y = np.asarray(y)
    n = len(x)
    total = 0.0
    for a in np.unique(x):
        px = np.sum(x == a) / n
        for b in np.unique(y):
            pab = np.sum((x == a) & (y == b)) / n
            if pab > 0:
                pb = np.sum(y == b) / n
                total += pab * math.log2(pab / (px * pb))
    return total


def oracle_entropy_bits(x) -> float:
    x = np.asarray(x)
    n = len(x)
    total = 0.0
    for a in np.unique(x):
        p = np.sum(x == a) / n
        total -= p * math.log2(p)
    return total


def naive_mrmr(matrix: ColumnarMatrix, k: int) -> list[int]:
    """mRMR that recomputes every redundancy sum from scratch, adding terms
    in pick order so results are bitwise comparable to the fast path."""
    n_features = matrix.n_features
    relevance = [mutual_information(matrix, j, LABEL) for j in range(n_features)]
    selected: list[int] = []
    for _ in range(min(k, n_features)):
        best_j = None
        best_crit = None
        for f in range(n_features):
            if f in selected:
                continue
            if selected:
                redundancy = 0.0
                for s in selected:
                    redundancy += mutual_information(matrix, f, s)
                crit = relevance[f] - redundancy / len(selected)
            else:
                crit = relevance[f]
            if best_crit is None or crit > best_crit:
                best_j, best_crit = f, crit
        selected.append(best_j)
    return selected


def oracle_auc_roc(scores, labels) -> float:
    """Probability-of-correct-ranking estimator by exhaustive pair counting."""
    scores = np.asarray(scores, dtype=float)
    labels = np.asarray(labels)
    pos = scores[labels == 1]
    neg = scores[labels == 0]
    concordant = 0.0
    for p in pos:
        for q in neg:
            if p > q:
                concordant += 1.0
            elif p == q:
                concordant += 0.5
    return concordant / (len(pos) * len(neg))


def oracle_auc_pr(scores, labels) -> float:
    """Average precision by sweeping every distinct score as a threshold."""
    scores = np.asarray(scores, dtype=float)
    labels = np.asarray(labels)
    n_pos = int(labels.sum())
    ap = 0.0
    prev_recall = 0.0
    for th in sorted(set(scores.tolist()), reverse=True):
        pred = scores >= th
        tp = int(np.sum(pred & (labels == 1)))
        precision = tp / int(pred.sum())
        recall = tp / n_pos
        ap += (recall - prev_recall) * precision
        prev_recall = recall
    return ap
