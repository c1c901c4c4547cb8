"""Classification metrics for imbalanced ranking problems, plus the paired
t-test used to compare per-fold metric vectors.

AUC-ROC uses the rank (Mann-Whitney) formulation with mid-rank handling of
tied scores. AUC-PR is the step-wise area under the precision-recall curve
(average-precision form) over descending distinct score thresholds. F1 and
G-Mean are threshold metrics; a gene is called positive when its score is
strictly greater than the threshold.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._validation import check_labels


def _check_inputs(scores, labels):
    scores = np.asarray(scores, dtype=np.float64)
    labels = check_labels(labels)
    if scores.ndim != 1:
        raise ValueError(f"scores must be 1-dimensional, got shape {scores.shape}")
    if scores.shape != labels.shape:
        raise ValueError(
            f"{scores.shape[0]} scores for {labels.shape[0]} labels"
        )
    return scores, labels


def _midranks(values: np.ndarray) -> np.ndarray:
    """1-based ranks, tied values sharing the mean of their rank range."""
    order = np.argsort(values, kind="mergesort")
    sorted_vals = values[order]
    boundaries = np.flatnonzero(np.diff(sorted_vals) != 0) + 1
    starts = np.r_[0, boundaries]
    ends = np.r_[boundaries, len(values)]
    group_rank = (starts + ends - 1) / 2.0 + 1.0
    ranks = np.empty(len(values), dtype=np.float64)
    ranks[order] = np.repeat(group_rank, ends - starts)
    return ranks


def auc_roc(scores, labels) -> float:
    """Area under the ROC curve via mid-ranks; ties count half."""
    scores, labels = _check_inputs(scores, labels)
    ranks = _midranks(scores)
    n_pos = int(labels.sum())
    n_neg = len(labels) - n_pos
    pos_rank_sum = float(ranks[labels == 1].sum())
    return (pos_rank_sum - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg)


def auc_pr(scores, labels) -> float:
    """Step-wise area under the precision-recall curve (average precision)."""
    scores, labels = _check_inputs(scores, labels)
    order = np.argsort(-scores, kind="mergesort")
    sorted_scores = scores[order]
    sorted_labels = labels[order].astype(np.int64)
    # threshold at the end of each run of equal scores
    boundaries = np.flatnonzero(np.diff(sorted_scores) != 0) + 1
    ends = np.r_[boundaries, len(scores)]
    tp = np.cumsum(sorted_labels)[ends - 1].astype(np.float64)
    predicted = ends.astype(np.float64)
    precision = tp / predicted
    recall = tp / float(labels.sum())
    prev_recall = np.r_[0.0, recall[:-1]]
    return float(np.sum((recall - prev_recall) * precision))


def _confusion(scores, labels, threshold):
    pred = scores > threshold
    actual = labels == 1
    tp = int(np.sum(pred & actual))
    fp = int(np.sum(pred & ~actual))
    fn = int(np.sum(~pred & actual))
    tn = int(np.sum(~pred & ~actual))
    return tp, fp, fn, tn


def f1_score(scores, labels, threshold: float = 0.5) -> float:
    """F1 at a fixed score threshold; empty denominators count as 0."""
    scores, labels = _check_inputs(scores, labels)
    tp, fp, fn, _ = _confusion(scores, labels, threshold)
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    if precision + recall == 0.0:
        return 0.0
    return 2.0 * precision * recall / (precision + recall)


def g_mean(scores, labels, threshold: float = 0.5) -> float:
    """Geometric mean of sensitivity and specificity at a fixed threshold."""
    scores, labels = _check_inputs(scores, labels)
    tp, fp, fn, tn = _confusion(scores, labels, threshold)
    sensitivity = tp / (tp + fn)
    specificity = tn / (tn + fp)
    return math.sqrt(sensitivity * specificity)


def _betacf(a: float, b: float, x: float) -> float:
    """Continued fraction for the incomplete beta (modified Lentz)."""
    max_iter = 300
    eps = 3e-16
    fpmin = 1e-300
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < fpmin:
        d = fpmin
    d = 1.0 / d
    h = d
    for m in range(1, max_iter + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < fpmin:
            d = fpmin
        c = 1.0 + aa / c
        if abs(c) < fpmin:
            c = fpmin
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < fpmin:
            d = fpmin
        c = 1.0 + aa / c
        if abs(c) < fpmin:
            c = fpmin
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < eps:
            return h
    raise RuntimeError("incomplete beta continued fraction did not converge")


def regularized_incomplete_beta(a: float, b: float, x: float) -> float:
    """I_x(a, b) for a, b > 0 and 0 <= x <= 1."""
    if a <= 0.0 or b <= 0.0:
        raise ValueError("a and b must be positive")
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"x must be in [0, 1], got {x}")
    if x == 0.0:
        return 0.0
    if x == 1.0:
        return 1.0
    ln_front = (
        math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
        + a * math.log(x) + b * math.log1p(-x)
    )
    front = math.exp(ln_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, 1.0 - x) / b


@dataclass(frozen=True)
class TTestResult:
    """Paired t-test outcome; `degenerate` marks a zero-variance nonzero
    mean difference, reported as p = 0 by convention."""

    t: float
    p: float
    degenerate: bool = False


def paired_t_test(a, b) -> TTestResult:
    """Two-sided paired t-test on equal-length vectors.

    p comes from the t distribution with n-1 degrees of freedom through the
    regularized incomplete beta function. All-zero differences return
    t = 0, p = 1 by convention.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError(f"need equal-length vectors, got {a.shape} and {b.shape}")
    n = len(a)
    if n < 2:
        raise ValueError(f"need at least 2 paired values, got {n}")
    d = a - b
    if np.all(d == 0.0):
        return TTestResult(t=0.0, p=1.0)
    mean = float(d.mean())
    sd = float(d.std(ddof=1))
    if sd == 0.0:
        return TTestResult(t=math.copysign(math.inf, mean), p=0.0, degenerate=True)
    t = mean / (sd / math.sqrt(n))
    df = n - 1
    p = regularized_incomplete_beta(df / 2.0, 0.5, df / (df + t * t))
    return TTestResult(t=float(t), p=float(min(max(p, 0.0), 1.0)))
