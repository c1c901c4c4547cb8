"""Leakage-safe nested cross-validation, threshold tuning and reporting.

Every data-dependent choice (discretization levels, selected features, the
selection threshold when a candidate grid is given) is made strictly inside
the training side of each outer fold. The held-out fold only ever meets the
already-fitted encoder, selector and forest.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from sklearn.base import clone

from ._seeds import derive_seed
from .columnar import CategoryEncoder, ColumnarMatrix
from .dataset import Dataset
from .folds import FoldPlan, stratified_folds
from .forest import BalancedRandomForest
from .metrics import auc_pr, auc_roc, f1_score, g_mean, paired_t_test
from .mrmr import select, threshold_to_k

METRIC_NAMES = ("f1", "auc_roc", "auc_pr", "g_mean")
PHASES = ("selection", "training", "inference")

_REPORT_FORMAT = "generank-report"
_REPORT_VERSION = 1


def compute_metrics(scores, labels) -> dict[str, float]:
    """The four report metrics for one scored fold."""
    return {
        "f1": f1_score(scores, labels),
        "auc_roc": auc_roc(scores, labels),
        "auc_pr": auc_pr(scores, labels),
        "g_mean": g_mean(scores, labels),
    }


def fit_and_score_split(
    features: np.ndarray,
    labels: np.ndarray,
    train_idx: np.ndarray,
    test_idx: np.ndarray,
    *,
    fraction: float,
    forest_template: BalancedRandomForest,
    forest_seed: int,
    max_levels: int = 256,
    n_jobs: int = 1,
):
    """Run one train/test split of the full pipeline.

    Discretization and selection see only the training rows. Returns the
    positive-class scores of the test rows, the number of selected
    features, the selected column indices and per-phase wall-clock seconds.
    """
    t0 = time.perf_counter()
    train_X = features[train_idx]
    train_y = labels[train_idx]
    encoder = CategoryEncoder(max_levels=max_levels).fit(train_X)
    train_codes = encoder.transform(train_X)
    matrix = ColumnarMatrix(train_codes, encoder.cardinality_, train_y)
    k = threshold_to_k(fraction, matrix.n_features)
    picked = select(matrix, k=k)
    t1 = time.perf_counter()

    forest = clone(forest_template)
    forest.set_params(random_state=forest_seed, n_jobs=n_jobs)
    forest.fit(train_codes[:, picked.selected], train_y)
    t2 = time.perf_counter()

    test_codes = encoder.transform(features[test_idx])
    scores = forest.predict_proba(test_codes[:, picked.selected])[:, 1]
    t3 = time.perf_counter()

    timings = {"selection": t1 - t0, "training": t2 - t1, "inference": t3 - t2}
    return scores, len(picked.selected), picked.selected, timings


def _threshold_search(
    features: np.ndarray,
    labels: np.ndarray,
    candidates,
    *,
    forest_template: BalancedRandomForest,
    n_folds: int,
    seed: int,
    max_levels: int,
    n_jobs: int,
) -> float:
    """Mean cross-validated AUC-ROC per candidate fraction; the best wins,
    ties going to the smaller fraction (stronger reduction)."""
    candidates = sorted(set(float(c) for c in candidates))
    for c in candidates:
        if not 0.0 < c <= 1.0:
            raise ValueError(f"candidate fractions must be in (0, 1], got {c}")
    if not candidates:
        raise ValueError("no candidate fractions given")
    if len(candidates) == 1:
        return candidates[0]

    folds = stratified_folds(labels, n_folds, derive_seed(seed, "folds"))
    all_idx = np.arange(len(labels))
    best_fraction = None
    best_auc = -np.inf
    for c in candidates:
        aucs = []
        for j, test_idx in enumerate(folds):
            train_idx = np.setdiff1d(all_idx, test_idx, assume_unique=True)
            scores, _, _, _ = fit_and_score_split(
                features, labels, train_idx, test_idx,
                fraction=c,
                forest_template=forest_template,
                forest_seed=derive_seed(seed, "forest", j),
                max_levels=max_levels,
                n_jobs=n_jobs,
            )
            aucs.append(auc_roc(scores, labels[test_idx]))
        mean_auc = float(np.mean(aucs))
        if mean_auc > best_auc:  # strict: ascending order keeps smaller on ties
            best_auc = mean_auc
            best_fraction = c
    return best_fraction


def select_threshold(
    dataset: Dataset,
    candidate_fractions,
    *,
    forest: BalancedRandomForest | None = None,
    n_folds: int = 5,
    max_levels: int = 256,
    seed: int = 0,
    n_jobs: int = 1,
) -> float:
    """Pick the selection fraction maximizing mean cross-validated AUC-ROC."""
    candidates = sorted(set(float(c) for c in candidate_fractions))
    if not candidates:
        raise ValueError("no candidate fractions given")
    if len(candidates) == 1:
        if not 0.0 < candidates[0] <= 1.0:
            raise ValueError(f"candidate fractions must be in (0, 1], got {candidates[0]}")
        return candidates[0]
    return _threshold_search(
        dataset.features, dataset.labels, candidates,
        forest_template=forest if forest is not None else BalancedRandomForest(),
        n_folds=n_folds,
        seed=seed,
        max_levels=max_levels,
        n_jobs=n_jobs,
    )


@dataclass
class EvaluationReport:
    """Per-fold metrics, aggregates, timings and t-test slots for one run."""

    seed: int
    n_outer: int
    per_fold: list[dict[str, float]]
    means: dict[str, float]
    stds: dict[str, float]
    selected_feature_counts: list[int]
    fractions_used: list[float]
    phase_timings: dict[str, list[float]]
    config: dict = field(default_factory=dict)
    t_tests: list[dict] = field(default_factory=list)

    def to_dict(self, *, include_timings: bool = False) -> dict:
        """Plain-data form. Wall-clock timings are volatile, so they are
        left out unless explicitly requested; identical configs then yield
        byte-identical serialized reports."""
        payload = {
            "format": _REPORT_FORMAT,
            "version": _REPORT_VERSION,
            "seed": self.seed,
            "n_outer": self.n_outer,
            "config": self.config,
            "metrics": {
                "per_fold": self.per_fold,
                "mean": self.means,
                "std": self.stds,
            },
            "selection": {
                "feature_counts": self.selected_feature_counts,
                "fractions_used": self.fractions_used,
            },
            "t_tests": self.t_tests,
        }
        if include_timings:
            payload["timings"] = self.timings_dict()
        return payload

    def timings_dict(self) -> dict:
        return {
            "per_fold_seconds": self.phase_timings,
            "total_seconds": {
                phase: float(np.sum(self.phase_timings[phase])) for phase in PHASES
            },
        }

    def save(self, path) -> None:
        Path(path).write_text(
            json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"
        )

    def save_timings(self, path) -> None:
        Path(path).write_text(
            json.dumps(self.timings_dict(), sort_keys=True, indent=2) + "\n"
        )

    @classmethod
    def from_dict(cls, payload: dict) -> "EvaluationReport":
        if payload.get("format") != _REPORT_FORMAT:
            raise ValueError("not a serialized evaluation report")
        if payload.get("version") != _REPORT_VERSION:
            raise ValueError(f"unsupported report version {payload.get('version')}")
        timings = payload.get("timings", {}).get(
            "per_fold_seconds", {phase: [] for phase in PHASES}
        )
        return cls(
            seed=payload["seed"],
            n_outer=payload["n_outer"],
            per_fold=payload["metrics"]["per_fold"],
            means=payload["metrics"]["mean"],
            stds=payload["metrics"]["std"],
            selected_feature_counts=payload["selection"]["feature_counts"],
            fractions_used=payload["selection"]["fractions_used"],
            phase_timings=timings,
            config=payload.get("config", {}),
            t_tests=payload.get("t_tests", []),
        )

    @classmethod
    def load(cls, path) -> "EvaluationReport":
        return cls.from_dict(json.loads(Path(path).read_text()))

    def summary_table(self) -> str:
        lines = []
        header = f"{'fold':>4}  " + "  ".join(f"{name:>8}" for name in METRIC_NAMES)
        lines.append(header)
        for i, fold in enumerate(self.per_fold):
            lines.append(
                f"{i:>4}  " + "  ".join(f"{fold[name]:8.4f}" for name in METRIC_NAMES)
            )
        lines.append(
            f"{'mean':>4}  " + "  ".join(f"{self.means[name]:8.4f}" for name in METRIC_NAMES)
        )
        lines.append(
            f"{'std':>4}  " + "  ".join(f"{self.stds[name]:8.4f}" for name in METRIC_NAMES)
        )
        return "\n".join(lines)


def nested_cv(
    dataset: Dataset,
    *,
    fraction: float | None = None,
    fractions=None,
    forest: BalancedRandomForest | None = None,
    n_outer: int = 10,
    n_inner: int = 5,
    max_levels: int = 256,
    seed: int = 0,
    n_jobs: int = 1,
    config: dict | None = None,
) -> EvaluationReport:
    """Nested cross-validated evaluation of the selection + forest pipeline.

    Give either a fixed selection `fraction`, or a `fractions` grid to tune
    per outer fold on an inner cross-validation (the tuning work is booked
    under the selection phase). Fold assignment, per-fold forest seeds and
    inner-loop seeds all derive from `seed`.
    """
    if (fraction is None) == (fractions is None):
        raise ValueError("exactly one of fraction and fractions must be set")
    template = forest if forest is not None else BalancedRandomForest()
    plan = FoldPlan.build(dataset.labels, n_outer, seed)
    features = dataset.features
    labels = dataset.labels

    per_fold: list[dict[str, float]] = []
    counts: list[int] = []
    used: list[float] = []
    timings: dict[str, list[float]] = {phase: [] for phase in PHASES}
    for i, (train_idx, test_idx) in enumerate(plan):
        tune_seconds = 0.0
        if fractions is not None:
            t0 = time.perf_counter()
            fold_fraction = _threshold_search(
                features[train_idx], labels[train_idx], fractions,
                forest_template=template,
                n_folds=n_inner,
                seed=derive_seed(seed, "inner", i),
                max_levels=max_levels,
                n_jobs=n_jobs,
            )
            tune_seconds = time.perf_counter() - t0
        else:
            fold_fraction = float(fraction)

        scores, n_selected, _, fold_times = fit_and_score_split(
            features, labels, train_idx, test_idx,
            fraction=fold_fraction,
            forest_template=template,
            forest_seed=derive_seed(seed, "forest", i),
            max_levels=max_levels,
            n_jobs=n_jobs,
        )
        per_fold.append(compute_metrics(scores, labels[test_idx]))
        counts.append(n_selected)
        used.append(fold_fraction)
        timings["selection"].append(fold_times["selection"] + tune_seconds)
        timings["training"].append(fold_times["training"])
        timings["inference"].append(fold_times["inference"])

    means = {
        name: float(np.mean([fold[name] for fold in per_fold]))
        for name in METRIC_NAMES
    }
    stds = {
        name: float(np.std([fold[name] for fold in per_fold], ddof=1))
        for name in METRIC_NAMES
    }
    return EvaluationReport(
        seed=seed,
        n_outer=n_outer,
        per_fold=per_fold,
        means=means,
        stds=stds,
        selected_feature_counts=counts,
        fractions_used=used,
        phase_timings=timings,
        config=dict(config) if config else {},
    )


def compare_reports(
    report: EvaluationReport,
    baseline: EvaluationReport,
    *,
    baseline_name: str | None = None,
) -> list[dict]:
    """Paired t-tests of per-fold metrics between two runs sharing a fold
    plan (same seed and outer fold count, so the pairing is meaningful)."""
    if report.seed != baseline.seed:
        raise ValueError(
            f"reports use different seeds ({report.seed} vs {baseline.seed}); "
            "per-fold pairing would be meaningless"
        )
    if report.n_outer != baseline.n_outer:
        raise ValueError(
            f"reports use different outer fold counts "
            f"({report.n_outer} vs {baseline.n_outer})"
        )
    name = baseline_name or baseline.config.get("dataset", "baseline")
    results = []
    for metric in METRIC_NAMES:
        a = [fold[metric] for fold in report.per_fold]
        b = [fold[metric] for fold in baseline.per_fold]
        outcome = paired_t_test(a, b)
        results.append(
            {
                "metric": metric,
                "baseline": name,
                "t": outcome.t,
                "p": outcome.p,
                "degenerate": outcome.degenerate,
            }
        )
    return results
