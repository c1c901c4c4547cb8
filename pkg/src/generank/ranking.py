"""Out-of-fold gene ranking and permutation feature importance.

A gene's probability always comes from the one cross-validation model whose
training fold excluded it, so no score is ever produced by a model that saw
the gene's label. Importance is permutation-based: the mean AUC-ROC drop
over repeated shuffles of one column, normalized so the top feature scores
exactly 100.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._seeds import derive_seed
from .dataset import LABEL_NAMES, UNLABELED, Dataset
from .evaluate import fit_and_score_split
from .folds import FoldPlan
from .forest import BalancedRandomForest
from .metrics import auc_roc


@dataclass(frozen=True)
class RankedGene:
    gene_id: str
    probability: float
    label: int

    @property
    def label_name(self) -> str:
        return LABEL_NAMES[self.label]


@dataclass(frozen=True)
class GeneRanking:
    """Genes ordered by predicted positive probability, descending; equal
    probabilities fall back to lexicographic gene id order."""

    entries: tuple[RankedGene, ...]
    novel_only: bool

    def export_lines(self) -> list[str]:
        """One `rank<TAB>gene_id<TAB>probability<TAB>label` line per entry."""
        return [
            f"{rank}\t{e.gene_id}\t{e.probability:.6f}\t{e.label_name}"
            for rank, e in enumerate(self.entries, start=1)
        ]


@dataclass(frozen=True)
class ImportanceEntry:
    feature_name: str
    raw: float
    score: float


@dataclass(frozen=True)
class ImportanceReport:
    """Features ordered by importance; scores are normalized to [0, 100]
    with the top feature at exactly 100 (all zero when nothing helps)."""

    entries: tuple[ImportanceEntry, ...]

    def export_lines(self) -> list[str]:
        """One `rank<TAB>feature_name<TAB>score` line per entry."""
        return [
            f"{rank}\t{e.feature_name}\t{e.score:.2f}"
            for rank, e in enumerate(self.entries, start=1)
        ]


def out_of_fold_probabilities(
    dataset: Dataset,
    *,
    fraction: float,
    forest: BalancedRandomForest | None = None,
    plan: FoldPlan | None = None,
    n_folds: int = 10,
    max_levels: int = 256,
    seed: int = 0,
    n_jobs: int = 1,
) -> np.ndarray:
    """Positive probability per gene, each scored exactly once by the model
    whose training fold excluded it."""
    template = forest if forest is not None else BalancedRandomForest()
    if plan is None:
        plan = FoldPlan.build(dataset.labels, n_folds, seed)
    probs = np.full(dataset.n_genes, np.nan)
    for i, (train_idx, test_idx) in enumerate(plan):
        scores, _, _, _ = fit_and_score_split(
            dataset.features, dataset.labels, train_idx, test_idx,
            fraction=fraction,
            forest_template=template,
            forest_seed=derive_seed(plan.seed, "forest", i),
            max_levels=max_levels,
            n_jobs=n_jobs,
        )
        probs[test_idx] = scores
    if np.isnan(probs).any():
        raise RuntimeError("fold plan did not cover every gene exactly once")
    return probs


def rank_from_probabilities(
    gene_ids, probabilities, labels, *, novel_only: bool = True
) -> GeneRanking:
    """Deterministic ranking of (gene, probability, label) triples."""
    rows = [
        RankedGene(gene_id=g, probability=float(p), label=int(lbl))
        for g, p, lbl in zip(gene_ids, probabilities, labels)
    ]
    if novel_only:
        rows = [r for r in rows if r.label == UNLABELED]
    rows.sort(key=lambda r: (-r.probability, r.gene_id))
    return GeneRanking(entries=tuple(rows), novel_only=novel_only)


def rank_genes(
    dataset: Dataset,
    *,
    fraction: float,
    forest: BalancedRandomForest | None = None,
    plan: FoldPlan | None = None,
    n_folds: int = 10,
    max_levels: int = 256,
    seed: int = 0,
    n_jobs: int = 1,
    novel_only: bool = True,
) -> GeneRanking:
    """Prioritized gene list from out-of-fold probabilities."""
    probs = out_of_fold_probabilities(
        dataset,
        fraction=fraction,
        forest=forest,
        plan=plan,
        n_folds=n_folds,
        max_levels=max_levels,
        seed=seed,
        n_jobs=n_jobs,
    )
    return rank_from_probabilities(
        dataset.gene_ids, probs, dataset.labels, novel_only=novel_only
    )


def normalize_importance(raw: np.ndarray) -> np.ndarray:
    """Scale so the maximum is 100; all-nonpositive raws collapse to 0."""
    raw = np.asarray(raw, dtype=np.float64)
    top = raw.max() if raw.size else 0.0
    if top <= 0.0:
        return np.zeros_like(raw)
    return 100.0 * raw / top


def feature_importance(
    forest: BalancedRandomForest,
    X,
    labels,
    feature_names,
    *,
    n_repeats: int = 10,
    seed: int = 0,
) -> ImportanceReport:
    """Permutation importance of each model column, scored by AUC-ROC drop.

    Raw importance of column j is the mean, over `n_repeats` shuffles of
    that column, of (baseline AUC - shuffled AUC). A column no tree ever
    splits on leaves predictions untouched and scores exactly 0.
    """
    X = np.asarray(X)
    names = list(feature_names)
    if X.shape[1] != len(names):
        raise ValueError(f"{len(names)} names for {X.shape[1]} columns")
    labels = np.asarray(labels)
    baseline = auc_roc(forest.predict_proba(X)[:, 1], labels)
    n = X.shape[0]
    raw = np.empty(X.shape[1], dtype=np.float64)
    work = np.array(X, copy=True)
    for j in range(X.shape[1]):
        drops = []
        for r in range(n_repeats):
            rng = np.random.Generator(np.random.PCG64(derive_seed(seed, "perm", j, r)))
            work[:, j] = X[rng.permutation(n), j]
            drops.append(baseline - auc_roc(forest.predict_proba(work)[:, 1], labels))
        work[:, j] = X[:, j]
        raw[j] = float(np.mean(drops))
    scores = normalize_importance(raw)
    order = sorted(range(len(names)), key=lambda j: (-raw[j], names[j]))
    entries = tuple(
        ImportanceEntry(feature_name=names[j], raw=float(raw[j]), score=float(scores[j]))
        for j in order
    )
    return ImportanceReport(entries=entries)
