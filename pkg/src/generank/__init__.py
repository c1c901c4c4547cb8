"""Gene prioritization on high-dimensional binary annotation data.

Pipeline pieces: categorical discretization into a feature-major byte
layout, histogram mutual information, greedy mRMR feature selection with
accumulated redundancy, a balanced random forest, leakage-safe nested
cross-validation with imbalanced-classification metrics, and out-of-fold
gene ranking with permutation feature importance.
"""

from ._seeds import derive_seed
from .columnar import CategoryEncoder, ColumnarMatrix, discretize
from .dataset import (
    Dataset,
    DatasetError,
    LABEL_NAMES,
    POSITIVE,
    UNLABELED,
    load_dataset,
    merge_common,
    save_dataset,
)
from .evaluate import (
    EvaluationReport,
    compare_reports,
    compute_metrics,
    nested_cv,
    select_threshold,
)
from .folds import FoldPlan, stratified_folds
from .forest import BalancedRandomForest
from .metrics import (
    TTestResult,
    auc_pr,
    auc_roc,
    f1_score,
    g_mean,
    paired_t_test,
    regularized_incomplete_beta,
)
from .mi import LABEL, ContingencyTable, batch_relevance, mutual_information
from .mrmr import FastMrmrSelector, SelectionResult, select, threshold_to_k
from .ranking import (
    GeneRanking,
    ImportanceReport,
    feature_importance,
    out_of_fold_probabilities,
    rank_from_probabilities,
    rank_genes,
)

__version__ = "0.1.0"

__all__ = [
    "BalancedRandomForest",
    "CategoryEncoder",
    "ColumnarMatrix",
    "ContingencyTable",
    "Dataset",
    "DatasetError",
    "EvaluationReport",
    "FastMrmrSelector",
    "FoldPlan",
    "GeneRanking",
    "ImportanceReport",
    "LABEL",
    "LABEL_NAMES",
    "POSITIVE",
    "SelectionResult",
    "TTestResult",
    "UNLABELED",
    "auc_pr",
    "auc_roc",
    "batch_relevance",
    "compare_reports",
    "compute_metrics",
    "derive_seed",
    "discretize",
    "f1_score",
    "feature_importance",
    "g_mean",
    "load_dataset",
    "merge_common",
    "mutual_information",
    "nested_cv",
    "out_of_fold_probabilities",
    "paired_t_test",
    "rank_from_probabilities",
    "rank_genes",
    "regularized_incomplete_beta",
    "save_dataset",
    "select",
    "select_threshold",
    "stratified_folds",
    "threshold_to_k",
]
