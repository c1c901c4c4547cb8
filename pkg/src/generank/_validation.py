"""Input validation helpers shared by the estimators and pipeline stages."""

from __future__ import annotations

import numpy as np

MAX_CODE = 255


def check_feature_values(X, *, name: str = "X") -> np.ndarray:
    """Coerce X to a 2D non-negative int64 matrix, rejecting anything else."""
    arr = np.asarray(X)
    if arr.ndim != 2:
        raise ValueError(f"{name} must be 2-dimensional, got shape {arr.shape}")
    if arr.size == 0:
        raise ValueError(f"{name} is empty")
    if np.issubdtype(arr.dtype, np.floating):
        if not np.all(np.isfinite(arr)) or np.any(arr != np.floor(arr)):
            raise ValueError(f"{name} must hold integer category values")
        arr = arr.astype(np.int64)
    elif not np.issubdtype(arr.dtype, np.integer):
        raise ValueError(f"{name} must be an integer matrix, got dtype {arr.dtype}")
    arr = arr.astype(np.int64, copy=False)
    if arr.min() < 0:
        raise ValueError(f"{name} contains negative values")
    return arr


def check_code_matrix(X, *, name: str = "X") -> np.ndarray:
    """Validate a category-code matrix and return it as uint8, feature-major."""
    arr = check_feature_values(X, name=name)
    hi = int(arr.max())
    if hi > MAX_CODE:
        raise ValueError(f"{name} contains code {hi}, larger than {MAX_CODE}")
    return np.asfortranarray(arr.astype(np.uint8))


def check_labels(y, *, require_both_classes: bool = True) -> np.ndarray:
    """Validate a 0/1 label vector and return it as uint8."""
    arr = np.asarray(y)
    if arr.ndim != 1:
        raise ValueError(f"labels must be 1-dimensional, got shape {arr.shape}")
    if arr.size == 0:
        raise ValueError("labels are empty")
    values = np.unique(arr)
    if not np.isin(values, (0, 1)).all():
        raise ValueError(f"labels must be 0 or 1, found {values.tolist()}")
    if require_both_classes and len(values) < 2:
        raise ValueError("labels contain a single class; need both 0 and 1")
    return arr.astype(np.uint8)


def check_consistent_length(X, y) -> None:
    n_x = np.asarray(X).shape[0]
    n_y = np.asarray(y).shape[0]
    if n_x != n_y:
        raise ValueError(f"X has {n_x} rows but y has {n_y} entries")
