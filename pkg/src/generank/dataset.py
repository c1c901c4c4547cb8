"""Gene-feature datasets: loading, validation, merging and serialization.

A dataset is a gene-by-feature matrix of small non-negative integer category
codes (binary annotation matrices are the common case), one 0/1 label per
gene (1 = confirmed positive, 0 = unlabeled), and a free-text provenance tag
naming the feature source.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ._validation import MAX_CODE

POSITIVE = 1
UNLABELED = 0
LABEL_NAMES = {POSITIVE: "Positive", UNLABELED: "Unlabeled"}


class DatasetError(ValueError):
    """Raised when a dataset file or merge violates the format contract."""


def _first_duplicate(items) -> str | None:
    seen = set()
    for item in items:
        if item in seen:
            return item
        seen.add(item)
    return None


@dataclass(frozen=True, eq=False)
class Dataset:
    """Immutable gene-feature matrix with labels.

    Attributes
    ----------
    gene_ids : tuple of str
        Unique gene identifiers, one per matrix row.
    features : ndarray of uint8, shape (n_genes, n_features)
        Category codes, each strictly below 256.
    feature_names : tuple of str
        Unique column names.
    labels : ndarray of uint8, shape (n_genes,)
        1 for confirmed positives, 0 for unlabeled genes.
    provenance : str
        Free-text tag naming the feature source.
    """

    gene_ids: tuple[str, ...]
    features: np.ndarray
    feature_names: tuple[str, ...]
    labels: np.ndarray
    provenance: str = ""

    def __post_init__(self):
        gene_ids = tuple(self.gene_ids)
        feature_names = tuple(self.feature_names)
        features = np.asarray(self.features)
        labels = np.asarray(self.labels)

        if features.ndim != 2:
            raise DatasetError(f"feature matrix must be 2D, got shape {features.shape}")
        n_genes, n_features = features.shape
        if len(gene_ids) != n_genes:
            raise DatasetError(
                f"{len(gene_ids)} gene ids for {n_genes} matrix rows"
            )
        if len(feature_names) != n_features:
            raise DatasetError(
                f"{len(feature_names)} feature names for {n_features} matrix columns"
            )
        dup = _first_duplicate(gene_ids)
        if dup is not None:
            raise DatasetError(f"duplicate gene id '{dup}'")
        dup = _first_duplicate(feature_names)
        if dup is not None:
            raise DatasetError(f"duplicate feature name '{dup}'")

        if not np.issubdtype(features.dtype, np.integer):
            raise DatasetError("feature matrix must be integer-valued")
        if features.size and (features.min() < 0 or features.max() > MAX_CODE):
            bad = np.argwhere((features < 0) | (features > MAX_CODE))[0]
            value = features[bad[0], bad[1]]
            raise DatasetError(
                f"feature value {value} at gene '{gene_ids[bad[0]]}', "
                f"column '{feature_names[bad[1]]}' is outside 0..{MAX_CODE}"
            )
        features = features.astype(np.uint8, copy=False)

        if labels.shape != (n_genes,):
            raise DatasetError(f"labels must have shape ({n_genes},), got {labels.shape}")
        label_values = set(np.unique(labels).tolist())
        if not label_values <= {0, 1}:
            raise DatasetError(f"labels must be 0 or 1, found {sorted(label_values)}")
        if 1 not in label_values:
            raise DatasetError("dataset has no positive genes")
        if 0 not in label_values:
            raise DatasetError("dataset has no unlabeled genes")
        # own private copies so freezing cannot leak to caller arrays
        features = np.array(features, dtype=np.uint8)
        labels = np.array(labels, dtype=np.uint8)
        features.setflags(write=False)
        labels.setflags(write=False)
        object.__setattr__(self, "gene_ids", gene_ids)
        object.__setattr__(self, "feature_names", feature_names)
        object.__setattr__(self, "features", features)
        object.__setattr__(self, "labels", labels)

    @property
    def n_genes(self) -> int:
        return self.features.shape[0]

    @property
    def n_features(self) -> int:
        return self.features.shape[1]

    @property
    def n_positives(self) -> int:
        return int(self.labels.sum())

    def equals(self, other: "Dataset") -> bool:
        return (
            self.gene_ids == other.gene_ids
            and self.feature_names == other.feature_names
            and np.array_equal(self.features, other.features)
            and np.array_equal(self.labels, other.labels)
        )


def load_dataset(
    path,
    *,
    id_column: str = "gene",
    label_column: str = "label",
    provenance: str | None = None,
) -> Dataset:
    """Load a dataset from delimiter-separated text with a header row.

    The delimiter is auto-detected from the header line (tab if present,
    comma otherwise). The id column holds unique gene names, the label
    column holds 0/1, every remaining column is parsed as an integer
    feature. Violations raise :class:`DatasetError` naming the offending
    gene, row or cell.
    """
    path = Path(path)
    with open(path, newline="") as fh:
        header_line = fh.readline()
        line_offset = 1
        while header_line.startswith("#"):  # leading comment lines carry provenance
            header_line = fh.readline()
            line_offset += 1
        if not header_line.strip():
            raise DatasetError(f"{path}: empty file")
        delimiter = "\t" if "\t" in header_line else ","
        header = next(csv.reader([header_line], delimiter=delimiter))
        try:
            id_pos = header.index(id_column)
        except ValueError:
            raise DatasetError(f"{path}: id column '{id_column}' not found") from None
        try:
            label_pos = header.index(label_column)
        except ValueError:
            raise DatasetError(f"{path}: label column '{label_column}' not found") from None
        feature_pos = [i for i in range(len(header)) if i not in (id_pos, label_pos)]
        feature_names = tuple(header[i] for i in feature_pos)

        gene_ids: list[str] = []
        labels: list[int] = []
        rows: list[np.ndarray] = []
        seen: set[str] = set()
        data_start = line_offset + 1
        for line_no, row in enumerate(csv.reader(fh, delimiter=delimiter), start=data_start):
            if not row:
                continue
            if len(row) != len(header):
                raise DatasetError(
                    f"{path}: row {line_no} has {len(row)} fields, expected {len(header)}"
                )
            gene = row[id_pos]
            if gene in seen:
                raise DatasetError(f"{path}: duplicate gene id '{gene}'")
            seen.add(gene)
            label_cell = row[label_pos].strip()
            if label_cell not in ("0", "1"):
                raise DatasetError(
                    f"{path}: row {line_no} (gene '{gene}'): label must be 0 or 1, "
                    f"got '{label_cell}'"
                )
            cells = [row[i] for i in feature_pos]
            try:
                values = np.array(cells, dtype=np.int64)
            except (ValueError, OverflowError):
                for name, cell in zip(feature_names, cells):
                    try:
                        int(cell)
                    except ValueError:
                        raise DatasetError(
                            f"{path}: row {line_no}, column '{name}': "
                            f"non-integer feature value '{cell}'"
                        ) from None
                raise
            gene_ids.append(gene)
            labels.append(int(label_cell))
            rows.append(values)

    if not rows:
        raise DatasetError(f"{path}: no data rows")
    matrix = np.vstack(rows)
    bad = (matrix < 0) | (matrix > MAX_CODE)
    if bad.any():
        r, c = np.argwhere(bad)[0]
        raise DatasetError(
            f"{path}: row {r + data_start}, column '{feature_names[c]}': value "
            f"{matrix[r, c]} is outside 0..{MAX_CODE}"
        )
    label_arr = np.array(labels, dtype=np.uint8)
    if label_arr.all():
        raise DatasetError(f"{path}: every gene is labeled positive")
    if not label_arr.any():
        raise DatasetError(f"{path}: every gene is unlabeled")
    return Dataset(
        gene_ids=tuple(gene_ids),
        features=matrix.astype(np.uint8),
        feature_names=feature_names,
        labels=label_arr,
        provenance=path.stem if provenance is None else provenance,
    )


def save_dataset(
    dataset: Dataset,
    path,
    *,
    id_column: str = "gene",
    label_column: str = "label",
    delimiter: str = ",",
    header_comments: list[str] | None = None,
) -> None:
    """Write a dataset back to delimiter-separated text (id, label, features).

    `header_comments` lines are written before the header prefixed with '#'
    and skipped again on load.
    """
    path = Path(path)
    with open(path, "w", newline="") as fh:
        for comment in header_comments or ():
            fh.write(f"# {comment}\n")
        writer = csv.writer(fh, delimiter=delimiter)
        writer.writerow([id_column, label_column, *dataset.feature_names])
        for i, gene in enumerate(dataset.gene_ids):
            writer.writerow(
                [gene, int(dataset.labels[i]), *dataset.features[i].tolist()]
            )


def merge_common(a: Dataset, b: Dataset) -> Dataset:
    """Merge two datasets on the intersection of their gene ids.

    The result keeps exactly the genes present in both inputs, ordered by
    their appearance in `a`. Feature columns are a's followed by b's, each
    name prefixed with its source's provenance tag so names stay unique.
    Shared genes must carry the same label in both inputs.
    """
    in_b = set(b.gene_ids)
    common = [g for g in a.gene_ids if g in in_b]
    if not common:
        raise DatasetError(
            f"no common genes between '{a.provenance}' and '{b.provenance}'"
        )
    a_index = {g: i for i, g in enumerate(a.gene_ids)}
    b_index = {g: i for i, g in enumerate(b.gene_ids)}
    a_rows = np.fromiter((a_index[g] for g in common), dtype=np.int64, count=len(common))
    b_rows = np.fromiter((b_index[g] for g in common), dtype=np.int64, count=len(common))

    for g, ia, ib in zip(common, a_rows, b_rows):
        if a.labels[ia] != b.labels[ib]:
            raise DatasetError(f"gene '{g}' has conflicting labels in the two inputs")

    tag_a = a.provenance or "left"
    tag_b = b.provenance or "right"
    if tag_a == tag_b:
        tag_a, tag_b = f"{tag_a}1", f"{tag_b}2"
    names = tuple(
        [f"{tag_a}:{n}" for n in a.feature_names]
        + [f"{tag_b}:{n}" for n in b.feature_names]
    )
    features = np.hstack([a.features[a_rows], b.features[b_rows]])
    return Dataset(
        gene_ids=tuple(common),
        features=features,
        feature_names=names,
        labels=a.labels[a_rows].copy(),
        provenance=f"{a.provenance}+{b.provenance}",
    )
