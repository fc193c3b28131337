"""CSV ingestion, PCA reduction and seeded splitting for real datasets."""

import csv
from dataclasses import dataclass
from typing import Dict, Tuple, Union

import numpy as np

from .errors import (
    ClassMissingFromTrain,
    DimensionMismatch,
    EmptyFile,
    ParseError,
    RaggedRows,
    RankDeficient,
)

__all__ = ["Dataset", "PcaTransform", "load_csv", "fit_pca", "apply_pca", "split"]

_SPLIT_RETRIES = 100


@dataclass(frozen=True)
class Dataset:
    """A named feature matrix with dense integer labels 0..K-1."""

    name: str
    data: np.ndarray
    labels: np.ndarray
    class_count: int
    label_names: Tuple[str, ...] = ()

    def __len__(self) -> int:
        return len(self.labels)


@dataclass(frozen=True)
class PcaTransform:
    """Center plus top-d orthonormal projection rows fitted on training data."""

    mean: np.ndarray
    components: np.ndarray  # (d, m)

    @property
    def d(self) -> int:
        return self.components.shape[0]


def load_csv(
    path,
    label_column: Union[str, int] = "last",
    has_header: bool = False,
    name: str = "",
) -> Dataset:
    """Parse a rectangular numeric CSV with one label column.

    String labels are mapped to dense integers by first appearance; the
    mapping is kept on the dataset (``label_names``) so it can be emitted
    alongside results.
    """
    rows = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        for row in reader:
            if row and any(cell.strip() for cell in row):
                rows.append([cell.strip() for cell in row])
    if has_header and rows:
        rows = rows[1:]
    if not rows:
        raise EmptyFile(f"{path}: no data rows")
    width = len(rows[0])
    if width < 2:
        raise ParseError(f"{path}: rows need at least one feature and one label column")
    label_idx = width - 1 if label_column == "last" else int(label_column)
    if label_idx < 0:
        label_idx += width
    if not 0 <= label_idx < width:
        raise ParseError(f"{path}: label column {label_column} out of range")

    features = np.empty((len(rows), width - 1))
    label_map: Dict[str, int] = {}
    labels = np.empty(len(rows), dtype=int)
    for i, row in enumerate(rows):
        if len(row) != width:
            raise RaggedRows(f"{path}: row {i + 1} has {len(row)} columns, expected {width}")
        col_out = 0
        for j, cell in enumerate(row):
            if j == label_idx:
                if cell not in label_map:
                    label_map[cell] = len(label_map)
                labels[i] = label_map[cell]
                continue
            try:
                features[i, col_out] = float(cell)
            except ValueError:
                raise ParseError(
                    f"{path}: non-numeric value {cell!r} at row {i + 1}, column {j + 1}"
                ) from None
            col_out += 1
    return Dataset(
        name=name or str(path),
        data=features,
        labels=labels,
        class_count=len(label_map),
        label_names=tuple(label_map),
    )


def fit_pca(train: np.ndarray, d: int) -> PcaTransform:
    """Top-d eigenvectors of the training covariance, deterministic signs.

    No whitening: projected coordinates keep the original variances. Signs
    are fixed by making each component's largest-magnitude entry positive.
    """
    X = np.asarray(train, dtype=float)
    n, m = X.shape
    if not 1 <= d <= m:
        raise ValueError(f"need 1 <= d <= {m}, got {d}")
    if n < 2:
        raise ValueError("PCA needs at least two rows")
    mean = X.mean(axis=0)
    xc = X - mean
    cov = xc.T @ xc / n
    eigvals, eigvecs = np.linalg.eigh(cov)
    order = np.argsort(eigvals)[::-1]
    eigvals, eigvecs = eigvals[order], eigvecs[:, order]
    tol = max(n, m) * np.finfo(float).eps * max(eigvals[0], 0.0)
    if eigvals[d - 1] <= tol:
        raise RankDeficient(f"requested {d} components but covariance rank is lower")
    components = eigvecs[:, :d].T
    for row in components:
        if row[np.argmax(np.abs(row))] < 0:
            row *= -1.0
    return PcaTransform(mean=mean, components=components)


def apply_pca(transform: PcaTransform, data: np.ndarray) -> np.ndarray:
    """Project rows: (data - mean) @ components^T."""
    X = np.asarray(data, dtype=float)
    if X.ndim != 2 or X.shape[1] != transform.mean.shape[0]:
        raise DimensionMismatch(
            f"data of width {X.shape[-1]} vs transform of width {transform.mean.shape[0]}"
        )
    return (X - transform.mean) @ transform.components.T


def split(dataset: Dataset, train_fraction: float, seed: int) -> Tuple[Dataset, Dataset]:
    """Seeded shuffle then prefix split; retries until train covers all classes.

    Not stratified. If 100 reshuffles never place every class in the training
    part, raises ClassMissingFromTrain.
    """
    if not 0.0 < train_fraction < 1.0:
        raise ValueError("train_fraction must lie strictly between 0 and 1")
    n = len(dataset)
    n_train = int(round(train_fraction * n))
    n_train = min(max(n_train, 1), n - 1)
    rng = np.random.default_rng(seed)
    for _ in range(_SPLIT_RETRIES):
        perm = rng.permutation(n)
        train_idx, test_idx = perm[:n_train], perm[n_train:]
        present = np.unique(dataset.labels[train_idx])
        if present.size == dataset.class_count:
            train = Dataset(
                name=dataset.name,
                data=dataset.data[train_idx],
                labels=dataset.labels[train_idx],
                class_count=dataset.class_count,
                label_names=dataset.label_names,
            )
            test = Dataset(
                name=dataset.name,
                data=dataset.data[test_idx],
                labels=dataset.labels[test_idx],
                class_count=dataset.class_count,
                label_names=dataset.label_names,
            )
            return train, test
    raise ClassMissingFromTrain(
        f"{dataset.name}: some class never appeared in the training part after "
        f"{_SPLIT_RETRIES} shuffles"
    )
