"""
K-Nearest Neighbors classifier.

Brute-force Euclidean distances to every training vector; majority label
among the k nearest. Equal distances are ordered by training index.
"""

from dataclasses import dataclass

import numpy as np

from ..data.dataset import BinaryLabel
from .distance import check_query, distances_to, nearest
from ..utils.errors import ModelError


def feature_values(q) -> np.ndarray:
    """Accept a FeatureVector or a plain sequence."""
    return getattr(q, "values", q)


def validate_neighbors(count: int, n_train: int, name: str = "k"):
    if int(count) != count or count < 1 or count % 2 == 0:
        raise ModelError(f"{name} must be an odd positive integer, got {count}")
    if count > n_train:
        raise ModelError(f"{name}={count} exceeds the {n_train} training records")


def validate_training(train_matrix, train_labels):
    train_matrix = np.asarray(train_matrix, dtype=np.float64)
    train_labels = np.asarray(train_labels, dtype=np.int64)
    if train_matrix.ndim != 2 or train_matrix.shape[0] == 0:
        raise ModelError("training matrix must be a non-empty 2-D array")
    if train_labels.shape != (train_matrix.shape[0],):
        raise ModelError(
            f"{train_labels.shape[0]} labels for {train_matrix.shape[0]} training vectors"
        )
    if not np.isin(train_labels, (0, 1)).all():
        raise ModelError("training labels must be 0 (ADL) or 1 (FALL)")
    return train_matrix, train_labels


@dataclass(frozen=True, eq=False)
class KnnModel:
    train_matrix: np.ndarray
    train_labels: np.ndarray
    k: int

    name = "knn"

    @classmethod
    def fit(cls, train_matrix, train_labels, k: int) -> "KnnModel":
        train_matrix, train_labels = validate_training(train_matrix, train_labels)
        validate_neighbors(k, train_matrix.shape[0], "k")
        return cls(train_matrix=train_matrix, train_labels=train_labels, k=int(k))

    @property
    def dimension(self) -> int:
        return int(self.train_matrix.shape[1])

    def classify(self, q) -> int:
        q = check_query(self.train_matrix, feature_values(q))
        neighbors = nearest(distances_to(self.train_matrix, q), self.k)
        falls = int(np.sum(self.train_labels[neighbors]))
        return 1 if 2 * falls > self.k else 0

    def classify_many(self, queries) -> np.ndarray:
        return np.array([self.classify(q) for q in np.asarray(queries)], dtype=np.int64)


def knn_classify(m: KnnModel, q) -> BinaryLabel:
    return BinaryLabel.from_code(m.classify(q))
