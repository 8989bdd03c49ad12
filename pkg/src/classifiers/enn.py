"""
Extended Nearest Neighbors classifier.

Besides the query's own nearest neighbors, ENN counts the training records
that would see the query among *their* e nearest neighbors. For each
candidate class c the query is tentatively labelled c and the class-wise
statistic

    T(c) = sum_i  S_i / (n_i * e)

is evaluated over the augmented set, where n_i is the size of class i and
S_i counts, over every member of class i, how many of its e nearest
neighbors share its class. The class with the largest T wins; ties go to
FALL.

The e-NN map of the training set is built once. At query time only the
records whose e-th neighbor is farther than the query change their lists,
so the statistic is updated incrementally instead of recomputed.
"""

import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence, Tuple

import numpy as np

from ..data.dataset import BinaryLabel
from .distance import check_query, distances_to, nearest
from .knn import feature_values, validate_neighbors, validate_training
from ..utils.errors import ModelError

logger = logging.getLogger(__name__)


def class_statistic(same_counts: Sequence[int], class_sizes: Sequence[int], e: int) -> Fraction:
    """Sum over classes of S_i / (n_i * e), computed exactly."""
    return sum(
        (Fraction(int(s), int(n) * e) for s, n in zip(same_counts, class_sizes) if n > 0),
        Fraction(0),
    )


def _decide(statistics: Sequence[Fraction]) -> int:
    # ties resolve to FALL: a missed fall is the costly error
    return 1 if statistics[1] >= statistics[0] else 0


@dataclass(frozen=True, eq=False)
class EnnModel:
    train_matrix: np.ndarray
    train_labels: np.ndarray
    e: int
    neighbor_lists: np.ndarray    # (n, e) training indices, self excluded
    radius: np.ndarray            # distance to each record's e-th neighbor
    class_counts: Tuple[int, int]  # (n_ADL, n_FALL)

    name = "enn"

    def __post_init__(self):
        labels = self.train_labels
        same = labels[self.neighbor_lists] == labels[:, np.newaxis]
        object.__setattr__(self, "_same_counts", same.sum(axis=1))
        object.__setattr__(self, "_class_same", tuple(
            int(self._same_counts[labels == c].sum()) for c in (0, 1)
        ))
        object.__setattr__(self, "_evicted_same", same[:, -1])

    @property
    def dimension(self) -> int:
        return int(self.train_matrix.shape[1])

    def statistics(self, q) -> Tuple[Fraction, Fraction]:
        """Class-wise statistic T(c) for c = ADL, FALL."""
        q = check_query(self.train_matrix, feature_values(q))
        labels = self.train_labels
        dq = distances_to(self.train_matrix, q)

        # the query has the highest index in the augmented set, so it only
        # displaces an existing neighbor when strictly closer
        affected = dq < self.radius
        entered = [int(np.sum(affected & (labels == i))) for i in (0, 1)]
        lost = [int(np.sum(affected & (labels == i) & self._evicted_same)) for i in (0, 1)]
        query_neighbors = labels[nearest(dq, self.e)]

        result = []
        for c in (0, 1):
            same = []
            sizes = []
            for i in (0, 1):
                s = self._class_same[i] - lost[i]
                if i == c:
                    s += entered[i] + int(np.sum(query_neighbors == c))
                same.append(s)
                sizes.append(self.class_counts[i] + (1 if i == c else 0))
            result.append(class_statistic(same, sizes, self.e))
        return result[0], result[1]

    def classify(self, q) -> int:
        return _decide(self.statistics(q))

    def classify_many(self, queries) -> np.ndarray:
        return np.array([self.classify(q) for q in np.asarray(queries)], dtype=np.int64)


def enn_preprocess(train, labels, e: int) -> EnnModel:
    """
    Build the e-NN map of the training set.

    Runs one distance pass and one sort per training record: O(n^2 log n).

    Raises:
        ModelError: If e >= n_train, e is not odd, or one class is missing
    """
    train, labels = validate_training(train, labels)
    n = train.shape[0]
    if e >= n:
        raise ModelError(f"e={e} must be smaller than the {n} training records")
    validate_neighbors(e, n - 1, "e")
    counts = (int(np.sum(labels == 0)), int(np.sum(labels == 1)))
    if 0 in counts:
        raise ModelError("ENN needs both ADL and FALL records in the training set")

    neighbor_lists = np.empty((n, e), dtype=np.int64)
    radius = np.empty(n, dtype=np.float64)
    for s in range(n):
        d = distances_to(train, train[s])
        d[s] = np.inf
        idx = nearest(d, e)
        neighbor_lists[s] = idx
        radius[s] = d[idx[-1]]

    logger.debug(f"Built {e}-NN map for {n} training records")
    return EnnModel(
        train_matrix=train,
        train_labels=labels,
        e=int(e),
        neighbor_lists=neighbor_lists,
        radius=radius,
        class_counts=counts,
    )


def enn_statistics_from_scratch(train, labels, e: int, q) -> Tuple[Fraction, Fraction]:
    """
    Reference implementation: for each tentative class, rebuild every
    neighbor list of the augmented set and evaluate the statistic directly.
    """
    train, labels = validate_training(train, labels)
    q = check_query(train, feature_values(q))
    augmented = np.vstack([train, q])
    result = []
    for c in (0, 1):
        aug_labels = np.append(labels, c)
        same = [0, 0]
        for j in range(augmented.shape[0]):
            d = distances_to(augmented, augmented[j])
            d[j] = np.inf
            idx = nearest(d, e)
            same[aug_labels[j]] += int(np.sum(aug_labels[idx] == aug_labels[j]))
        sizes = [int(np.sum(aug_labels == i)) for i in (0, 1)]
        result.append(class_statistic(same, sizes, e))
    return result[0], result[1]


def enn_classify_from_scratch(train, labels, e: int, q) -> BinaryLabel:
    return BinaryLabel.from_code(_decide(enn_statistics_from_scratch(train, labels, e, q)))


def enn_classify(m: EnnModel, q) -> BinaryLabel:
    return BinaryLabel.from_code(m.classify(q))
