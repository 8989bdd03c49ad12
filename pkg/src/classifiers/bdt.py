"""
Binary decision tree (CART, Gini impurity).

Greedy axis-aligned splits at midpoints between consecutive distinct
feature values. No depth limit and no pruning: a node becomes a leaf when
it is pure or when its records are identical on every feature. At query
time a value below the threshold goes left, otherwise right.
"""

import logging
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from ..data.dataset import BinaryLabel
from .distance import check_query
from .knn import feature_values, validate_training

logger = logging.getLogger(__name__)

LEAF = -1
_TIE_TOLERANCE = 1e-12


@dataclass(frozen=True, eq=False)
class BdtModel:
    """Tree stored as parallel node arrays; node 0 is the root."""
    feature: np.ndarray     # split feature index, LEAF for leaves
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    label: np.ndarray       # leaf label (0 ADL, 1 FALL)
    counts: np.ndarray      # (nodes, 2) training records per class reaching the node
    dimension: int

    name = "bdt"

    @property
    def n_nodes(self) -> int:
        return int(self.feature.shape[0])

    @property
    def n_leaves(self) -> int:
        return int(np.sum(self.feature == LEAF))

    @property
    def depth(self) -> int:
        depths = np.zeros(self.n_nodes, dtype=np.int64)
        for node in range(self.n_nodes):
            if self.feature[node] != LEAF:
                depths[self.left[node]] = depths[node] + 1
                depths[self.right[node]] = depths[node] + 1
        return int(depths.max())

    def classify(self, q) -> int:
        q = check_query(np.empty((0, self.dimension)), feature_values(q))
        node = 0
        while self.feature[node] != LEAF:
            if q[self.feature[node]] < self.threshold[node]:
                node = self.left[node]
            else:
                node = self.right[node]
        return int(self.label[node])

    def classify_many(self, queries) -> np.ndarray:
        return np.array([self.classify(q) for q in np.asarray(queries)], dtype=np.int64)


def _gini(falls: np.ndarray, total: np.ndarray) -> np.ndarray:
    p = falls / total
    return 2.0 * p * (1.0 - p)


def _majority(counts: np.ndarray) -> int:
    # ties resolve to FALL
    return 1 if counts[1] >= counts[0] else 0


def best_split(x: np.ndarray, y: np.ndarray) -> Optional[Tuple[int, float, float]]:
    """
    Find the split minimizing weighted Gini impurity.

    Ties are broken by lowest feature index, then lowest threshold.

    Returns:
        (feature, threshold, weighted_impurity), or None when no two records differ
    """
    m = x.shape[0]
    if m < 2:
        return None
    order = np.argsort(x, axis=0, kind="stable")
    sorted_x = np.take_along_axis(x, order, axis=0)
    sorted_y = y[order]

    n_left = np.arange(1, m, dtype=np.float64)[:, np.newaxis]
    n_right = m - n_left
    falls_left = np.cumsum(sorted_y, axis=0)[:-1].astype(np.float64)
    falls_right = float(y.sum()) - falls_left
    weighted = (n_left * _gini(falls_left, n_left) + n_right * _gini(falls_right, n_right)) / m

    valid = sorted_x[1:] > sorted_x[:-1]
    weighted = np.where(valid, weighted, np.inf)
    per_feature = weighted.min(axis=0)
    best = per_feature.min()
    if not np.isfinite(best):
        return None

    feature = int(np.flatnonzero(per_feature <= best + _TIE_TOLERANCE)[0])
    column = weighted[:, feature]
    position = int(np.flatnonzero(column <= best + _TIE_TOLERANCE)[0])
    lo, hi = sorted_x[position, feature], sorted_x[position + 1, feature]
    threshold = (lo + hi) / 2.0
    if not lo < threshold <= hi:
        threshold = hi
    return feature, float(threshold), float(column[position])


def bdt_train(train, labels) -> BdtModel:
    """
    Grow a CART tree to purity.

    Raises:
        ModelError: On an empty training set
    """
    train, labels = validate_training(train, labels)

    feature: List[int] = []
    threshold: List[float] = []
    left: List[int] = []
    right: List[int] = []
    label: List[int] = []
    counts: List[Tuple[int, int]] = []

    def new_node(idx: np.ndarray) -> int:
        falls = int(labels[idx].sum())
        node_counts = (idx.size - falls, falls)
        feature.append(LEAF)
        threshold.append(0.0)
        left.append(LEAF)
        right.append(LEAF)
        label.append(_majority(np.array(node_counts)))
        counts.append(node_counts)
        return len(feature) - 1

    root = new_node(np.arange(train.shape[0]))
    pending = [(root, np.arange(train.shape[0]))]
    while pending:
        node, idx = pending.pop()
        if counts[node][0] == 0 or counts[node][1] == 0:
            continue
        split = best_split(train[idx], labels[idx])
        if split is None:
            continue
        f, thr, _ = split
        goes_left = train[idx, f] < thr
        feature[node] = f
        threshold[node] = thr
        left[node] = new_node(idx[goes_left])
        right[node] = new_node(idx[~goes_left])
        pending.append((right[node], idx[~goes_left]))
        pending.append((left[node], idx[goes_left]))

    model = BdtModel(
        feature=np.array(feature, dtype=np.int64),
        threshold=np.array(threshold, dtype=np.float64),
        left=np.array(left, dtype=np.int64),
        right=np.array(right, dtype=np.int64),
        label=np.array(label, dtype=np.int64),
        counts=np.array(counts, dtype=np.int64).reshape(-1, 2),
        dimension=int(train.shape[1]),
    )
    logger.debug(f"Grew tree: {model.n_nodes} nodes, {model.n_leaves} leaves, depth {model.depth}")
    return model


def bdt_classify(m: BdtModel, q) -> BinaryLabel:
    return BinaryLabel.from_code(m.classify(q))
