"""Euclidean distance helpers shared by the neighbor classifiers."""

import numpy as np

from ..utils.errors import DimensionMismatchError


def check_query(train: np.ndarray, q) -> np.ndarray:
    q = np.asarray(q, dtype=np.float64)
    if q.ndim != 1 or q.shape[0] != train.shape[1]:
        raise DimensionMismatchError(
            f"query has dimension {q.shape[-1] if q.ndim else 0}, model expects {train.shape[1]}"
        )
    return q


def distances_to(train: np.ndarray, q: np.ndarray) -> np.ndarray:
    """L2 distance from every row of train to q."""
    diff = train - q
    return np.sqrt(np.sum(diff * diff, axis=1))


def nearest(dist: np.ndarray, count: int) -> np.ndarray:
    """Indices of the `count` smallest distances; ties go to the lower index."""
    return np.argsort(dist, kind="stable")[:count]
