"""
Confusion counts and the five performance criteria.

FALL is the positive class. A metric whose denominator is zero is
undefined and reported as None, never as zero.
"""

from dataclasses import asdict, dataclass
from typing import Dict, Iterable, Optional

import numpy as np

METRIC_NAMES = ("accuracy", "recall", "precision", "f1", "specificity")


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int = 0
    fp: int = 0
    tn: int = 0
    fn: int = 0

    def __post_init__(self):
        if min(self.tp, self.fp, self.tn, self.fn) < 0:
            raise ValueError("confusion counts must be non-negative")

    @classmethod
    def from_labels(cls, y_true: Iterable[int], y_pred: Iterable[int]) -> "ConfusionCounts":
        y_true = np.asarray(list(y_true), dtype=np.int64)
        y_pred = np.asarray(list(y_pred), dtype=np.int64)
        if y_true.shape != y_pred.shape:
            raise ValueError("label arrays differ in length")
        return cls(
            tp=int(np.sum((y_true == 1) & (y_pred == 1))),
            fp=int(np.sum((y_true == 0) & (y_pred == 1))),
            tn=int(np.sum((y_true == 0) & (y_pred == 0))),
            fn=int(np.sum((y_true == 1) & (y_pred == 0))),
        )

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn

    def to_dict(self) -> Dict[str, int]:
        return asdict(self)


@dataclass(frozen=True)
class Metrics:
    """Percentages in [0, 100]; None marks an undefined metric."""
    accuracy: Optional[float]
    recall: Optional[float]
    precision: Optional[float]
    f1: Optional[float]
    specificity: Optional[float]

    def to_dict(self) -> Dict[str, Optional[float]]:
        return asdict(self)

    def undefined(self) -> list:
        return [name for name, value in self.to_dict().items() if value is None]


def _ratio(numerator: int, denominator: int) -> Optional[float]:
    if denominator == 0:
        return None
    return 100.0 * numerator / denominator


def compute_metrics(c: ConfusionCounts) -> Metrics:
    """
    Accuracy, recall, precision, F1 and specificity as percentages.

    Args:
        c: Confusion counts for one test set

    Returns:
        Metrics with undefined values set to None
    """
    accuracy = _ratio(c.tp + c.tn, c.total)
    recall = _ratio(c.tp, c.tp + c.fn)
    precision = _ratio(c.tp, c.tp + c.fp)
    specificity = _ratio(c.tn, c.tn + c.fp)
    if precision is None or recall is None or precision + recall == 0:
        f1 = None
    else:
        f1 = 2 * precision * recall / (precision + recall)
    return Metrics(accuracy, recall, precision, f1, specificity)


def average_metrics(per_fold: Iterable[Metrics]) -> Dict[str, Optional[float]]:
    """Arithmetic mean per metric over the folds where it is defined."""
    per_fold = list(per_fold)
    averaged = {}
    for name in METRIC_NAMES:
        values = [getattr(m, name) for m in per_fold if getattr(m, name) is not None]
        averaged[name] = float(np.mean(values)) if values else None
    return averaged
