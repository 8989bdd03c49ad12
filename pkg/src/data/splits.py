"""
Monte-Carlo cross-validation splits.

Each fold draws a fresh seeded permutation and cuts it at the train
fraction, so folds are repeated independent random splits rather than
disjoint partitions. Splits are unstratified.
"""

import logging
from dataclasses import dataclass
from decimal import Decimal, ROUND_FLOOR, ROUND_HALF_UP
from typing import Tuple

import numpy as np

from .dataset import BinaryLabel, Dataset
from ..utils.errors import SplitError
from ..utils.seeding import stream

logger = logging.getLogger(__name__)

ROUNDING_MODES = {"half_up": ROUND_HALF_UP, "floor": ROUND_FLOOR}


@dataclass(frozen=True)
class SplitSpec:
    """Train fraction, fold count and seed for the evaluation protocol."""
    train_fraction: float = 0.70
    folds: int = 5
    seed: int = 0
    rounding: str = "half_up"

    def __post_init__(self):
        if not 0 < self.train_fraction < 1:
            raise SplitError(f"train_fraction must be in (0, 1), got {self.train_fraction}")
        if int(self.folds) < 1:
            raise SplitError(f"folds must be at least 1, got {self.folds}")
        if self.rounding not in ROUNDING_MODES:
            raise SplitError(
                f"rounding must be one of {', '.join(ROUNDING_MODES)}, got '{self.rounding}'"
            )

    def train_size(self, n: int) -> int:
        """Number of training records for a dataset of n records."""
        # Decimal keeps e.g. 0.7 * 10 from landing on 7.000000000000001
        exact = Decimal(str(self.train_fraction)) * n
        return int(exact.quantize(Decimal(1), rounding=ROUNDING_MODES[self.rounding]))


def split_indices(n: int, spec: SplitSpec, fold_index: int) -> Tuple[np.ndarray, np.ndarray]:
    """
    Compute the train/test index arrays for one fold.

    Args:
        n: Dataset size
        spec: Split specification
        fold_index: Fold number in [0, spec.folds)

    Returns:
        (train_indices, test_indices) in permutation order

    Raises:
        SplitError: If fold_index is out of range or a side would be empty
    """
    if not 0 <= fold_index < spec.folds:
        raise SplitError(f"fold_index {fold_index} out of range [0, {spec.folds})")
    n_train = spec.train_size(n)
    if n_train < 1 or n_train >= n:
        raise SplitError(
            f"train fraction {spec.train_fraction} leaves an empty side for n={n} (train={n_train})"
        )
    permutation = stream(spec.seed, "split", fold_index).permutation(n)
    return permutation[:n_train], permutation[n_train:]


def shuffle_split(ds: Dataset, spec: SplitSpec, fold_index: int) -> Tuple[Dataset, Dataset]:
    """
    Randomize the dataset and divide it into train and test sets.

    Raises:
        SplitError: On a bad fold index or a dataset lacking one of the classes
    """
    counts = ds.class_counts()
    missing = [label for label, count in counts.items() if count == 0]
    if missing:
        raise SplitError(f"dataset '{ds.name}' has no records labelled {', '.join(missing)}")

    train_idx, test_idx = split_indices(len(ds), spec, fold_index)
    train = ds.subset(train_idx, name=f"{ds.name}[train:{fold_index}]")
    test = ds.subset(test_idx, name=f"{ds.name}[test:{fold_index}]")
    logger.debug(
        f"Fold {fold_index}: train={len(train)} {train.class_counts()}, "
        f"test={len(test)} {test.class_counts()}"
    )
    return train, test


def stratified_subset(ds: Dataset, size: int, seed: int) -> Dataset:
    """Draw a class-proportional subset of the dataset."""
    if not 0 < size <= len(ds):
        raise SplitError(f"subset size must be in [1, {len(ds)}], got {size}")
    labels = ds.labels()
    rng = stream(seed, "stratified_subset")
    chosen = []
    for code in (BinaryLabel.ADL.code, BinaryLabel.FALL.code):
        members = np.flatnonzero(labels == code)
        take = int(round(size * len(members) / len(ds)))
        chosen.append(rng.permutation(members)[:take])
    indices = np.sort(np.concatenate(chosen))
    return ds.subset(indices, name=f"{ds.name}[subset:{len(indices)}]")
