"""
Monte-Carlo cross-validation protocol.

For each fold: split, train every selected classifier, classify each test
record individually with a monotonic clock, accumulate confusion counts.
Features are extracted once per dataset and indexed per fold, since every
extractor works on a single record.
"""

import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from .metrics import ConfusionCounts, Metrics, average_metrics, compute_metrics, METRIC_NAMES
from ..classifiers.bdt import bdt_train
from ..classifiers.enn import enn_preprocess
from ..classifiers.knn import KnnModel
from ..classifiers.voting import VotingModel
from ..data.dataset import Dataset
from ..data.splits import SplitSpec, split_indices
from ..features.assembler import FeatureConfig, FeatureMatrix, extract_matrix
from ..utils.errors import FeatureConfigError, FoldError, ModelError, SplitError

logger = logging.getLogger(__name__)

CLASSIFIER_ORDER = ("knn", "enn", "bdt", "vm")


@dataclass(frozen=True)
class ClassifierSelection:
    """Which classifiers a run trains. None disables KNN or ENN."""
    knn_k: Optional[int] = 5
    enn_e: Optional[int] = 5
    bdt: bool = True
    vm: bool = True

    def __post_init__(self):
        if self.vm and (self.knn_k is None or self.enn_e is None or not self.bdt):
            raise ModelError("the voting machine needs KNN, ENN and BDT selected")
        if not self.names:
            raise ModelError("at least one classifier must be selected")

    @property
    def names(self) -> Tuple[str, ...]:
        chosen = {
            "knn": self.knn_k is not None,
            "enn": self.enn_e is not None,
            "bdt": self.bdt,
            "vm": self.vm,
        }
        return tuple(name for name in CLASSIFIER_ORDER if chosen[name])

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


@dataclass
class FoldResult:
    fold_index: int
    train_size: int
    test_size: int
    train_counts: Dict[str, int]
    test_counts: Dict[str, int]
    confusion: Dict[str, ConfusionCounts]
    metrics: Dict[str, Metrics]
    mean_latency_ms: Dict[str, float] = field(default_factory=dict)
    enn_preprocess_s: Optional[float] = None
    bdt_train_s: Optional[float] = None

    def undefined(self) -> Dict[str, List[str]]:
        return {name: m.undefined() for name, m in self.metrics.items() if m.undefined()}

    def to_dict(self, include_timing: bool = True) -> Dict[str, Any]:
        data = {
            "fold": self.fold_index,
            "train_size": self.train_size,
            "test_size": self.test_size,
            "train_counts": self.train_counts,
            "test_counts": self.test_counts,
            "confusion": {name: c.to_dict() for name, c in self.confusion.items()},
            "metrics": {name: m.to_dict() for name, m in self.metrics.items()},
        }
        if include_timing:
            data["mean_latency_ms"] = self.mean_latency_ms
            data["enn_preprocess_s"] = self.enn_preprocess_s
            data["bdt_train_s"] = self.bdt_train_s
        return data


@dataclass
class EvalReport:
    """Per-fold results plus fold-averaged metrics and the configuration echo."""
    config: Dict[str, Any]
    folds: List[FoldResult]
    averages: Dict[str, Dict[str, Optional[float]]]
    undefined_folds: Dict[str, Dict[str, int]]
    mean_latency_ms: Dict[str, float] = field(default_factory=dict)
    feature_ms_per_record: Optional[float] = None
    enn_preprocess_s: Optional[float] = None
    bdt_train_s: Optional[float] = None
    include_timing: bool = True

    @property
    def classifiers(self) -> Tuple[str, ...]:
        return tuple(self.averages)

    @property
    def has_undefined(self) -> bool:
        return any(count for per in self.undefined_folds.values() for count in per.values())

    def to_dict(self) -> Dict[str, Any]:
        data = {
            "type": "evaluation",
            "config": self.config,
            "averages": self.averages,
            "undefined_folds": self.undefined_folds,
            "folds": [f.to_dict(self.include_timing) for f in self.folds],
        }
        if self.include_timing:
            data["timing"] = {
                "mean_latency_ms": self.mean_latency_ms,
                "feature_ms_per_record": self.feature_ms_per_record,
                "enn_preprocess_s": self.enn_preprocess_s,
                "bdt_train_s": self.bdt_train_s,
            }
        return data


@dataclass
class _TrainedFold:
    fold_index: int
    train_idx: np.ndarray
    test_idx: np.ndarray
    models: Dict[str, Any]
    enn_preprocess_s: Optional[float]
    bdt_train_s: Optional[float]


def _train_fold(matrix: FeatureMatrix, spec: SplitSpec, selection: ClassifierSelection,
                fold_index: int) -> _TrainedFold:
    train_idx, test_idx = split_indices(len(matrix), spec, fold_index)
    x, y = matrix.values[train_idx], matrix.labels[train_idx]
    if y.min() == y.max():
        raise SplitError("training split holds a single class")

    models: Dict[str, Any] = {}
    enn_s = bdt_s = None
    if selection.knn_k is not None:
        models["knn"] = KnnModel.fit(x, y, selection.knn_k)
    if selection.enn_e is not None:
        start = time.perf_counter_ns()
        models["enn"] = enn_preprocess(x, y, selection.enn_e)
        enn_s = (time.perf_counter_ns() - start) / 1e9
    if selection.bdt:
        start = time.perf_counter_ns()
        models["bdt"] = bdt_train(x, y)
        bdt_s = (time.perf_counter_ns() - start) / 1e9
    if selection.vm:
        models["vm"] = VotingModel(knn=models["knn"], enn=models["enn"], bdt=models["bdt"])
    return _TrainedFold(fold_index, train_idx, test_idx, models, enn_s, bdt_s)


def _test_fold(matrix: FeatureMatrix, trained: _TrainedFold,
               selection: ClassifierSelection) -> FoldResult:
    x_test = matrix.values[trained.test_idx]
    y_test = matrix.labels[trained.test_idx]
    names = selection.names
    predictions = {name: np.empty(len(y_test), dtype=np.int64) for name in names}
    elapsed_ns = {name: 0 for name in names}

    for row, q in enumerate(x_test):
        if selection.vm:
            result = trained.models["vm"].predict(q)
            for name in names:
                label = result.label if name == "vm" else result.per_classifier[name]
                predictions[name][row] = label.code
                elapsed_ns[name] += result.latency_ns[name]
            continue
        for name in names:
            start = time.perf_counter_ns()
            predictions[name][row] = trained.models[name].classify(q)
            elapsed_ns[name] += time.perf_counter_ns() - start

    confusion = {name: ConfusionCounts.from_labels(y_test, predictions[name]) for name in names}
    y_train = matrix.labels[trained.train_idx]
    return FoldResult(
        fold_index=trained.fold_index,
        train_size=len(trained.train_idx),
        test_size=len(trained.test_idx),
        train_counts={"ADL": int(np.sum(y_train == 0)), "FALL": int(np.sum(y_train == 1))},
        test_counts={"ADL": int(np.sum(y_test == 0)), "FALL": int(np.sum(y_test == 1))},
        confusion=confusion,
        metrics={name: compute_metrics(c) for name, c in confusion.items()},
        mean_latency_ms={name: elapsed_ns[name] / len(y_test) / 1e6 for name in names},
        enn_preprocess_s=trained.enn_preprocess_s,
        bdt_train_s=trained.bdt_train_s,
    )


def _run_fold_step(step, fold_index: int, *args):
    try:
        return step(*args)
    except FoldError:
        raise
    except Exception as e:
        raise FoldError(fold_index, e) from e


def _mean(values: List[Optional[float]]) -> Optional[float]:
    values = [v for v in values if v is not None]
    return float(np.mean(values)) if values else None


def run_protocol(ds: Dataset, cfg: FeatureConfig, selection: ClassifierSelection,
                 spec: SplitSpec, threads: int = 1, matrix: Optional[FeatureMatrix] = None,
                 report_timing: bool = True) -> EvalReport:
    """
    Run the repeated random-split evaluation and average the metrics.

    Args:
        ds: Labelled dataset
        cfg: Feature configuration
        selection: Classifiers to train and test
        spec: Train fraction, fold count and seed
        threads: Worker threads for feature extraction and fold training.
            Test-record classification is always timed on one thread.
        matrix: Pre-extracted features for ds (must match cfg)
        report_timing: Include timing fields in the report

    Returns:
        EvalReport with per-fold results and fold averages

    Raises:
        FoldError: Wrapping any error raised inside a fold
    """
    if matrix is None:
        matrix = extract_matrix(ds, cfg, threads)
    elif matrix.config_hash != cfg.config_hash or len(matrix) != len(ds):
        raise FeatureConfigError("feature matrix was not extracted from this dataset/configuration")

    folds = range(spec.folds)
    logger.info(
        f"Running {spec.folds} folds ({spec.train_fraction:.0%} train) on {ds.name}: "
        f"classifiers {', '.join(selection.names)}, features [{cfg.label}]"
    )

    if threads > 1 and spec.folds > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            trained = list(pool.map(
                lambda i: _run_fold_step(_train_fold, i, matrix, spec, selection, i), folds
            ))
    else:
        trained = [_run_fold_step(_train_fold, i, matrix, spec, selection, i) for i in folds]

    results = []
    for t in trained:
        result = _run_fold_step(_test_fold, t.fold_index, matrix, t, selection)
        for name, missing in result.undefined().items():
            logger.warning(f"Fold {t.fold_index}: {name} has undefined {', '.join(missing)}")
        logger.debug(
            f"Fold {t.fold_index}: "
            + ", ".join(f"{n}={m.accuracy:.2f}%" for n, m in result.metrics.items()
                        if m.accuracy is not None)
        )
        results.append(result)

    names = selection.names
    averages = {name: average_metrics(r.metrics[name] for r in results) for name in names}
    undefined_folds = {
        name: {metric: sum(1 for r in results if getattr(r.metrics[name], metric) is None)
               for metric in METRIC_NAMES}
        for name in names
    }
    config = {
        "dataset": {
            "name": ds.name,
            "records": len(ds),
            "record_length": ds.expected_length,
            "fs": ds.fs,
            "class_counts": ds.class_counts(),
        },
        "features": {**cfg.to_dict(), "label": cfg.label,
                     "dimension": cfg.vector_length(ds.expected_length)},
        "classifiers": selection.to_dict(),
        "split": asdict(spec),
    }
    report = EvalReport(
        config=config,
        folds=results,
        averages=averages,
        undefined_folds=undefined_folds,
        mean_latency_ms={name: _mean([r.mean_latency_ms[name] for r in results]) for name in names},
        feature_ms_per_record=float(np.mean(matrix.extraction_ms)) if len(matrix) else None,
        enn_preprocess_s=_mean([r.enn_preprocess_s for r in results]),
        bdt_train_s=_mean([r.bdt_train_s for r in results]),
        include_timing=report_timing,
    )
    for name in names:
        accuracy = averages[name]["accuracy"]
        shown = "undefined" if accuracy is None else f"{accuracy:.2f}%"
        logger.info(f"{name.upper()}: mean accuracy {shown} over {spec.folds} folds")
    check_timing_order(report.mean_latency_ms)
    return report


def check_timing_order(mean_latency_ms: Dict[str, float]) -> Optional[bool]:
    """
    Soft check that per-record classification time orders BDT < ENN < KNN.

    ENN reuses the KNN distance pass and only adds an incremental statistic
    update, so on small training sets the two can swap; a violation is
    logged, never raised.

    Returns:
        Whether the ordering holds, or None when a classifier was not run
    """
    if not all(mean_latency_ms.get(name) is not None for name in ("bdt", "enn", "knn")):
        return None
    bdt, enn, knn = (mean_latency_ms[name] for name in ("bdt", "enn", "knn"))
    shown = f"BDT {bdt:.4f} ms, ENN {enn:.4f} ms, KNN {knn:.4f} ms"
    holds = bdt < enn < knn
    if holds:
        logger.info(f"Timing order BDT < ENN < KNN holds: {shown}")
    else:
        logger.warning(f"Timing order BDT < ENN < KNN not observed: {shown}")
    return holds
