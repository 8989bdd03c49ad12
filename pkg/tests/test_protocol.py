"""
Evaluation protocol and sweep tests.
"""

import logging

import numpy as np
import pytest

from src.data.dataset import BinaryLabel, Dataset
from src.data.splits import SplitSpec
from src.evaluation.protocol import ClassifierSelection, check_timing_order, run_protocol
from src.evaluation.sweeps import (
    DEFAULT_NEIGHBORS, REFERENCE_COMBINATIONS, sweep_features, sweep_neighbors, reference_configs,
)
from src.features.assembler import FeatureConfig, extract_matrix
from src.features.wavelets import WaveletSpec
from src.utils.errors import FeatureConfigError, FoldError, ModelError
from src.utils.report_formatter import UNDEFINED, report_formatter

RAW = FeatureConfig.from_names("raw")
SPEC = SplitSpec(train_fraction=0.7, folds=5, seed=0)


def test_separable_blobs_score_high(blobs):
    report = run_protocol(blobs, RAW, ClassifierSelection(knn_k=3, enn_e=3), SPEC)
    assert report.classifiers == ("knn", "enn", "bdt", "vm")
    for name in report.classifiers:
        assert report.averages[name]["accuracy"] >= 95.0
    for fold in report.folds:
        assert fold.train_size == 42
        assert fold.test_size == 18
        for counts in fold.confusion.values():
            assert counts.total == fold.test_size
    assert not report.has_undefined


def test_seeded_runs_are_identical(blobs):
    selection = ClassifierSelection(knn_k=3, enn_e=3)
    first = run_protocol(blobs, RAW, selection, SPEC, report_timing=False)
    second = run_protocol(blobs, RAW, selection, SPEC, report_timing=False)
    assert first.to_dict() == second.to_dict()
    assert "timing" not in first.to_dict()
    for fmt in ("text", "csv", "json"):
        assert (report_formatter.format_eval_report(first, fmt)
                == report_formatter.format_eval_report(second, fmt))


def test_threaded_training_gives_same_metrics(blobs):
    selection = ClassifierSelection(knn_k=3, enn_e=3)
    single = run_protocol(blobs, RAW, selection, SPEC, threads=1, report_timing=False)
    pooled = run_protocol(blobs, RAW, selection, SPEC, threads=3, report_timing=False)
    assert single.to_dict() == pooled.to_dict()


def test_vm_latency_is_at_least_the_sum(blobs):
    report = run_protocol(blobs, RAW, ClassifierSelection(knn_k=3, enn_e=3), SPEC)
    for fold in report.folds:
        parts = sum(fold.mean_latency_ms[name] for name in ("knn", "enn", "bdt"))
        assert fold.mean_latency_ms["vm"] >= parts - 1e-9
    timing = report.to_dict()["timing"]
    assert timing["enn_preprocess_s"] is not None
    assert timing["feature_ms_per_record"] >= 0


def test_timing_order_is_logged(blobs, caplog):
    with caplog.at_level(logging.INFO, logger="src.evaluation.protocol"):
        run_protocol(blobs, RAW, ClassifierSelection(knn_k=3, enn_e=3), SPEC)
    messages = [r.getMessage() for r in caplog.records if "BDT < ENN < KNN" in r.getMessage()]
    assert len(messages) == 1


def test_timing_order_check():
    assert check_timing_order({"bdt": 0.01, "enn": 0.2, "knn": 0.3, "vm": 0.6}) is True
    assert check_timing_order({"bdt": 0.01, "enn": 0.4, "knn": 0.3}) is False
    assert check_timing_order({"bdt": 0.01, "knn": 0.3}) is None


def test_identical_vectors_fall_back_to_majority(record_factory):
    """With nothing to learn, the tree predicts the majority class everywhere."""
    zeros = np.zeros(10)
    records = [
        record_factory(zeros, zeros, zeros, record_id=f"r{i}",
                       label=BinaryLabel.ADL if i < 40 else BinaryLabel.FALL)
        for i in range(60)
    ]
    ds = Dataset(records=tuple(records), name="flat")
    selection = ClassifierSelection(knn_k=None, enn_e=None, bdt=True, vm=False)
    report = run_protocol(ds, FeatureConfig.from_names("sma"), selection, SPEC, report_timing=False)
    accuracy = report.averages["bdt"]["accuracy"]
    assert abs(accuracy - 200.0 / 3.0) < 15.0
    assert report.averages["bdt"]["precision"] is None
    assert report.undefined_folds["bdt"]["precision"] == SPEC.folds
    assert report.has_undefined
    assert UNDEFINED in report_formatter.format_eval_report(report, "text")


def test_fold_errors_name_the_fold(blobs):
    selection = ClassifierSelection(knn_k=61, enn_e=3)
    with pytest.raises(FoldError) as info:
        run_protocol(blobs, RAW, selection, SPEC)
    assert info.value.fold_index == 0
    assert isinstance(info.value.cause, ModelError)


def test_selection_rules():
    with pytest.raises(ModelError):
        ClassifierSelection(knn_k=3, enn_e=None, bdt=True, vm=True)
    with pytest.raises(ModelError):
        ClassifierSelection(knn_k=None, enn_e=None, bdt=False, vm=False)
    assert ClassifierSelection(knn_k=3, enn_e=None, bdt=True, vm=False).names == ("knn", "bdt")


def test_prebuilt_matrix_must_match(blobs):
    matrix = extract_matrix(blobs, FeatureConfig.from_names("sma"))
    selection = ClassifierSelection(knn_k=3, enn_e=3)
    report = run_protocol(blobs, FeatureConfig.from_names("sma"), selection, SPEC, matrix=matrix)
    assert report.config["features"]["dimension"] == 1
    with pytest.raises(FeatureConfigError):
        run_protocol(blobs, RAW, selection, SPEC, matrix=matrix)


def test_report_config_echo(blobs):
    report = run_protocol(blobs, RAW, ClassifierSelection(knn_k=3, enn_e=3), SPEC)
    config = report.config
    assert config["dataset"]["records"] == 60
    assert config["dataset"]["record_length"] == 20
    assert config["features"]["dimension"] == 60
    assert config["classifiers"] == {"knn_k": 3, "enn_e": 3, "bdt": True, "vm": True}
    assert config["split"] == {"train_fraction": 0.7, "folds": 5, "seed": 0, "rounding": "half_up"}


# --- sweeps ------------------------------------------------------------------

def test_neighbor_sweep_default_grid(blobs):
    table = sweep_neighbors(blobs, FeatureConfig.from_names("sma"), SPEC)
    assert DEFAULT_NEIGHBORS == (1, 3, 5, 7, 9, 11, 13, 15, 17)
    assert len(table.rows) == 9 * 2 * 5
    frame = table.to_frame()
    assert list(frame.columns) == ["param", "classifier", "metric", "value"]
    assert set(frame["classifier"]) == {"knn", "enn"}
    for k in DEFAULT_NEIGHBORS:
        assert table.value(k, "knn") >= 95.0


def test_neighbor_sweep_validation(blobs):
    cfg = FeatureConfig.from_names("sma")
    with pytest.raises(ModelError):
        sweep_neighbors(blobs, cfg, SPEC, k_values=[])
    with pytest.raises(ModelError):
        sweep_neighbors(blobs, cfg, SPEC, k_values=[1, 2])
    with pytest.raises(ModelError):
        sweep_neighbors(blobs, cfg, SPEC, k_values=[43])


def test_neighbor_sweep_is_deterministic(blobs):
    cfg = FeatureConfig.from_names("sma,se")
    first = sweep_neighbors(blobs, cfg, SPEC, k_values=(1, 3))
    second = sweep_neighbors(blobs, cfg, SPEC, k_values=(1, 3))
    assert first.rows == second.rows


def test_feature_sweep_is_deterministic(blobs):
    combos = [FeatureConfig.from_names("sma,se"), FeatureConfig.from_names("range")]
    first = sweep_features(blobs, combos, SPEC, report_timing=False)
    second = sweep_features(blobs, combos, SPEC, report_timing=False)
    assert first.rows == second.rows
    assert first.to_frame().equals(second.to_frame())


def _small_fall_clusters(record_factory):
    """
    A wide ADL cloud around the origin and four tight clusters of nine FALL
    records each, well away from it. A held-out FALL record has at most
    eight same-class training neighbors, so k=17 always outvotes it.
    """
    rng = np.random.default_rng(11)
    records = []
    for i, point in enumerate(rng.normal(0.0, 1.0, size=(120, 3))):
        records.append(record_factory(*([v, v] for v in point), record_id=f"adl-{i}"))
    centres = [(4.0, 0.0, 0.0), (-4.0, 0.0, 0.0), (0.0, 4.0, 0.0), (0.0, -4.0, 0.0)]
    for c, centre in enumerate(centres):
        for j, point in enumerate(rng.normal(centre, 0.05, size=(9, 3))):
            records.append(record_factory(*([v, v] for v in point), record_id=f"fall-{c}-{j}",
                                          label=BinaryLabel.FALL, activity="FallingForw"))
    return Dataset(records=tuple(records), name="clusters")


def test_large_k_loses_small_fall_clusters(record_factory):
    ds = _small_fall_clusters(record_factory)
    table = sweep_neighbors(ds, RAW, SPEC, k_values=(3, 5, 7, 17))
    best = max(table.value(k, "knn") for k in (3, 5, 7))
    assert table.value(17, "knn") < best
    assert table.value(17, "knn", "recall") == 0.0


def test_reference_combinations():
    assert len(REFERENCE_COMBINATIONS) == 17
    assert len(set(REFERENCE_COMBINATIONS)) == 17
    labels = [cfg.label for cfg in reference_configs()]
    assert labels[0] == "Total|SVM|"
    assert "Raw" in labels
    assert labels[-1] == "CWT + SVM + SMA + SE"


def test_feature_sweep_runs_every_combination(blobs):
    spec = SplitSpec(folds=2, seed=0)
    table = sweep_features(blobs, reference_configs(WaveletSpec(scale=5.0)), spec)
    assert len(table.reports) == 17
    assert len(table.rows) == 17 * 4 * 5
    ranking = table.ranking("vm")
    assert len(ranking) == 17
    assert table.to_dict()["type"] == "sweep_features"


def test_feature_sweep_needs_combinations(blobs):
    with pytest.raises(FeatureConfigError):
        sweep_features(blobs, [], SPEC)
