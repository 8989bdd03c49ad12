"""
Command-line tests: exit codes, output formats and the gateway start-up path.
"""

import io
import json
import sys

import numpy as np
import pandas as pd
import pytest

from fall_detect import EXIT_FAILURE, EXIT_OK, EXIT_USAGE, main
from src.data.dataset import BinaryLabel, Dataset, save_canonical
from src.data.synthetic import synthetic_dataset


def run(*argv, config):
    return main([*argv, "--config", str(config)])


def test_help(capsys):
    assert main(["--help"]) == EXIT_OK
    assert "gateway" in capsys.readouterr().out


def test_bad_format_is_a_usage_error(config_file, blob_file):
    assert run("convert-check", str(blob_file), "--format", "xml", config=config_file) == EXIT_USAGE


def test_convert_check(config_file, blob_file, capsys):
    assert run("convert-check", str(blob_file), "--format", "json", config=config_file) == EXIT_OK
    summary = json.loads(capsys.readouterr().out)
    assert summary["status"] == "ok"
    assert summary["records"] == 60
    assert summary["record_length"] == 20
    assert summary["class_counts"] == {"ADL": 30, "FALL": 30}


def test_missing_dataset(config_file, tmp_path, capsys):
    rc = run("convert-check", str(tmp_path / "absent.csv"), config=config_file)
    assert rc == EXIT_FAILURE
    err = capsys.readouterr().err
    assert '"status": "error"' in err
    assert '"command": "convert-check"' in err


def test_extract_writes_matrix(config_file, blob_file, tmp_path, capsys):
    out = tmp_path / "features.csv"
    rc = run("extract", str(blob_file), "--features", "sma,range", "--out", str(out),
             "--format", "json", config=config_file)
    assert rc == EXIT_OK
    matrix = pd.read_csv(out)
    assert matrix.shape == (60, 5)
    assert matrix.columns[0] == "record_id"
    summary = json.loads(capsys.readouterr().out)
    assert summary["dimension"] == 4


def test_extract_empty_features(config_file, blob_file):
    assert run("extract", str(blob_file), "--features", "", config=config_file) == EXIT_USAGE
    assert run("extract", str(blob_file), "--features", "sma,nope", config=config_file) == EXIT_USAGE


def test_eval_is_reproducible_without_timing(config_file, synthetic_file, tmp_path):
    outputs = []
    for name in ("a.txt", "b.txt"):
        out = tmp_path / name
        rc = run("eval", str(synthetic_file), "--features", "sma,se,range", "--seed", "42",
                 "--no-timing", "--out", str(out), config=config_file)
        assert rc == EXIT_OK
        outputs.append(out.read_bytes())
    assert outputs[0] == outputs[1]
    assert b"Time (ms)" not in outputs[0]


def test_eval_json_report(config_file, synthetic_file, capsys):
    rc = run("eval", str(synthetic_file), "--features", "sma,se,range", "--format", "json",
             "--folds", "2", "--timing", config=config_file)
    assert rc == EXIT_OK
    report = json.loads(capsys.readouterr().out)
    assert report["type"] == "evaluation"
    assert len(report["folds"]) == 2
    assert set(report["averages"]) == {"knn", "enn", "bdt", "vm"}
    assert "timing" in report


def test_eval_with_undefined_metric_exits_nonzero(config_file, tmp_path, capsys, record_factory):
    zeros = np.zeros(10)
    records = [
        record_factory(zeros, zeros, zeros, record_id=f"r{i}", activity="Flat",
                       label=BinaryLabel.ADL if i < 40 else BinaryLabel.FALL)
        for i in range(60)
    ]
    path = save_canonical(Dataset(records=tuple(records), name="flat"), tmp_path / "flat.csv")
    rc = run("eval", str(path), "--features", "sma", "--knn", "0", "--enn", "0", config=config_file)
    assert rc == EXIT_FAILURE
    out = capsys.readouterr().out
    assert "—" in out
    assert "BDT precision: undefined" in out


def test_vm_needs_all_three(config_file, synthetic_file):
    rc = run("eval", str(synthetic_file), "--features", "sma", "--knn", "0", "--vm", config=config_file)
    assert rc == EXIT_USAGE


def test_sweep_max_zero(config_file, blob_file):
    assert run("sweep", "neighbors", str(blob_file), "--max", "0", config=config_file) == EXIT_USAGE


def test_sweep_max_reaching_train_size(config_file, blob_file):
    assert run("sweep", "neighbors", str(blob_file), "--max", "59", config=config_file) == EXIT_USAGE


def test_sweep_neighbors_csv(config_file, blob_file, capsys):
    rc = run("sweep", "neighbors", str(blob_file), "--max", "5", "--features", "sma",
             config=config_file)
    assert rc == EXIT_OK
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "param,classifier,metric,value"
    assert len(lines) == 1 + 3 * 2 * 5


def test_sweep_features_subset(config_file, blob_file, capsys):
    rc = run("sweep", "features", str(blob_file), "--combos", "sma;sma,se;raw",
             "--format", "text", config=config_file)
    assert rc == EXIT_OK
    out = capsys.readouterr().out
    assert "SMA + SE" in out
    assert "VM acc (%)" in out


def test_sweep_features_honours_disabled_knn(config_file, blob_file, capsys):
    rc = run("sweep", "features", str(blob_file), "--combos", "sma", "--knn", "0",
             config=config_file)
    assert rc == EXIT_OK
    classifiers = {line.split(",")[1] for line in capsys.readouterr().out.splitlines()[1:]}
    assert classifiers == {"enn", "bdt"}


def test_sweep_features_rejects_negative_neighbors(config_file, blob_file):
    rc = run("sweep", "features", str(blob_file), "--combos", "sma", "--enn", "-3",
             config=config_file)
    assert rc == EXIT_USAGE


def test_train_needs_out(config_file, synthetic_file):
    assert run("train", str(synthetic_file), config=config_file) == EXIT_USAGE


def _train(config_file, tmp_path, length):
    ds = synthetic_dataset(40, length=length, fs=50.0, seed=1)
    data = save_canonical(ds, tmp_path / f"train{length}.csv")
    model = tmp_path / f"model{length}.fdm"
    rc = run("train", str(data), "--features", "sma,se", "--out", str(model), config=config_file)
    assert rc == EXIT_OK
    return model


def test_gateway_rejects_mismatched_window(config_file, tmp_path, capsys):
    model = _train(config_file, tmp_path, 151)
    capsys.readouterr()
    rc = run("gateway", "--model", str(model), "--window", "3.0", config=config_file)
    assert rc == EXIT_FAILURE
    err = capsys.readouterr().err
    assert "L=150" in err
    assert "L=151" in err


def test_gateway_banner_and_counters(config_file, tmp_path, capsys, monkeypatch):
    model = _train(config_file, tmp_path, 150)
    capsys.readouterr()
    monkeypatch.setattr(sys, "stdin", io.StringIO(""))
    rc = run("gateway", "--model", str(model), config=config_file)
    assert rc == EXIT_OK
    err = capsys.readouterr().err
    assert "L=150" in err
    counters = json.loads(err.strip().splitlines()[-1])["counters"]
    assert counters["frames_in"] == 0


def test_gateway_window_for_unimib_length(config_file, tmp_path, capsys, monkeypatch):
    model = _train(config_file, tmp_path, 151)
    capsys.readouterr()
    monkeypatch.setattr(sys, "stdin", io.StringIO(""))
    assert run("gateway", "--model", str(model), "--window", "3.02", config=config_file) == EXIT_OK
    assert "L=151" in capsys.readouterr().err
