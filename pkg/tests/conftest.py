"""
Shared fixtures for the fall detection toolkit tests.
"""

import sys
from pathlib import Path

import numpy as np
import pytest

# Add parent directory to path for imports
sys.path.append(str(Path(__file__).parent.parent))

from src.config.config_reader import reset_config_reader
from src.data.dataset import BinaryLabel, Dataset, Record, save_canonical
from src.data.synthetic import blob_dataset, synthetic_dataset


TEST_CONFIG = """\
dataset:
  units: "m/s^2"
  fall_activities: []

features:
  enabled: ["sma", "se", "range"]
  wavelet:
    family: "bior2.2"
    scale: 250.0
    resolution: 1024

classifiers:
  knn_k: 3
  enn_e: 3
  bdt: true
  presets:
    feature_sweep: {knn_k: 3, enn_e: 3}
    comparison: {knn_k: 5, enn_e: 5}

evaluation:
  train_fraction: 0.7
  folds: 3
  seed: 0
  rounding: "half_up"
  threads: 1
  report_timing: false

gateway:
  window_length: 3.0
  stride: 0.5
  debounce: 10.0
  listen: "-"
  alert_address: null
  queue_size: 8
  model_path: null

output:
  format: "text"
  pretty_print: true

logging:
  level: "WARNING"
"""


def make_record(ax, ay, az, record_id="r", fs=50.0, label=BinaryLabel.ADL, activity="Walking"):
    return Record(id=record_id, ax=np.asarray(ax, dtype=float), ay=np.asarray(ay, dtype=float),
                  az=np.asarray(az, dtype=float), fs=fs, activity_label=activity,
                  binary_label=label)


@pytest.fixture(autouse=True)
def fresh_config():
    """Every test starts without a cached ConfigReader."""
    reset_config_reader()
    yield
    reset_config_reader()


@pytest.fixture
def record_factory():
    return make_record


@pytest.fixture
def blobs() -> Dataset:
    return blob_dataset(60, length=20, separation=50.0, spread=1.0, seed=0)


@pytest.fixture
def synthetic() -> Dataset:
    return synthetic_dataset(60, length=151, fs=50.0, seed=3)


@pytest.fixture
def config_file(tmp_path) -> Path:
    path = tmp_path / "config.yml"
    path.write_text(TEST_CONFIG, encoding="utf-8")
    return path


@pytest.fixture
def synthetic_file(tmp_path, synthetic) -> Path:
    return save_canonical(synthetic, tmp_path / "synthetic.csv")


@pytest.fixture
def blob_file(tmp_path, blobs) -> Path:
    return save_canonical(blobs, tmp_path / "blobs.csv")
