"""
Configuration reader tests.
"""

import pytest

from src.config.config_reader import ConfigReader, get_config_reader, reset_config_reader
from src.features.assembler import Extractor, FeatureConfig
from src.gateway.windowing import WindowPolicy


def test_project_config_loads():
    """The shipped config.yml is valid and enables the best feature combination."""
    reader = ConfigReader()
    features = reader.get_feature_settings()
    assert features["enabled"] == ["cwt", "se", "sma", "svm"]
    assert features["wavelet"]["family"] == "bior2.2"
    assert features["wavelet"]["scale"] == 250.0
    assert reader.get_evaluation_settings()["folds"] == 5
    assert reader.get_evaluation_settings()["train_fraction"] == 0.7


def test_missing_file(tmp_path):
    with pytest.raises(FileNotFoundError):
        ConfigReader(str(tmp_path / "nope.yml"))


def test_empty_file(tmp_path):
    path = tmp_path / "config.yml"
    path.write_text("", encoding="utf-8")
    with pytest.raises(ValueError, match="empty"):
        ConfigReader(str(path))


def test_missing_section(tmp_path):
    path = tmp_path / "config.yml"
    path.write_text("features:\n  enabled: [sma]\n", encoding="utf-8")
    with pytest.raises(ValueError, match="Missing required configuration section"):
        ConfigReader(str(path))


def test_invalid_stride(config_file):
    text = config_file.read_text(encoding="utf-8").replace("stride: 0.5", "stride: 4.0")
    config_file.write_text(text, encoding="utf-8")
    with pytest.raises(ValueError, match="stride"):
        ConfigReader(str(config_file))


def test_environment_override(config_file):
    reader = ConfigReader(str(config_file), environ={
        "FALLDET_EVALUATION__FOLDS": "10",
        "FALLDET_FEATURES__ENABLED": "[cwt, svm]",
        "UNRELATED": "1",
    })
    assert reader.get_evaluation_settings()["folds"] == 10
    assert reader.get_feature_settings()["enabled"] == ["cwt", "svm"]


def test_environment_override_is_validated(config_file):
    with pytest.raises(ValueError, match="train_fraction"):
        ConfigReader(str(config_file), environ={"FALLDET_EVALUATION__TRAIN_FRACTION": "1.5"})


def test_presets(config_file):
    reader = ConfigReader(str(config_file))
    assert reader.get_preset("feature_sweep") == {"knn_k": 3, "enn_e": 3}
    assert reader.get_preset("comparison") == {"knn_k": 5, "enn_e": 5}
    with pytest.raises(ValueError, match="not found"):
        reader.get_preset("missing")


def test_settings_build_domain_objects(config_file):
    reader = ConfigReader(str(config_file))
    cfg = FeatureConfig.from_settings(reader.get_feature_settings())
    assert cfg.enabled == (Extractor.SMA, Extractor.RANGE, Extractor.SE)
    policy = WindowPolicy.from_settings(reader.get_gateway_settings())
    assert policy.window_samples(50.0) == 150
    assert policy.stride_samples(50.0) == 25


def test_singleton(config_file):
    first = get_config_reader(str(config_file))
    assert get_config_reader() is first
    reset_config_reader()
    assert get_config_reader(str(config_file)) is not first


def test_reload_picks_up_edits(config_file):
    reader = ConfigReader(str(config_file), environ={"FALLDET_EVALUATION__SEED": "7"})
    assert reader.get_evaluation_settings()["folds"] == 3
    text = config_file.read_text(encoding="utf-8").replace("folds: 3", "folds: 4")
    config_file.write_text(text, encoding="utf-8")

    reader.reload()
    assert reader.get_evaluation_settings()["folds"] == 4
    assert reader.get_evaluation_settings()["seed"] == 7


def test_reload_rejects_a_broken_edit(config_file):
    reader = ConfigReader(str(config_file))
    config_file.write_text("features:\n  enabled: [sma]\n", encoding="utf-8")
    with pytest.raises(ValueError, match="Missing required configuration section"):
        reader.reload()
