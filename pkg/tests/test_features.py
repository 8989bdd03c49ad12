"""
Feature extractor and assembler tests.
"""

from itertools import combinations

import numpy as np
import pytest

from src.features.assembler import (
    Extractor, FeatureConfig, FeatureMatrix, PRIMARY_EXTRACTORS, assemble, extract_matrix,
)
from src.features.extractors import axis_ranges, signal_energy, sma, svm_series, total_abs_svm
from src.features.wavelets import WAVELET_FAMILIES, WaveletSpec, cwt_single_scale, wavelet_table
from src.utils.errors import FeatureConfigError, LengthMismatchError, WaveletError


def _constant(record_factory, values, length):
    return record_factory(*(np.full(length, v) for v in values))


# --- CWT ---------------------------------------------------------------------

def test_cwt_of_zero_is_zero():
    out = cwt_single_scale(np.zeros(151), WaveletSpec())
    assert out.shape == (151,)
    assert np.all(out == 0.0)


@pytest.mark.parametrize("family,scale", [
    ("bior2.2", 250.0), ("db2", 8.0), ("haar", 4.0), ("sym3", 16.0), ("meyer", 30.0),
])
def test_cwt_is_linear(family, scale):
    rng = np.random.default_rng(0)
    w = WaveletSpec(family=family, scale=scale)
    for _ in range(1000):
        u, v = rng.normal(size=(2, 151))
        alpha, beta = rng.uniform(-5.0, 5.0, size=2)
        lhs = cwt_single_scale(alpha * u + beta * v, w)
        rhs = alpha * cwt_single_scale(u, w) + beta * cwt_single_scale(v, w)
        np.testing.assert_allclose(lhs, rhs, rtol=1e-9, atol=1e-9 * np.abs(rhs).max())


def test_cwt_impulse_response_haar():
    """An impulse at t=50 returns psi((50 - b) / a) / sqrt(a) at every shift b."""
    x = np.zeros(101)
    x[50] = 1.0
    out = cwt_single_scale(x, WaveletSpec(family="haar", scale=4.0))
    # inside the two flat halves of the Haar wavelet
    assert abs(out[49]) == pytest.approx(0.5)
    assert out[47] == pytest.approx(-out[49])
    # outside the support
    assert np.all(out[51:] == 0.0)
    assert np.all(out[:46] == 0.0)


def test_cwt_kernel_matches_table():
    w = WaveletSpec(family="bior2.2", scale=10.0)
    x = np.zeros(40)
    x[20] = 1.0
    out = cwt_single_scale(x, w)
    table = wavelet_table(w.family, w.level)
    expected = table((20 - np.arange(40)) / 10.0) / np.sqrt(10.0)
    np.testing.assert_allclose(out, expected, rtol=1e-12, atol=1e-15)


def test_cwt_batches_axes():
    rng = np.random.default_rng(1)
    axes = rng.normal(size=(3, 30))
    w = WaveletSpec(scale=5.0)
    batched = cwt_single_scale(axes, w)
    for row in range(3):
        np.testing.assert_allclose(batched[row], cwt_single_scale(axes[row], w))


def test_cwt_rejects_short_input():
    with pytest.raises(ValueError):
        cwt_single_scale([], WaveletSpec())
    with pytest.raises(ValueError):
        cwt_single_scale([1.0], WaveletSpec())


def test_untabulated_family():
    with pytest.raises(WaveletError):
        WaveletSpec(family="morlet")


@pytest.mark.parametrize("family", sorted(WAVELET_FAMILIES))
def test_every_family_tabulates(family):
    table = wavelet_table(family, 6)
    lo, hi = table.support
    assert lo < hi
    assert table(np.array([lo - 1.0, hi + 1.0])).tolist() == [0.0, 0.0]


# --- scalar extractors -------------------------------------------------------

def test_svm_series(record_factory):
    r = _constant(record_factory, (3.0, 4.0, 0.0), 10)
    assert np.all(svm_series(r) == 5.0)
    zero = _constant(record_factory, (0.0, 0.0, 0.0), 10)
    assert np.all(svm_series(zero) == 0.0)


def test_svm_series_matches_scalar_loop(record_factory):
    rng = np.random.default_rng(2)
    data = rng.normal(size=(3, 50))
    r = record_factory(*data)
    expected = [float(np.sqrt(x * x + y * y + z * z)) for x, y, z in data.T]
    np.testing.assert_allclose(svm_series(r), expected, rtol=1e-15)
    bound = np.sqrt(3) * np.abs(data).max(axis=0)
    assert np.all(svm_series(r) <= bound + 1e-12)


def test_total_abs_svm_constant(record_factory):
    r = _constant(record_factory, (3.0, 4.0, 0.0), 101)
    assert total_abs_svm(r) == 505.0


def test_sma_alternating(record_factory):
    values = np.tile([1.0, -1.0], 50)
    r = record_factory(values, -values, values)
    assert sma(r) == 300.0


def test_axis_ranges(record_factory):
    ramp = np.arange(10, dtype=float)
    r = record_factory(ramp, ramp[::-1], np.full(10, 2.0))
    assert axis_ranges(r) == (9.0, 9.0, 0.0)


def test_signal_energy_constant(record_factory):
    length, c = 64, 1.5
    r = _constant(record_factory, (c, 0.0, -c), length)
    ex, ey, ez = signal_energy(r)
    assert ex == pytest.approx(length ** 2 * c ** 2, rel=1e-12)
    assert ey == 0.0
    assert ez == pytest.approx(length ** 2 * c ** 2, rel=1e-12)


def test_signal_energy_parseval(record_factory):
    rng = np.random.default_rng(3)
    for _ in range(1000):
        length = int(rng.integers(2, 80))
        data = rng.normal(size=(3, length))
        energy = signal_energy(record_factory(*data))
        expected = length * np.sum(data ** 2, axis=1)
        np.testing.assert_allclose(energy, expected, rtol=1e-9)


def test_order_free_extractors_ignore_permutation(record_factory):
    rng = np.random.default_rng(4)
    data = rng.normal(size=(3, 40))
    perm = rng.permutation(40)
    a = record_factory(*data)
    b = record_factory(*data[:, perm])
    assert total_abs_svm(a) == pytest.approx(total_abs_svm(b), rel=1e-12)
    assert sma(a) == pytest.approx(sma(b), rel=1e-12)
    assert axis_ranges(a) == axis_ranges(b)
    np.testing.assert_allclose(signal_energy(a), signal_energy(b), rtol=1e-9)


# --- assembler ---------------------------------------------------------------

@pytest.mark.parametrize("names, length, expected", [
    ("cwt,svm,total_abs_svm,sma,range,se", 101, 412),
    ("cwt,svm,total_abs_svm,sma,range,se", 151, 612),
    ("cwt,se,sma,svm", 151, 608),
    ("sma", 151, 1),
    ("raw", 20, 60),
])
def test_vector_length(record_factory, names, length, expected):
    cfg = FeatureConfig.from_names(names, WaveletSpec(scale=20.0))
    rng = np.random.default_rng(length)
    vector = assemble(record_factory(*rng.normal(size=(3, length))), cfg)
    assert cfg.vector_length(length) == expected
    assert len(vector) == expected
    assert vector.config_hash == cfg.config_hash


def test_every_combination_has_declared_length(record_factory):
    rng = np.random.default_rng(5)
    for length in (2, 3, 17):
        record = record_factory(*rng.normal(size=(3, length)))
        for size in range(1, len(PRIMARY_EXTRACTORS) + 1):
            for subset in combinations(PRIMARY_EXTRACTORS, size):
                cfg = FeatureConfig(enabled=subset, wavelet=WaveletSpec(scale=2.0))
                assert len(assemble(record, cfg)) == cfg.vector_length(length)


def test_fixed_order_regardless_of_request():
    cfg = FeatureConfig.from_names("se,sma,cwt")
    assert cfg.enabled == (Extractor.CWT, Extractor.SMA, Extractor.SE)
    assert cfg.label == "CWT + SMA + SE"
    assert cfg.config_hash == FeatureConfig.from_names(["cwt", "sma", "se"]).config_hash


def test_assemble_concatenates_in_order(record_factory):
    r = record_factory([3.0, 0.0], [4.0, 0.0], [0.0, 1.0])
    vector = assemble(r, FeatureConfig.from_names("svm,total_abs_svm,sma,range"))
    np.testing.assert_array_equal(vector.values, [5.0, 1.0, 6.0, 8.0, 3.0, 4.0, 1.0])


def test_empty_config_rejected():
    with pytest.raises(FeatureConfigError):
        FeatureConfig.from_names("")
    with pytest.raises(FeatureConfigError):
        FeatureConfig.from_names("sma,bogus")


def test_config_hash_tracks_wavelet():
    a = FeatureConfig.from_names("cwt", WaveletSpec(scale=250.0))
    b = FeatureConfig.from_names("cwt", WaveletSpec(scale=100.0))
    c = FeatureConfig.from_names("sma", WaveletSpec(scale=100.0))
    assert a.config_hash != b.config_hash
    # the wavelet only matters when CWT is enabled
    assert c.config_hash == FeatureConfig.from_names("sma").config_hash


def test_assemble_checks_expected_length(record_factory):
    r = record_factory(np.zeros(10), np.zeros(10), np.zeros(10))
    with pytest.raises(LengthMismatchError):
        assemble(r, FeatureConfig.from_names("sma"), expected_length=11)


def test_matrix_csv_and_cache(tmp_path, blobs):
    cfg = FeatureConfig.from_names("sma,se")
    matrix = extract_matrix(blobs, cfg)
    assert matrix.values.shape == (60, 4)
    assert matrix.extraction_ms.shape == (60,)

    csv_path = matrix.to_csv(tmp_path / "features.csv")
    header = csv_path.read_text(encoding="utf-8").splitlines()[0]
    assert header == "record_id,f0,f1,f2,f3"

    cache = matrix.save_cache(tmp_path / "features.npz")
    loaded = FeatureMatrix.load_cache(cache, cfg.config_hash)
    assert loaded.record_ids == matrix.record_ids
    assert np.array_equal(loaded.values, matrix.values)
    assert FeatureMatrix.load_cache(cache, FeatureConfig.from_names("sma").config_hash) is None


def test_threaded_extraction_matches(blobs):
    cfg = FeatureConfig.from_names("cwt,sma", WaveletSpec(scale=5.0))
    single = extract_matrix(blobs, cfg, threads=1)
    pooled = extract_matrix(blobs, cfg, threads=4)
    assert np.array_equal(single.values, pooled.values)
