import csv
import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ictalgan.data.types import EegSample
from ictalgan.errors import ConfigError, DimensionError
from ictalgan.features.entropy import (FeatureWarning, distribution_entropies,
                                       histogram_probabilities, permutation_entropy,
                                       sample_entropy, sample_entropy_cap,
                                       sample_entropy_reference)
from ictalgan.features.extract import (FEATURE_NAMES, META_COLUMNS, extract_features,
                                       feature_matrix, write_feature_csv)
from ictalgan.features.spectral import BANDS, band_power, band_powers
from ictalgan.features.wavelet import DB4, WaveletDecomposition, dwt, idwt

pywt = pytest.importorskip("pywt")

FS = 256


# wavelet

@pytest.mark.parametrize("n,levels", [(1024, 7), (256, 3), (128, 1)])
def test_dwt_matches_pywt_periodization(n, levels):
    x = np.random.default_rng(n).normal(size=n)
    ours = dwt(x, levels)
    ref = pywt.wavedec(x, "db4", mode="periodization", level=levels)
    np.testing.assert_allclose(ours.approx, ref[0], atol=1e-10)
    for lv in range(1, levels + 1):
        np.testing.assert_allclose(ours.detail(lv), ref[-lv], atol=1e-10)


def test_db4_filter_is_orthonormal():
    assert DB4.sum() == pytest.approx(math.sqrt(2))
    assert (DB4 ** 2).sum() == pytest.approx(1.0)
    # orthogonal to its own even shifts
    for s in (2, 4, 6):
        assert np.dot(DB4[s:], DB4[:-s]) == pytest.approx(0.0, abs=1e-12)


def test_dwt_reconstruction_and_energy():
    rng = np.random.default_rng(1)
    for _ in range(20):
        x = rng.normal(size=1024) * rng.uniform(0.1, 10)
        dec = dwt(x, 7)
        assert np.abs(idwt(dec) - x).max() <= 1e-8
        energy = sum((d ** 2).sum() for d in dec.details) + (dec.approx ** 2).sum()
        assert abs(energy - (x ** 2).sum()) <= 1e-6 * (x ** 2).sum()


def test_dwt_of_constant_has_no_detail():
    dec = dwt(np.full(512, 3.0), 5)
    for d in dec.details:
        assert np.abs(d).max() < 1e-12
    assert np.allclose(dec.approx, 3.0 * 2 ** (5 / 2))


def test_dwt_halves_lengths():
    dec = dwt(np.zeros(1024), 7)
    assert [len(d) for d in dec.details] == [512, 256, 128, 64, 32, 16, 8]
    assert len(dec.approx) == 8 and dec.levels == 7


def test_dwt_rejects_bad_input():
    with pytest.raises(DimensionError):
        dwt(np.zeros(1000), 7)
    with pytest.raises(DimensionError):
        dwt(np.zeros((2, 128)), 1)
    with pytest.raises(DimensionError):
        idwt(WaveletDecomposition([np.zeros(4)], np.zeros(3)))


# sample entropy

def test_sample_entropy_constant_is_zero():
    assert sample_entropy(np.ones(100)) == 0.0


def test_sample_entropy_alternating():
    # same-phase templates always extend, so A == B
    x = np.tile([0.0, 1.0], 50)
    assert sample_entropy(x) == pytest.approx(0.0)


def test_sample_entropy_hand_example():
    x = np.array([1.0, 2.0, 1.0, 2.0, 1.0, 5.0])
    # r = 0.2 * std; only exact repeats match
    # length-2 templates over starts 0..3: (1,2),(2,1),(1,2),(2,1) -> B = 2
    # length-3 continuations: (1,2,1),(2,1,2),(1,2,1),(2,1,5) -> A = 1
    assert sample_entropy(x) == pytest.approx(-math.log(1 / 2))


@pytest.mark.parametrize("seed", range(6))
def test_sample_entropy_equals_reference(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(5, 300))
    x = rng.normal(size=n) if seed % 2 else rng.integers(0, 4, size=n).astype(float)
    for k in (0.2, 0.35):
        assert sample_entropy(x, k) == sample_entropy_reference(x, k)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.integers(-3, 3), min_size=4, max_size=60))
def test_sample_entropy_reference_property(values):
    x = np.array(values, dtype=float)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", FeatureWarning)
        assert sample_entropy(x) == sample_entropy_reference(x)


def test_sample_entropy_cap_when_nothing_matches():
    x = np.arange(50, dtype=float) ** 2
    with pytest.warns(FeatureWarning):
        v = sample_entropy(x, k=0.0001)
    assert v == pytest.approx(sample_entropy_cap(50))
    assert sample_entropy_cap(50) == pytest.approx(-math.log(2 / (47 * 48)))


def test_sample_entropy_short_series_warns():
    with pytest.warns(FeatureWarning):
        v = sample_entropy([1.0, 2.0])
    assert math.isfinite(v) and v > 0


# permutation entropy

def test_permutation_entropy_monotone_is_zero():
    assert permutation_entropy(np.arange(100.0)) == 0.0
    assert permutation_entropy(-np.arange(100.0), order=5) == 0.0


def test_permutation_entropy_single_pattern_is_zero():
    assert permutation_entropy([1.0, 3.0, 2.0]) == 0.0


def test_permutation_entropy_two_patterns():
    # windows [1,3,2] and [3,2,4] have different orderings
    h = permutation_entropy([1.0, 3.0, 2.0, 4.0], normalize=False)
    assert h == pytest.approx(math.log(2))


def test_permutation_entropy_iid_near_one():
    x = np.random.default_rng(3).uniform(size=10_000)
    assert permutation_entropy(x, 3) > 0.98


def test_permutation_entropy_ties_rank_by_position():
    # a constant series has one ordinal pattern
    assert permutation_entropy(np.zeros(40), 5) == 0.0


def test_permutation_entropy_short_returns_zero():
    with pytest.warns(FeatureWarning):
        assert permutation_entropy([1.0, 2.0], order=3) == 0.0


def test_permutation_entropy_bounds():
    rng = np.random.default_rng(4)
    for order in (3, 5, 7):
        h = permutation_entropy(rng.normal(size=64), order)
        assert 0.0 <= h <= 1.0


# distribution entropies

def test_distribution_entropies_constant():
    assert distribution_entropies(np.full(32, 2.0)) == (0.0, 0.0, 0.0)


def test_distribution_entropies_uniform_bins():
    x = np.arange(100, dtype=float)  # ten per bin
    s, r, t = distribution_entropies(x)
    assert s == pytest.approx(math.log(10))
    assert r == pytest.approx(math.log(10))
    assert t == pytest.approx(0.9)


def test_distribution_entropies_direct():
    x = np.random.default_rng(5).normal(size=500)
    counts, _ = np.histogram(x, bins=10, range=(x.min(), x.max()))
    p = counts / counts.sum()
    np.testing.assert_allclose(histogram_probabilities(x), p)
    nz = p[p > 0]
    s, r, t = distribution_entropies(x)
    assert s == pytest.approx(-(nz * np.log(nz)).sum())
    assert r == pytest.approx(-math.log((p ** 2).sum()))
    assert t == pytest.approx(1 - (p ** 2).sum())


def test_histogram_rejects_empty():
    with pytest.raises(ValueError):
        histogram_probabilities([])


# band power

def _sine(freq, seconds=4.0, amp=1.0):
    t = np.arange(int(seconds * FS)) / FS
    return amp * np.sin(2 * np.pi * freq * t)


def test_theta_sine_lands_in_theta():
    _, rel = band_power(_sine(6.0), BANDS["theta"])
    assert rel >= 0.95


@pytest.mark.parametrize("band,freq", [("delta", 2.0), ("alpha", 10.0), ("beta", 20.0),
                                       ("gamma", 40.0)])
def test_sine_lands_in_its_band(band, freq):
    total, powers = band_powers(_sine(freq))
    assert powers[band][1] >= 0.9
    assert total == pytest.approx(0.5, rel=0.05)


def test_white_noise_total_is_variance():
    x = np.random.default_rng(6).normal(scale=2.0, size=FS * 60)
    total, _ = band_powers(x)
    assert total == pytest.approx(x.var(), rel=0.1)


def test_relative_powers_in_unit_interval():
    x = np.random.default_rng(7).normal(size=1024)
    _, powers = band_powers(x)
    for a, r in powers.values():
        assert a >= 0 and 0.0 <= r <= 1.0


def test_half_open_band_edges():
    # the 4 Hz bin counts toward theta only; delta sees just window leakage
    a_delta, _ = band_power(_sine(4.0), BANDS["delta"])
    a_theta, _ = band_power(_sine(4.0), BANDS["theta"])
    assert a_theta > 5 * a_delta


def test_band_out_of_range_raises():
    with pytest.raises(ConfigError):
        band_power(np.zeros(256), (100.0, 200.0))
    with pytest.raises(ConfigError):
        band_power(np.zeros(256), (8.0, 4.0))


def test_zero_signal_has_zero_relative_power():
    _, powers = band_powers(np.zeros(1024))
    assert all(r == 0.0 for _, r in powers.values())


# feature vector

def test_feature_names():
    assert len(FEATURE_NAMES) == 108 == len(set(FEATURE_NAMES))
    assert sum(n.startswith("F7T3.") for n in FEATURE_NAMES) == 54
    assert "F8T4.power_theta_rel" in FEATURE_NAMES


def test_extract_features_shape_and_finiteness():
    x = np.random.default_rng(8).normal(size=(2, 1024))
    f = extract_features(x)
    assert f.shape == (108,) and np.all(np.isfinite(f))
    g = extract_features(x, subband="reconstructed")
    assert g.shape == (108,) and not np.array_equal(f, g)


def test_extract_features_constant_window():
    f = extract_features(np.ones((2, 1024)))
    assert np.all(np.isfinite(f))
    names = list(FEATURE_NAMES)
    assert f[names.index("F7T3.shannon_raw")] == 0.0
    assert f[names.index("F7T3.permen_d3_n3")] == 0.0


def test_extract_features_rejects_bad_shapes():
    with pytest.raises(ValueError):
        extract_features(np.zeros((3, 1024)))
    with pytest.raises(ConfigError):
        extract_features(np.zeros((2, 1024)), subband="bogus")


def _sample(values, pid="P01", label="ictal", start=12.0):
    return EegSample(values=values, patient_id=pid, recording_id=f"{pid}_R1",
                     window_start=start, label=label, origin="real")


def test_features_ignore_metadata():
    x = np.random.default_rng(9).normal(size=(2, 1024))
    a = extract_features(_sample(x))
    b = extract_features(_sample(x, pid="P09", label="interictal", start=99.0))
    assert np.array_equal(a, b)


def test_feature_matrix_and_csv(tmp_path):
    rng = np.random.default_rng(10)
    samples = [_sample(rng.normal(size=(2, 1024)), start=4.0 * i) for i in range(3)]
    m = feature_matrix(samples)
    assert m.shape == (3, 108)
    assert feature_matrix([]).shape == (0, 108)
    path = tmp_path / "f.csv"
    write_feature_csv(path, samples, m)
    rows = list(csv.reader(open(path)))
    assert rows[0] == list(META_COLUMNS) + list(FEATURE_NAMES)
    assert len(rows) == 4
    back = np.array([[float(v) for v in r[len(META_COLUMNS):]] for r in rows[1:]])
    assert np.array_equal(back, m)
    assert rows[2][:5] == ["P01", "P01_R1", "4.0", "ictal", "real"]
