import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from kanhar.features import (
    COLUMN_NAMES,
    ENTROPY_BINS,
    FEATURE_NAMES,
    FeatureVector,
    SignalWindow,
    apply_standardizer,
    axis_features,
    extract_features,
    fit_standardizer,
    read_feature_table,
    write_feature_table,
)

import oracles

IDX = {name: i for i, name in enumerate(FEATURE_NAMES)}

signals = arrays(
    np.float64,
    st.integers(8, 200),
    elements=st.floats(-20, 20, allow_nan=False, allow_infinity=False),
).filter(lambda a: np.ptp(a) > 1e-3)


def test_column_layout():
    assert len(COLUMN_NAMES) == 36
    assert COLUMN_NAMES[:2] == ("x_mav", "x_std") and COLUMN_NAMES[12] == "y_mav"


def test_hand_example():
    f = axis_features(np.array([1.0, -2.0, 3.0]))
    assert f[IDX["mav"]] == 2.0
    assert f[IDX["p2p"]] == 5.0
    assert f[IDX["max_abs"]] == 3.0
    assert f[IDX["rms"]] == pytest.approx(math.sqrt(14 / 3))
    assert f[IDX["std"]] == pytest.approx(math.sqrt(((1 - 2 / 3) ** 2 + (-2 - 2 / 3) ** 2 + (3 - 2 / 3) ** 2) / 3))
    assert f[IDX["clearance"]] == pytest.approx(((1 + math.sqrt(2) + math.sqrt(3)) / 3) ** 2)


@pytest.mark.parametrize("c", [2.5, -0.7, 1e-3])
def test_constant_signal(c):
    f = axis_features(np.full(50, c))
    expected = dict(
        mav=abs(c), std=0, skew=0, kurt=0, entropy=0, rms=abs(c), max_abs=abs(c), p2p=0,
        crest=1, clearance=abs(c), shape=1, impulse=1,
    )
    for name, value in expected.items():
        assert f[IDX[name]] == value, name


def test_zero_signal():
    f = axis_features(np.zeros(10))
    np.testing.assert_array_equal(f, 0.0)


def test_too_short():
    with pytest.raises(ValueError):
        axis_features(np.array([1.0]))
    with pytest.raises(ValueError):
        SignalWindow(np.zeros((1, 3)), 1, 0)
    with pytest.raises(ValueError):
        SignalWindow(np.zeros((5, 2)), 1, 0)


@settings(max_examples=100, deadline=None)
@given(signals)
def test_matches_oracle(x):
    np.testing.assert_allclose(axis_features(x), oracles.feature_oracle(list(x)), rtol=1e-10, atol=1e-12)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(8, 300))
def test_mirror_symmetry(seed, n):
    # continuous draws: no sample sits exactly on an interior histogram edge
    x = np.random.default_rng(seed).normal(0.3, 1.7, size=n)
    f, g = axis_features(x), axis_features(-x)
    for name in FEATURE_NAMES:
        if name == "skew":
            assert g[IDX[name]] == -f[IDX[name]]
        elif name == "entropy":
            # same bin probabilities, summed in reverse order
            assert g[IDX[name]] == pytest.approx(f[IDX[name]], rel=1e-14)
        else:
            assert g[IDX[name]] == f[IDX[name]], name


@settings(max_examples=100, deadline=None)
@given(signals, st.floats(0.1, 10))
def test_scale_behavior(x, k):
    f, g = axis_features(x), axis_features(k * x)
    for name in ("mav", "std", "rms", "max_abs", "p2p", "clearance"):
        assert g[IDX[name]] == pytest.approx(k * f[IDX[name]], rel=1e-9), name
    for name in ("crest", "shape", "impulse"):
        assert g[IDX[name]] == pytest.approx(f[IDX[name]], rel=1e-9), name
    for name in ("skew", "kurt"):
        assert g[IDX[name]] == pytest.approx(f[IDX[name]], rel=1e-7, abs=1e-9), name


@settings(max_examples=100, deadline=None)
@given(signals, st.floats(-5, 5))
def test_shift_behavior(x, c):
    f, g = axis_features(x), axis_features(x + c)
    assert g[IDX["std"]] == pytest.approx(f[IDX["std"]], rel=1e-6)
    assert g[IDX["p2p"]] == pytest.approx(f[IDX["p2p"]], rel=1e-6)
    assert g[IDX["skew"]] == pytest.approx(f[IDX["skew"]], rel=1e-5, abs=1e-6)
    assert g[IDX["kurt"]] == pytest.approx(f[IDX["kurt"]], rel=1e-5, abs=1e-6)


@settings(max_examples=100, deadline=None)
@given(signals)
def test_bounds(x):
    f = axis_features(x)
    assert 0 <= f[IDX["entropy"]] <= math.log(ENTROPY_BINS) + 1e-12
    assert f[IDX["crest"]] >= 1 - 1e-12
    assert f[IDX["impulse"]] >= f[IDX["shape"]] - 1e-12
    assert f[IDX["shape"]] >= 1 - 1e-12


def test_extract_features_axis_major():
    rng = np.random.default_rng(0)
    s = rng.normal(size=(64, 3))
    fv = extract_features(SignalWindow(s, 4, 2))
    assert fv.values.shape == (36,) and fv.subject_id == 4 and fv.activity == 2
    np.testing.assert_array_equal(fv.values[12:24], axis_features(s[:, 1]))


def test_standardizer_column_example():
    s = fit_standardizer(np.array([[1.0], [2.0], [3.0]]))
    assert s.mean[0] == 2.0
    assert s.std[0] == pytest.approx(math.sqrt(2 / 3))
    assert s.std[0] == pytest.approx(0.81650, abs=1e-5)
    out = apply_standardizer(s, FeatureVector(np.array([1.0]), 3, 1))
    assert out.values[0] == pytest.approx(-1.22474, abs=1e-5)
    assert out.subject_id == 3 and out.activity == 1


def test_standardizer_degenerate_and_inverse():
    v = np.arange(36, dtype=float)
    s = fit_standardizer([FeatureVector(v, 1, 0), FeatureVector(v.copy(), 2, 0)])
    np.testing.assert_array_equal(s.mean, v)
    np.testing.assert_array_equal(s.std, 1.0)
    np.testing.assert_array_equal(apply_standardizer(s, FeatureVector(v, 1, 0)).values, 0.0)
    with pytest.raises(ValueError):
        fit_standardizer([])

    x = np.random.default_rng(1).normal(3, 2, size=(40, 36))
    s = fit_standardizer(x)
    np.testing.assert_allclose(s.inverse(s.transform(x)), x, atol=1e-12)


def test_standardized_training_columns():
    x = np.random.default_rng(2).lognormal(size=(300, 36)) * np.arange(1, 37)
    x[:, 5] = 4.0
    z = fit_standardizer(x).transform(x)
    live = np.arange(36) != 5
    assert np.abs(z.mean(axis=0)).max() < 1e-10
    assert np.abs(z[:, live].std(axis=0) - 1).max() < 1e-10
    np.testing.assert_array_equal(z[:, 5], 0.0)


def test_feature_table_round_trip(tmp_path):
    rng = np.random.default_rng(3)
    feats = rng.normal(size=(5, 36))
    names = ("a", "b", "c")
    path = tmp_path / "f.csv"
    write_feature_table(path, feats, [1, 2, 3, 4, 5], [0, 2, 1, 0, 2], names)
    header = path.read_text().splitlines()[0].split(",")
    assert header == list(COLUMN_NAMES) + ["subject_id", "activity"]
    f2, s2, l2 = read_feature_table(path, names)
    assert f2.tobytes() == feats.tobytes()
    assert s2.tolist() == [1, 2, 3, 4, 5] and l2.tolist() == [0, 2, 1, 0, 2]
