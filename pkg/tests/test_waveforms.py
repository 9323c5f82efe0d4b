import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import signal

from rakeness.eigen import design_correlation
from rakeness.exceptions import InvalidInputError
from rakeness.signals.glyphs import glyph_corpus, subgrid_correlation
from rakeness.spectral import SpectralDensity
from rakeness.waveforms import (
    CorrelatedAntipodalSource,
    StationaryAntipodalSource,
    antipodal_from_correlation,
    antipodal_stationary,
    gaussian_correlated,
    iid_antipodal,
    make_rng,
    van_vleck_predistort,
)


def shaped_target(B=128.0, n_half=64):
    f = SpectralDensity.flat(B, n_half).frequencies
    return SpectralDensity.from_values(1.0 + 0.8 * np.cos(np.pi * f / B) + 0.4 * np.exp(-((f / 20) ** 2)), B)


def lag_autocorr(x, k):
    return float(np.mean(x[:-k] * x[k:])) if k else float(np.mean(x * x))


def test_rng_streams():
    a = make_rng(7, 0).integers(0, 1 << 30, 5)
    assert np.array_equal(a, make_rng(7, 0).integers(0, 1 << 30, 5))
    assert not np.array_equal(a, make_rng(7, 1).integers(0, 1 << 30, 5))
    assert not np.array_equal(make_rng(7, (1, 2)).random(3), make_rng(7, (2, 1)).random(3))
    g = np.random.default_rng(0)
    assert make_rng(g) is g


def test_iid_deterministic_and_balanced():
    x = iid_antipodal(100000, seed=3)
    assert np.array_equal(x, iid_antipodal(100000, seed=3))
    assert set(np.unique(x)) == {-1.0, 1.0}
    assert abs(x.mean()) < 0.02
    assert abs(lag_autocorr(x, 1)) < 0.02
    assert iid_antipodal(8, seed=1, size=3).shape == (3, 8)
    with pytest.raises(InvalidInputError):
        iid_antipodal(0)


def test_van_vleck_arcsine_identity():
    rng = np.random.default_rng(0)
    for C in (-0.6, 0.2, 0.75):
        rho = van_vleck_predistort(C)
        z = rng.multivariate_normal([0, 0], [[1, rho], [rho, 1]], size=200000)
        assert np.mean(np.sign(z[:, 0]) * np.sign(z[:, 1])) == pytest.approx(C, abs=0.01)


def test_flat_target_is_white():
    S = 100000
    x = antipodal_stationary(SpectralDensity.flat(128.0, 32), S, 256.0, seed=11)
    assert np.all(np.abs(x) == 1)
    bound = 3.0 / np.sqrt(S)
    assert lag_autocorr(x, 0) == 1.0
    for k in range(1, 9):
        assert abs(lag_autocorr(x, k)) < bound


def test_lowpass_lag_one_correlation():
    target = SpectralDensity.from_values(np.exp(-((np.arange(-32, 33) / 20.0) ** 2)), 128.0)
    src = StationaryAntipodalSource(target, 100000, 256.0)
    x = src.sample(1, seed=5)[0]
    c1 = src.target_correlation[1]
    assert c1 > 0
    assert abs(lag_autocorr(x, 1) - c1) < 0.05


def test_narrow_target_follows_realized_gaussian():
    # for very narrow spectra the pre-distorted lags are not a valid
    # covariance; the chips then follow the arcsine image of the clipped one
    target = SpectralDensity.from_values(np.exp(-((np.arange(-32, 33) / 10.0) ** 2)), 128.0)
    src = StationaryAntipodalSource(target, 256, 256.0)
    X = src.sample(4000, seed=6)
    G = src._factor @ src._factor.T
    realized = 2 / np.pi * np.arcsin(np.clip(np.diag(G, 1) / np.sqrt(np.diag(G)[1:] * np.diag(G)[:-1]), -1, 1))
    emp = np.mean(X[:, 1:] * X[:, :-1], axis=0)
    assert np.abs(emp.mean() - realized.mean()) < 0.01


def test_shaped_target_periodogram_matches():
    target = shaped_target()
    S, fs = 256, 256.0
    X = StationaryAntipodalSource(target, S, fs).sample(200, seed=9)
    f, P = signal.welch(X, fs=fs, nperseg=64, return_onesided=False, detrend=False, axis=1)
    P = P.mean(axis=0)
    keep = np.abs(f) < target.bandwidth
    ref = np.interp(f[keep], target.frequencies, target.values)
    assert np.abs(P[keep] - ref).sum() / ref.sum() < 0.1


def test_short_sequences_use_exact_factor():
    target = shaped_target(B=8.0, n_half=8)
    src = StationaryAntipodalSource(target, 12, 16.0)
    assert src.sample(3, seed=0).shape == (3, 12)
    assert StationaryAntipodalSource(target, 1, 16.0).sample(2, seed=0).shape == (2, 1)


def test_stationary_source_validation():
    with pytest.raises(InvalidInputError):
        StationaryAntipodalSource(SpectralDensity.flat(10.0, 2), 16, 15.0)


def test_gaussian_correlated():
    n = 5
    X = gaussian_correlated(np.eye(n) / n, seed=0, size=40000)
    np.testing.assert_allclose(np.cov(X.T, bias=True), np.eye(n) / n, atol=0.01)
    v = np.array([1.0, -2.0, 0.5])
    Y = gaussian_correlated(np.outer(v, v), seed=1, size=20)
    ratio = Y / v
    np.testing.assert_allclose(ratio, ratio[:, :1] * np.ones(3), atol=1e-10)
    rng = np.random.default_rng(2)
    G = rng.standard_normal((4, 4))
    B = G @ G.T
    Z = gaussian_correlated(B, seed=3, size=100000)
    np.testing.assert_allclose(np.cov(Z.T, bias=True), B, atol=0.05 * np.abs(B).max())
    with pytest.raises(InvalidInputError):
        gaussian_correlated(-np.eye(2))


def test_antipodal_from_correlation_examples():
    x = antipodal_from_correlation(np.eye(6) / 6, seed=0, size=50000)
    C = x.T @ x / len(x)
    np.testing.assert_allclose(C, np.eye(6), atol=0.03)
    B = np.ones((3, 3)) / 3
    y = antipodal_from_correlation(B, seed=1, size=100)
    assert np.all(y == y[:, :1])


def test_zero_variance_coordinates_get_random_signs():
    B = np.diag([0.5, 0.5, 0.0])
    x = CorrelatedAntipodalSource(B).sample(20000, seed=4)
    assert set(np.unique(x[:, 2])) == {-1.0, 1.0}
    assert abs(x[:, 2].mean()) < 0.05


def test_designed_subgrid_sign_correlation():
    X, _ = glyph_corpus(520, seed=0)
    d = design_correlation(subgrid_correlation(X, 5), 0.047)
    s = np.sqrt(np.diag(d.B))
    target = d.B / np.outer(s, s)
    y = antipodal_from_correlation(d.B, seed=2, size=10000)
    emp = y.T @ y / len(y)
    assert np.abs(emp - target).max() < 0.08


@given(st.integers(0, 2**32 - 1), st.integers(0, 100))
def test_outputs_are_antipodal_and_deterministic(seed, stream):
    target = shaped_target(B=16.0, n_half=8)
    a = antipodal_stationary(target, 40, 32.0, seed=seed, stream=stream)
    b = antipodal_stationary(target, 40, 32.0, seed=seed, stream=stream)
    assert np.array_equal(a, b)
    assert np.all(np.abs(a) == 1)
    B = np.array([[0.6, 0.2], [0.2, 0.4]])
    c = antipodal_from_correlation(B, seed=seed, stream=stream, size=3)
    assert np.all(np.abs(c) == 1)
    assert np.array_equal(c, antipodal_from_correlation(B, seed=seed, stream=stream, size=3))
