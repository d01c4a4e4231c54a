import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from specrecon import (
    DEFAULT_GRID,
    BandSelection,
    ConfigError,
    DataError,
    SpectralDataset,
    Spectrum,
    fit,
    loocv_bands,
    loocv_full,
    loocv_lincomb,
    mean_relative_error,
    project,
    r_squared,
    reconstruct_from_bands,
    reconstruct_full,
)
from specrecon.validate import build_report, holdout_model, insample_full, relative_error_stats

from .conftest import grid_of, random_dataset

SOURCE = (490, 555, 670, 865)


def test_mean_relative_error_examples():
    assert mean_relative_error([0.2], [0.21]) == pytest.approx(0.05, abs=1e-15)
    assert mean_relative_error([0.2, 0.4], [0.2, 0.4]) == 0.0
    assert mean_relative_error([0.5, 0.25], [0.25, 0.5]) == pytest.approx(0.75, abs=1e-15)


def test_mean_relative_error_skips_tiny_truth():
    mre, excluded = relative_error_stats([0.0, 1e-7, 0.5], [0.1, 0.1, 0.55])
    assert excluded == 2
    assert mre == pytest.approx(0.1, abs=1e-15)
    with pytest.raises(DataError):
        relative_error_stats([0.0, 0.0], [0.1, 0.2])
    with pytest.raises(DataError):
        mean_relative_error([0.1], [0.1, 0.2])


def test_mean_relative_error_loop_oracle(rng):
    t = rng.uniform(0.01, 0.9, 501)
    r = t + rng.normal(0, 0.01, 501)
    total = 0.0
    for a, b in zip(t, r):
        total += abs(b - a) / a
    assert abs(mean_relative_error(t, r) - total / t.size) <= 1e-14


def test_mean_relative_error_accepts_spectra(samples):
    a, b = samples["concrete"][0], samples["concrete"][1]
    assert mean_relative_error(a, b) == mean_relative_error(a.values, b.values)
    with pytest.raises(DataError):
        mean_relative_error(a, Spectrum(grid_of(10), np.full(10, 0.2)))


def test_r_squared_examples():
    t = np.array([0.1, 0.2, 0.3, 0.4])
    assert r_squared(t, t) == pytest.approx(1.0, abs=1e-15)
    assert r_squared(t, 3 * t - 0.05) == pytest.approx(1.0, abs=1e-15)
    assert r_squared(t, -t) == pytest.approx(1.0, abs=1e-15)
    assert r_squared(t, [0.2, 0.1, 0.2, 0.1]) == pytest.approx(0.2, abs=1e-15)
    assert r_squared(t, np.full(4, 0.3)) == 0.0
    with pytest.raises(DataError):
        r_squared(np.full(4, 0.3), t)
    with pytest.raises(DataError):
        r_squared([0.1], [0.1])


def test_r_squared_matches_covariance_formula(rng):
    t = rng.uniform(0, 1, 300)
    r = t + rng.normal(0, 0.2, 300)
    cov = np.cov(t, r)
    expected = cov[0, 1] ** 2 / (cov[0, 0] * cov[1, 1])
    assert abs(r_squared(t, r) - expected) <= 1e-12
    assert abs(r_squared(t, r) - np.corrcoef(t, r)[0, 1] ** 2) <= 1e-12


@settings(max_examples=60, deadline=None)
@given(
    arrays(float, 20, elements=st.floats(0.01, 1.0)),
    arrays(float, 20, elements=st.floats(0.0, 1.0)),
)
def test_r_squared_bounded_and_symmetric(t, r):
    if np.ptp(t) < 1e-6 or np.ptp(r) < 1e-6:
        return
    v = r_squared(t, r)
    assert 0.0 <= v <= 1.0
    assert v == pytest.approx(r_squared(r, t), abs=1e-12)


@settings(max_examples=60, deadline=None)
@given(arrays(float, 15, elements=st.floats(0.01, 1.0)), st.floats(0.5, 2.0))
def test_relative_error_of_scaled_truth(t, c):
    # every point has relative error |c - 1|
    assert mean_relative_error(t, c * t) == pytest.approx(abs(c - 1), rel=1e-12, abs=1e-15)


def test_report_aggregates():
    truth = [[0.2, 0.4], [0.5, 0.25]]
    recon = [[0.21, 0.4], [0.25, 0.5]]
    rep = build_report({"mode": "x"}, ["a", "b"], [400, 401], truth, recon)
    np.testing.assert_allclose(rep.per_sample_relative, [0.025, 0.75])
    assert rep.mean_relative_error == pytest.approx(0.3875)
    np.testing.assert_allclose(rep.residuals, np.subtract(truth, recon))
    assert rep.summary()["n_samples"] == 2
    assert rep == build_report({"mode": "x"}, ["a", "b"], [400, 401], truth, recon)
    assert rep != build_report({"mode": "y"}, ["a", "b"], [400, 401], truth, recon)


def _two_point_recon(xa, xb, x):
    # PCA of two points: mean at the midpoint, single axis along their difference
    mean = (xa + xb) / 2
    u = (xb - xa) / np.linalg.norm(xb - xa)
    return mean + u * (u @ (x - mean))


def test_loocv_three_sample_fixture():
    X = np.array([[0.2, 0.4], [0.4, 0.2], [0.3, 0.5]])
    ds = SpectralDataset.from_matrix("tiny", grid_of(2), X)
    rep = loocv_full(ds, 1)
    for i in range(3):
        a, b = (X[j] for j in range(3) if j != i)
        np.testing.assert_allclose(rep.recon[i], _two_point_recon(a, b, X[i]), atol=1e-14)
    # holding out the third sample: reconstruction (0.2, 0.4), errors 1/3 and 1/5
    np.testing.assert_allclose(rep.recon[2], [0.2, 0.4], atol=1e-14)
    assert rep.per_sample_relative[2] == pytest.approx(4 / 15, abs=1e-14)


def test_loocv_recovers_in_span_holdouts(rng):
    d, rank = 50, 3
    mu = rng.uniform(0.3, 0.5, d)
    B = rng.normal(0, 0.05, (rank, d))
    X = mu + rng.normal(size=(12, rank)) @ B
    ds = SpectralDataset.from_matrix("lowrank", grid_of(d), X)
    rep = loocv_full(ds, rank)
    assert np.max(np.abs(rep.residuals)) <= 1e-10
    sel = BandSelection(tuple(400.0 + i for i in (2, 11, 23, 37, 48)), (2, 11, 23, 37, 48))
    rep_b = loocv_bands(ds, sel, rank)
    assert np.max(np.abs(rep_b.residuals)) <= 1e-8


@pytest.mark.parametrize("centering", ["centered", "paper-literal"])
def test_loocv_bands_with_every_band_equals_full(centering, rng):
    ds = random_dataset(rng, 9, 25)
    full = loocv_full(ds, 4, centering)
    bands = loocv_bands(ds, BandSelection.full(ds.grid), 4, centering)
    assert bands == full


def test_loocv_matches_single_holdout_refit(samples):
    ds = samples["concrete"]
    sel = BandSelection.on_grid(ds.grid, (400, 440, 490, 555, 670, 865))
    rep = loocv_bands(ds, sel, 6)
    for i in (0, 7, 12):
        model = fit(ds.without(i))
        direct = reconstruct_from_bands(model, sel, ds[i].values[list(sel.indices)], 6).values
        np.testing.assert_allclose(rep.recon[i], direct, atol=1e-10)
    full = loocv_full(ds, 6)
    model = holdout_model(ds, 3, 6, "centered")
    np.testing.assert_array_equal(full.recon[3], reconstruct_full(model, project(model, ds[3], 6)).values)


def test_loocv_is_deterministic_and_parallel_safe(samples):
    ds = samples["concrete"]
    sel = BandSelection.on_grid(ds.grid, (400, 440, 490, 555, 670, 865))
    assert loocv_full(ds, 6) == loocv_full(ds, 6)
    assert loocv_full(ds, 6, workers=4) == loocv_full(ds, 6)
    assert loocv_bands(ds, sel, 6, workers=3) == loocv_bands(ds, sel, 6)
    src = BandSelection.on_grid(ds.grid, SOURCE)
    assert loocv_lincomb(ds, src, 440, workers=4) == loocv_lincomb(ds, src, 440)


def test_loocv_lincomb_exact_dependence(rng):
    X = rng.uniform(0.05, 0.6, (15, 501))
    X[:, 40] = 0.3 * X[:, 90] + 0.6 * X[:, 155] - 0.1 * X[:, 270] + 0.05 * X[:, 465]
    ds = SpectralDataset.from_matrix("dep", DEFAULT_GRID, X)
    rep = loocv_lincomb(ds, BandSelection.on_grid(DEFAULT_GRID, SOURCE), 440)
    assert np.max(np.abs(rep.residuals)) <= 1e-8
    assert np.nanmax(rep.per_sample_relative) <= 1e-8
    assert rep.r2 == pytest.approx(1.0, abs=1e-12)
    np.testing.assert_allclose(rep.extras["coeffs_full_fit"], [0.3, 0.6, -0.1, 0.05], atol=1e-10)


def test_loocv_argument_checks(rng):
    ds = random_dataset(rng, 5, 10)
    with pytest.raises(ConfigError):
        loocv_full(ds, 0)
    with pytest.raises(ConfigError):
        loocv_full(ds, 11)
    sel = BandSelection(tuple(400.0 + i for i in (1, 4)), (1, 4))
    with pytest.raises(ConfigError):
        loocv_bands(ds, sel, 3)
    with pytest.raises(DataError):
        loocv_full(random_dataset(rng, 2, 10), 1)


@pytest.mark.parametrize("centering", ["centered", "paper-literal"])
def test_insample_error_nonincreasing(samples, centering):
    ds = samples["bare_soil"]
    model = fit(ds, centering)
    ratios = [insample_full(model, ds, m).per_sample_norm_ratio for m in range(1, 12)]
    for a, b in zip(ratios, ratios[1:]):
        assert np.all(b <= a + 1e-12)
