import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from specrecon import DEFAULT_GRID, DataError, SpectralDataset, Spectrum, WavelengthGrid, resample, smooth


def test_default_grid_has_501_points():
    assert DEFAULT_GRID.count == 501
    assert DEFAULT_GRID.wavelengths[0] == 400.0
    assert DEFAULT_GRID.wavelengths[-1] == 900.0


@pytest.mark.parametrize(
    "start,end,step",
    [(900, 400, 1), (400, 400, 1), (400, 900, 0), (400, 900, -1), (400, 900, 3)],
)
def test_grid_rejects_bad_definitions(start, end, step):
    with pytest.raises(DataError):
        WavelengthGrid(start, end, step)


def test_grid_count_formula():
    g = WavelengthGrid(400, 900, 5)
    assert g.count == round((900 - 400) / 5) + 1 == 101


def test_index_of_rejects_off_grid():
    assert DEFAULT_GRID.index_of(440) == 40
    with pytest.raises(DataError):
        DEFAULT_GRID.index_of(440.5)
    with pytest.raises(DataError):
        DEFAULT_GRID.index_of(950)


def test_spectrum_range_checks():
    with pytest.raises(DataError):
        Spectrum(DEFAULT_GRID, np.full(501, -0.01))
    with pytest.raises(DataError):
        Spectrum(DEFAULT_GRID, np.full(501, 2.0))
    with pytest.raises(DataError):
        Spectrum(DEFAULT_GRID, np.full(500, 0.1))
    with pytest.raises(DataError):
        Spectrum(DEFAULT_GRID, np.r_[np.nan, np.full(500, 0.1)])
    # reconstructions may undershoot zero but must stay finite
    Spectrum(DEFAULT_GRID, np.full(501, -0.01), estimate=True)


def test_spectrum_values_are_read_only():
    s = Spectrum(DEFAULT_GRID, np.full(501, 0.1))
    with pytest.raises(ValueError):
        s.values[0] = 0.5


def test_dataset_rejects_mixed_grids_and_duplicates():
    g2 = WavelengthGrid(400, 900, 5)
    a = Spectrum(DEFAULT_GRID, np.full(501, 0.1), "a")
    b = Spectrum(g2, np.full(101, 0.1), "b")
    with pytest.raises(DataError):
        SpectralDataset("x", DEFAULT_GRID, (a, b))
    with pytest.raises(DataError):
        SpectralDataset("x", DEFAULT_GRID, (a, a))
    with pytest.raises(DataError):
        SpectralDataset("x", DEFAULT_GRID, ())


# resample


def test_resample_on_grid_is_identity(rng):
    vals = rng.uniform(0, 1, 501)
    out = resample(np.column_stack([DEFAULT_GRID.wavelengths, vals]), DEFAULT_GRID)
    assert np.array_equal(out.values, vals)


def test_resample_linear_midpoint():
    g = WavelengthGrid(400, 402, 1)
    out = resample([(400, 0.1), (402, 0.3)], g)
    assert out.values[1] == pytest.approx(0.2, abs=1e-15)


def test_resample_reproduces_affine_function():
    f = lambda wl: 0.2 + 0.0002 * (wl - 400)
    raw = [(wl, f(wl)) for wl in np.arange(390.0, 911.0, 10.0)]
    out = resample(raw, DEFAULT_GRID)
    np.testing.assert_allclose(out.values, f(DEFAULT_GRID.wavelengths), rtol=0, atol=1e-15)


def test_resample_rejects_gaps_and_disorder():
    with pytest.raises(DataError, match=r"\[400, 450\)"):
        resample([(450, 0.1), (950, 0.2)], DEFAULT_GRID)
    with pytest.raises(DataError, match="880"):
        resample([(350, 0.1), (880, 0.2)], DEFAULT_GRID)
    with pytest.raises(DataError, match="ascending"):
        resample([(350, 0.1), (600, 0.2), (600, 0.3), (950, 0.2)], DEFAULT_GRID)
    with pytest.raises(DataError, match="ascending"):
        resample([(950, 0.1), (350, 0.2)], DEFAULT_GRID)


def test_resample_is_idempotent(rng):
    wl = np.sort(rng.uniform(350, 950, 300))
    wl = np.r_[350.0, wl, 950.0]
    once = resample(np.column_stack([wl, rng.uniform(0, 1, wl.size)]), DEFAULT_GRID)
    twice = resample(np.column_stack([once.wavelengths, once.values]), DEFAULT_GRID)
    assert np.array_equal(once.values, twice.values)


# smooth


def test_smooth_constant_and_identity(rng):
    c = Spectrum(DEFAULT_GRID, np.full(501, 0.37))
    assert np.array_equal(smooth(c, 7).values, c.values)
    s = Spectrum(DEFAULT_GRID, rng.uniform(0, 1, 501))
    assert np.array_equal(smooth(s, 1).values, s.values)


def test_smooth_three_point_hand_value():
    g = WavelengthGrid(400, 402, 1)
    out = smooth(Spectrum(g, [0.1, 0.4, 0.1]), 3)
    assert out.values[1] == pytest.approx(0.2, abs=1e-16)
    # truncated windows at the edges
    assert out.values[0] == pytest.approx(0.25, abs=1e-16)


@pytest.mark.parametrize("window", [0, -1, 2, 4, 503, 2.5])
def test_smooth_rejects_bad_windows(window):
    s = Spectrum(DEFAULT_GRID, np.full(501, 0.1))
    with pytest.raises(DataError):
        smooth(s, window)


def test_smooth_full_window_matches_truncated_formula(rng):
    g = WavelengthGrid(400, 420, 1)
    v = rng.uniform(0, 1, g.count)
    out = smooth(Spectrum(g, v), g.count if g.count % 2 else g.count - 1)
    w = g.count if g.count % 2 else g.count - 1
    half = w // 2
    expected = [np.mean(v[max(0, i - half): i + half + 1]) for i in range(g.count)]
    np.testing.assert_allclose(out.values, expected, rtol=0, atol=1e-12)
    # the centre point sees the whole spectrum
    assert abs(out.values[g.count // 2] - v.mean()) <= 1e-12


@settings(max_examples=60, deadline=None)
@given(
    st.lists(st.floats(0, 1.5, allow_nan=False), min_size=21, max_size=21),
    st.sampled_from([1, 3, 5, 9, 21]),
)
def test_smooth_stays_within_input_bounds(values, window):
    g = WavelengthGrid(400, 420, 1)
    v = np.array(values)
    out = smooth(Spectrum(g, v), window).values
    assert out.min() >= v.min() and out.max() <= v.max()
