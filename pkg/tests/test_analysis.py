import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from dynmpi.analysis import (
    bolus_velocity,
    fwhm,
    hull_approximation,
    hull_distance,
    max_spectrum,
    peak_metrics,
    peak_spacing,
    summarize_spectrum,
)

TC = 652.8e-6
spectra = hnp.arrays(np.float64, st.integers(2, 80), elements=st.floats(0, 1e3))


def test_max_spectrum_trivial(rng):
    col = rng.normal(size=(12, 1)) + 1j * rng.normal(size=(12, 1))
    np.testing.assert_array_equal(max_spectrum(col), np.abs(col[:, 0]))
    assert np.all(max_spectrum(np.zeros((8, 4))) == 0)
    with pytest.raises(ValueError):
        max_spectrum(np.ones(4))


def test_max_spectrum_permutation_invariant(rng):
    S = rng.normal(size=(20, 7)) + 1j * rng.normal(size=(20, 7))
    np.testing.assert_array_equal(max_spectrum(S), max_spectrum(S[:, rng.permutation(7)]))


def test_hull_of_nonincreasing_is_identity():
    m = np.linspace(5, 1, 40) ** 2
    np.testing.assert_array_equal(hull_approximation(m), m)


def test_hull_triangle_flat_tops():
    """30-bin toy: triangle of half-width 3 peaking at bin 20."""
    m = np.zeros(30)
    m[17:24] = [1, 2, 3, 4, 3, 2, 1]
    # hull(k) = max(m[k..k+15]): windows ending on the rising flank, the
    # flat top for k = 5..20, then the falling flank itself
    expected = np.zeros(30)
    expected[2:5] = [1, 2, 3]
    expected[5:21] = 4
    expected[21:24] = [3, 2, 1]
    np.testing.assert_array_equal(hull_approximation(m, 15), expected)


def test_hull_window_validation():
    with pytest.raises(ValueError):
        hull_approximation(np.ones(3), 0)
    assert hull_approximation(np.array([])).size == 0


@settings(max_examples=100, deadline=None)
@given(spectra, st.integers(1, 20), st.floats(1e-3, 1e3))
def test_hull_bounds_and_scale_equivariance(m, window, s):
    h = hull_approximation(m, window)
    assert np.all(h >= m)
    np.testing.assert_allclose(hull_approximation(s * m, window), s * h, rtol=1e-12)


def test_peak_spacing_comb():
    m = np.zeros(100)
    m[5::10] = 1.0
    assert peak_spacing(m) == 10
    one = np.zeros(20)
    one[7] = 1
    assert peak_spacing(one) is None


def test_peak_spacing_threshold_ignores_ripple():
    m = np.full(60, 0.01)
    m[::2] = 0.02
    m[10] = m[30] = m[50] = 1.0
    assert peak_spacing(m) == 20


def test_fwhm_known_shapes():
    box = np.zeros(50)
    box[10:21] = 1.0
    assert fwhm(box) == pytest.approx(11.0)
    x = np.arange(400, dtype=float)
    sigma = 20.0
    g = np.exp(-0.5 * ((x - 200) / sigma) ** 2)
    assert fwhm(g) == pytest.approx(2 * np.sqrt(2 * np.log(2)) * sigma, rel=1e-3)


@settings(max_examples=60, deadline=None)
@given(spectra.filter(lambda m: m.max() > 0), st.floats(1e-3, 1e3))
def test_peak_metrics_scale_invariant(m, s):
    sp1, w1 = peak_metrics(m)
    sp2, w2 = peak_metrics(s * m)
    assert sp1 == sp2
    assert w2 == pytest.approx(w1, rel=1e-9, abs=1e-9)


def test_peak_metrics_rejects_zero():
    with pytest.raises(ValueError):
        peak_metrics(np.zeros(10))


def test_summarize_zero_matrix():
    s = summarize_spectrum(np.zeros((32, 3)))
    assert s.spacing is None and s.fwhm == 0 and s.global_max == 0


def test_summary_skips_dc_and_mirrored_half(rng):
    S = np.fft.fft(rng.normal(size=(64, 4)), axis=0)
    s = summarize_spectrum(S)
    np.testing.assert_array_equal(s.bins, np.arange(1, 33))
    assert summarize_spectrum(S, skip_dc=False).bins[0] == 0


def test_hull_distance():
    h = np.array([1.0, 2.0, 3.0])
    assert hull_distance(h, 5 * h) == 0
    assert hull_distance(h, h[::-1]) > 0


def test_bolus_velocity_examples():
    v_av, v_max = bolus_velocity(2e-3, 4 * TC, 2.667, 3065)
    assert v_av == pytest.approx(1.53, abs=0.005)
    assert v_max == pytest.approx(2.30, abs=0.005)
    assert bolus_velocity(2e-3, 4 * TC, 2.667, 0.0)[1] == 0.0
    with pytest.raises(ZeroDivisionError):
        bolus_velocity(2e-3, 4 * TC, 0.0, 1.0)
    with pytest.raises(ValueError):
        bolus_velocity(-1.0, 4 * TC, 1.0, 1.0)
