import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dynmpi.physics import (
    SERIES_THRESHOLD,
    ConfigurationError,
    ParticleConfig,
    ScannerConfig,
    drive_field,
    ffp_position,
    langevin,
    langevin_dz,
    mean_moment,
    mean_moment_dt,
    moment_from_field,
    moment_rate_from_field,
    selection_field,
    total_field,
)

P = ParticleConfig()
CFG = ScannerConfig()
AB = P.alpha * P.beta


def langevin_mp(z):
    """Arbitrary-precision reference for alpha coth(alpha beta z) - 1/(beta z)."""
    mpmath.mp.dps = 50
    x = mpmath.mpf(AB) * mpmath.mpf(z)
    if x == 0:
        return 0.0
    return float(mpmath.mpf(P.alpha) * (mpmath.coth(x) - 1 / x))


def test_particle_constants():
    assert P.alpha == pytest.approx(2.0e-18, rel=1e-3)
    assert P.beta == pytest.approx(2.336e20, rel=1e-3)
    assert AB == pytest.approx(467.3, rel=1e-3)


@pytest.mark.parametrize(
    "z",
    [0.0, 1e-9, 1e-6, 0.5 * SERIES_THRESHOLD / AB, 0.999 * SERIES_THRESHOLD / AB,
     1.001 * SERIES_THRESHOLD / AB, 1e-4, 1e-3, 0.01, 0.1, 1.0, 10.0],
)
def test_langevin_matches_high_precision(z):
    assert langevin(z, P) == pytest.approx(langevin_mp(z), rel=1e-12, abs=1e-300)


def test_langevin_examples():
    assert langevin(0.0, P) == 0.0
    # saturates towards alpha for strong fields
    assert langevin(10.0, P) / P.alpha > 0.999
    assert langevin(1.0, P) / P.alpha == pytest.approx(1 - 1 / AB, rel=1e-12)
    # initial slope alpha^2 beta / 3
    assert langevin(1e-9, P) / 1e-9 == pytest.approx(P.susceptibility, rel=1e-12)


def test_series_branch_is_continuous():
    z0 = SERIES_THRESHOLD / AB
    below, above = langevin(z0 * (1 - 1e-12), P), langevin(z0 * (1 + 1e-12), P)
    assert above == pytest.approx(below, rel=1e-10)
    d_below, d_above = langevin_dz(z0 * (1 - 1e-12), P), langevin_dz(z0 * (1 + 1e-12), P)
    assert d_above == pytest.approx(d_below, rel=1e-10)


@settings(max_examples=200, deadline=None)
@given(st.floats(-50.0, 50.0, allow_nan=False))
def test_langevin_bounds_and_oddness(z):
    v = langevin(z, P)
    assert abs(v) <= P.alpha
    assert langevin(-z, P) == -v
    assert v * z >= 0


@settings(max_examples=200, deadline=None)
@given(st.floats(0.0, 5.0), st.floats(1e-8, 1.0))
def test_langevin_monotone(z, dz):
    assert langevin(z + dz, P) >= langevin(z, P)
    assert langevin_dz(z, P) >= 0


@pytest.mark.parametrize("z", [1e-7, 1e-5, 3e-5, 1e-3, 0.02, 0.3])
def test_langevin_dz_finite_difference(z):
    h = z * 1e-5
    fd = (langevin(z + h, P) - langevin(z - h, P)) / (2 * h)
    assert langevin_dz(z, P) == pytest.approx(fd, rel=1e-7)


def test_moment_direction_and_magnitude(rng):
    H = rng.normal(scale=5e-3, size=(50, 3))
    m = moment_from_field(H, P)
    h = np.linalg.norm(H, axis=-1)
    np.testing.assert_allclose(np.linalg.norm(m, axis=-1), langevin(h, P), rtol=1e-13)
    np.testing.assert_allclose(np.cross(m, H), 0.0, atol=1e-30)
    np.testing.assert_array_equal(moment_from_field(np.zeros(3), P), np.zeros(3))
    np.testing.assert_allclose(moment_from_field(-H, P), -m, rtol=0, atol=0)


def moment_rate_mp(H, V):
    """Directional derivative of the mean moment at 80 digits."""
    mpmath.mp.dps = 80
    ab = mpmath.mpf(P.alpha) * mpmath.mpf(P.beta)

    def m(vec):
        h = mpmath.sqrt(sum(v * v for v in vec))
        return [mpmath.mpf(P.alpha) * (mpmath.coth(ab * h) - 1 / (ab * h)) * v / h for v in vec]

    Hm = [mpmath.mpf(float(v)) for v in H]
    Vm = [mpmath.mpf(float(v)) for v in V]
    e = mpmath.mpf("1e-30")
    plus = m([a + e * b for a, b in zip(Hm, Vm)])
    minus = m([a - e * b for a, b in zip(Hm, Vm)])
    return np.array([float((a - b) / (2 * e)) for a, b in zip(plus, minus)])


@pytest.mark.parametrize("x", [1e-4, 5e-3, 0.0099, 0.0101, 0.05, 1.0, 20.0])
def test_moment_rate_matches_high_precision(rng, x):
    H = rng.normal(size=3)
    H *= x / AB / np.linalg.norm(H)
    V = rng.normal(scale=1e-3, size=3)
    ref = moment_rate_mp(H, V)
    np.testing.assert_allclose(moment_rate_from_field(H, V, P), ref, rtol=0, atol=1e-11 * np.abs(ref).max())


@pytest.mark.parametrize("scale", [1e-3, 2e-2])
def test_moment_rate_matches_directional_difference(rng, scale):
    """d/dt m(H + t V) at t = 0 against a central difference."""
    H = rng.normal(scale=scale, size=(20, 3))
    V = rng.normal(scale=scale, size=(20, 3))
    eps = 1e-6
    fd = (moment_from_field(H + eps * V, P) - moment_from_field(H - eps * V, P)) / (2 * eps)
    an = moment_rate_from_field(H, V, P)
    np.testing.assert_allclose(an, fd, rtol=1e-6, atol=1e-9 * np.abs(fd).max())


def test_mean_moment_dt_matches_time_difference(rng):
    r = rng.uniform(-0.016, 0.016, size=(30, 3)) * np.array([1, 1, 0])
    t = rng.uniform(0, CFG.cycle_time, size=(30,))
    dt = 1e-11
    fd = (mean_moment(r, t + dt, CFG, P) - mean_moment(r, t - dt, CFG, P)) / (2 * dt)
    an = mean_moment_dt(r, t, CFG, P)
    np.testing.assert_allclose(an, fd, rtol=1e-5, atol=1e-6 * np.abs(an).max())


def test_selection_and_drive_field():
    r = np.array([0.01, -0.02, 0.003])
    np.testing.assert_allclose(selection_field(r, CFG), [-0.01, 0.02, 0.006])
    fs = drive_field(0.0, CFG)
    np.testing.assert_allclose(fs.H, [0.012, 0.012, 0.0], atol=1e-18)
    t = np.linspace(0, CFG.cycle_time, 7)
    h = 1e-12
    fd = (drive_field(t + h, CFG).H - drive_field(t - h, CFG).H) / (2 * h)
    np.testing.assert_allclose(drive_field(t, CFG).dH_dt, fd, rtol=1e-5, atol=1e-3)
    assert drive_field(t, CFG).H.shape == (7, 3)


def test_drive_field_periodic_over_cycle():
    # f_x T_c = 16 and f_y T_c = 17 full periods
    np.testing.assert_allclose(CFG.f[:2] * CFG.cycle_time, [16, 17], rtol=1e-12)
    np.testing.assert_allclose(drive_field(CFG.cycle_time, CFG).H, drive_field(0.0, CFG).H, atol=1e-15)


def test_ffp_position_example():
    np.testing.assert_allclose(ffp_position(0.0, CFG), [0.012, 0.012, 0.0], atol=1e-18)


@settings(max_examples=100, deadline=None)
@given(st.floats(0.0, 652.8e-6))
def test_ffp_field_vanishes(t):
    r = ffp_position(t, CFG)
    assert np.max(np.abs(total_field(r, t, CFG).H)) <= 1e-15


def test_configuration_errors():
    with pytest.raises(ConfigurationError):
        ScannerConfig(gradients=(0.0, -1.0, 2.0))
    with pytest.raises(ConfigurationError):
        ScannerConfig(cycle_time=0.0)
    with pytest.raises(ConfigurationError):
        ParticleConfig(core_diameter=-1.0)
    # zero gradient is fine on an unexcited axis
    ScannerConfig(gradients=(-1.0, -1.0, 0.0))
