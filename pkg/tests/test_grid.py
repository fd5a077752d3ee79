import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from dynmpi.grid import Grid, frame_time_index, make_grid
from dynmpi.physics import ConfigurationError


def test_center_voxel_at_origin():
    g = make_grid()
    np.testing.assert_array_equal(g.centers[5 - 1], [0.0, 0.0, 0.0])
    assert g.n_voxels == 9


def test_middle_row_shares_y():
    c = make_grid().centers
    assert c[3, 1] == c[4, 1] == c[5, 1] == 0.0
    # x runs fastest
    assert c[3, 0] < c[4, 0] < c[5, 0]


def test_19x19_extremes():
    g = make_grid(19, 19, 1)
    assert g.n_voxels == 361
    np.testing.assert_allclose(g.centers[:, :2].min(axis=0), [-9 * 0.0107] * 2)
    np.testing.assert_allclose(g.centers[:, :2].max(axis=0), [9 * 0.0107] * 2)
    np.testing.assert_allclose(g.extent, [19 * 0.0107, 19 * 0.0107, 0.0107])


@given(st.integers(1, 6), st.integers(1, 6), st.integers(1, 3))
def test_centers_symmetric_and_index_bijective(nx, ny, nz):
    g = make_grid(nx, ny, nz)
    c = g.centers
    key = lambda a: np.lexsort(np.round(a, 15).T)
    np.testing.assert_allclose(c[key(c)], (-c)[key(-c)], atol=1e-17)
    seen = set()
    for i in range(1, g.n_voxels + 1):
        ix, iy, iz = g.voxel_coords(i)
        assert g.voxel_index(ix, iy, iz) == i
        seen.add((ix, iy, iz))
    assert len(seen) == g.n_voxels


def test_time_sampling_endpoints():
    g = make_grid(n_frames=4)
    t = g.cycle_times
    assert t[0] == 0.0 and t[-1] == g.cycle_time
    np.testing.assert_allclose(np.diff(t), g.cycle_time / (g.n_samples - 1))
    tau = g.record_times
    assert len(tau) == 4 * 408
    assert tau[0] == 0.0 and tau[-1] == 4 * g.cycle_time


def test_frequency_axis():
    g = make_grid()
    assert g.frequencies[1] == pytest.approx(1531.9, abs=0.05)


def test_frame_time_index():
    n = 408
    assert frame_time_index(1, n, 4) == 1
    assert frame_time_index(n + 1, n, 4) == 1
    assert frame_time_index(2 * n, n, 4) == frame_time_index(n, n, 4) == n
    np.testing.assert_array_equal(frame_time_index(np.array([1, n, n + 2]), n, 2), [1, n, 2])
    with pytest.raises(IndexError):
        frame_time_index(0, n, 4)
    with pytest.raises(IndexError):
        frame_time_index(4 * n + 1, n, 4)


@pytest.mark.parametrize(
    "kwargs",
    [dict(shape=(0, 3, 1)), dict(voxel_size=-1.0), dict(n_samples=1), dict(n_frames=0), dict(cycle_time=0.0)],
)
def test_invalid_grid(kwargs):
    with pytest.raises(ConfigurationError):
        Grid(**kwargs)


def test_digest_tracks_sampling():
    g = make_grid()
    assert g.digest() == make_grid().digest()
    assert g.digest() == g.with_frames(4).digest()
    assert g.digest(include_frames=True) != g.with_frames(4).digest(include_frames=True)
    assert g.digest() != make_grid(n_samples=400).digest()
