import struct

import numpy as np
import pytest

from dynmpi import formats
from dynmpi.forward import forward_dynamic
from dynmpi.grid import make_grid
from dynmpi.phantom import eval_spline, one_peak_phantom
from dynmpi.system import to_frequency


def test_header_layout(tmp_path, pair3):
    path = tmp_path / "m.dmpi"
    formats.write_system_pair(path, pair3)
    raw = path.read_bytes()
    assert raw[:8] == b"DMPIARR\0"
    version, kind, domain, rows, cols, blocks = struct.unpack_from("<HBBIII", raw, 8)
    assert (version, kind, domain, rows, cols, blocks) == (1, 1, 0, 408, 9, 4)
    assert raw[80:96].decode() == pair3.grid.digest()
    (clen,) = struct.unpack_from("<H", raw, 96)
    assert raw[98:98 + clen] == b"x,y"
    assert len(raw) == 98 + clen + 4 * 408 * 9 * 8
    first = struct.unpack_from("<d", raw, 98 + clen)[0]
    assert first == pair3.s1[0, 0, 0]


@pytest.mark.parametrize("freq", [False, True])
def test_system_pair_round_trip(tmp_path, pair3, freq):
    S = to_frequency(pair3) if freq else pair3
    path = tmp_path / "m.dmpi"
    formats.write_system_pair(path, S)
    back = formats.read_system_pair(path)
    assert back.s1.tobytes() == S.s1.tobytes() and back.s2.tobytes() == S.s2.tobytes()
    assert back.eta == S.eta and back.channels == S.channels and back.domain == S.domain
    assert back.grid == S.grid


def test_signal_round_trip(tmp_path, pair3):
    grid = make_grid(n_frames=4)
    u = forward_dynamic(pair3, eval_spline(one_peak_phantom("2F", grid), grid))
    path = tmp_path / "s.dmpi"
    formats.write_signal(path, u, grid)
    back, g, h = formats.read_signal(path)
    assert back.data.tobytes() == u.data.tobytes()
    assert (back.n_frames, back.n_samples, back.channels) == (4, 408, ("x", "y"))
    assert h == grid.digest() and g == grid


def test_spline_round_trip(tmp_path):
    grid = make_grid(n_frames=4)
    sc = one_peak_phantom("1F", grid)
    path = tmp_path / "c.dmpi"
    formats.write_spline(path, sc, grid)
    back, ghash = formats.read_spline(path)
    assert back.coefficients.tobytes() == sc.coefficients.tobytes()
    np.testing.assert_array_equal(back.knots, sc.knots)
    assert ghash == grid.digest()


def test_corrupt_files(tmp_path, pair3):
    bad = tmp_path / "bad.dmpi"
    bad.write_bytes(b"nonsense")
    with pytest.raises(formats.FormatError):
        formats.read_array_file(bad)
    good = tmp_path / "m.dmpi"
    formats.write_system_pair(good, pair3)
    bad.write_bytes(good.read_bytes()[:-8])
    with pytest.raises(formats.FormatError):
        formats.read_system_pair(bad)
    with pytest.raises(formats.FormatError):
        formats.read_signal(good)


def test_atomic_write_leaves_nothing_on_failure(tmp_path):
    target = tmp_path / "out.csv"
    with pytest.raises(RuntimeError):
        with formats.atomic_open(target, "w") as fh:
            fh.write("partial")
            raise RuntimeError("boom")
    assert list(tmp_path.iterdir()) == []


def test_csv_full_precision(tmp_path):
    x = np.array([np.pi, 1 / 3, 1e-300, -2.5e17])
    path = tmp_path / "v.csv"
    formats.write_csv(path, ["i", "v"], zip(range(4), x))
    header, data = formats.read_csv(path)
    assert header == ["i", "v"]
    assert data[:, 1].tobytes() == x.tobytes()


def test_key_values(tmp_path):
    path = tmp_path / "s.txt"
    formats.write_key_values(path, {"a": 0.1, "b": None, "c": "text", "d": 3})
    assert path.read_text() == "a = 0.10000000000000001\nb = none\nc = text\nd = 3\n"
