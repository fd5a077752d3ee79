import pytest

from dynmpi.config import ConfigParseError, RunConfig, format_config, load_config, parse_config
from dynmpi.physics import ParticleConfig, ScannerConfig


def test_defaults():
    cfg = RunConfig()
    assert cfg.scanner == ScannerConfig()
    assert cfg.particles == ParticleConfig()
    assert cfg.spectral().shape == (19, 19, 1) and cfg.spectral().n_samples == 1632
    assert cfg.recon_grid().shape == (3, 3, 1) and cfg.recon_grid().n_samples == 408
    assert cfg.scanner.cycle_time == 652.8e-6
    assert cfg.recon.recon_config().iterations == 200


def test_empty_text_gives_defaults():
    assert parse_config("") == RunConfig()


def test_round_trip():
    text = format_config(RunConfig())
    assert parse_config(text) == RunConfig()


def test_partial_override():
    cfg = parse_config("[grid]\nshape = 5, 5, 1\n[recon]\nmode = frames\nuse_s2 = no\n")
    assert cfg.recon_grid().shape == (5, 5, 1)
    assert cfg.recon.mode == "frames" and cfg.recon.use_s2 is False
    assert cfg.recon.recon_config().iterations == 100
    assert cfg.scanner == ScannerConfig()


@pytest.mark.parametrize(
    "text, line",
    [
        ("[grid]\nshape = 3, x\n", 2),
        ("\n[recon]\nmode = parametric\nuse_s2 = maybe\n", 4),
        ("[grid]\nbogus = 1\n", 2),
        ("[recon]\nmode = sideways\n", 2),
    ],
)
def test_errors_carry_line_numbers(text, line):
    with pytest.raises(ConfigParseError, match=rf"cfg.ini:{line}:"):
        parse_config(text, "cfg.ini")


def test_invalid_values_and_syntax():
    with pytest.raises(ConfigParseError):
        parse_config("[scanner]\ngradients = 0, -1, 2\n")
    with pytest.raises(ConfigParseError):
        parse_config("no section header\n")
    with pytest.raises(ConfigParseError, match="unknown section"):
        parse_config("[nope]\n")


def test_load_missing_file(tmp_path):
    with pytest.raises(ConfigParseError):
        load_config(tmp_path / "missing.ini")
    assert load_config(None) == RunConfig()
