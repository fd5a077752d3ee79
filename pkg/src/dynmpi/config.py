"""Run configuration: flat INI-style sections of ``key = value`` lines.

Omitted sections and keys fall back to the built-in defaults (scanner and
particle parameters, reconstruction grid and frame counts).  Vectors are
comma separated.  ``spectral_grid`` is the fine grid used for spectral
analysis; ``grid`` is the coarse grid of the phantoms and reconstructions.
"""

from __future__ import annotations

import configparser
import re
from dataclasses import dataclass, field, replace
from pathlib import Path

from .grid import CYCLE_TIME, SAMPLES_PER_CYCLE, VOXEL_SIZE, Grid
from .physics import ConfigurationError, ParticleConfig, ScannerConfig
from .recon import ReconConfig


class ConfigParseError(ValueError):
    """Config file could not be parsed; message carries file and line."""


MODES = ("parametric", "frames", "kaczmarz")


@dataclass(frozen=True)
class GridSection:
    shape: tuple = (3, 3, 1)
    voxel_size: float = VOXEL_SIZE
    n_samples: int = SAMPLES_PER_CYCLE

    def build(self, n_frames: int = 1, cycle_time: float = CYCLE_TIME) -> Grid:
        return Grid(self.shape, self.voxel_size, self.n_samples, n_frames, cycle_time)


@dataclass(frozen=True)
class PhantomSection:
    name: str = "one-peak-1F"
    frames: int | None = None  # None: phantom default (4 one-peak, 10 three-peak)


@dataclass(frozen=True)
class ReconSection:
    mode: str = "parametric"
    iterations: int | None = None  # None: 200 parametric, 100 frames, 50 kaczmarz
    use_s2: bool = True
    channels: tuple = ("x", "y")
    tikhonov: float = 0.0
    intervals_per_frame: int = 8

    def recon_config(self) -> ReconConfig:
        its = self.iterations or {"parametric": 200, "frames": 100, "kaczmarz": 50}[self.mode]
        solver = {"parametric": "cg", "frames": "gd", "kaczmarz": "kaczmarz"}[self.mode]
        return ReconConfig(its, solver, tuple(self.channels), self.tikhonov, self.intervals_per_frame)


@dataclass(frozen=True)
class AnalysisSection:
    window: int = 15
    threshold: float = 0.1
    skip_dc: bool = True


@dataclass(frozen=True)
class RunConfig:
    scanner: ScannerConfig = field(default_factory=ScannerConfig)
    particles: ParticleConfig = field(default_factory=ParticleConfig)
    spectral_grid: GridSection = field(default_factory=lambda: GridSection((19, 19, 1), VOXEL_SIZE, 1632))
    grid: GridSection = field(default_factory=GridSection)
    phantom: PhantomSection = field(default_factory=PhantomSection)
    recon: ReconSection = field(default_factory=ReconSection)
    analysis: AnalysisSection = field(default_factory=AnalysisSection)

    def spectral(self) -> Grid:
        return self.spectral_grid.build(1, self.scanner.cycle_time)

    def recon_grid(self, n_frames: int = 1) -> Grid:
        return self.grid.build(n_frames, self.scanner.cycle_time)


# value parsing ------------------------------------------------------------


def _floats(s):
    return tuple(float(v) for v in s.split(",") if v.strip())


def _ints(s):
    return tuple(int(v) for v in s.split(",") if v.strip())


def _bool(s):
    v = s.strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {s!r}")


def _optional_int(s):
    return None if s.strip().lower() in ("", "auto", "none") else int(s)


def _names(s):
    return tuple(v.strip() for v in s.split(",") if v.strip())


def _size(s):
    v = _floats(s)
    if len(v) == 1:
        return v[0]
    if len(v) == 3:
        return v
    raise ValueError("voxel_size takes one or three values")


_PARSERS = {
    "scanner": {
        "amplitudes": _floats,
        "frequencies": _floats,
        "phases": _floats,
        "gradients": _floats,
        "cycle_time": float,
    },
    "particles": {"temperature": float, "saturation_magnetization": float, "core_diameter": float},
    "spectral_grid": {"shape": _ints, "voxel_size": _size, "n_samples": int},
    "grid": {"shape": _ints, "voxel_size": _size, "n_samples": int},
    "phantom": {"name": str.strip, "frames": _optional_int},
    "recon": {
        "mode": str.strip,
        "iterations": _optional_int,
        "use_s2": _bool,
        "channels": _names,
        "tikhonov": float,
        "intervals_per_frame": int,
    },
    "analysis": {"window": int, "threshold": float, "skip_dc": _bool},
}


def _line_of(text: str, section: str, key: str) -> int:
    """1-based line of ``key`` inside ``[section]`` (0 if not found)."""
    current = None
    for n, line in enumerate(text.splitlines(), 1):
        s = line.strip()
        m = re.fullmatch(r"\[([^\]]+)\]", s)
        if m:
            current = m.group(1).strip()
        elif current == section and re.match(rf"{re.escape(key)}\s*[=:]", s):
            return n
    return 0


def parse_config(text: str, source: str = "<string>") -> RunConfig:
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    cp.optionxform = str
    try:
        cp.read_string(text, source=source)
    except configparser.Error as exc:
        raise ConfigParseError(str(exc)) from exc
    cfg = RunConfig()
    for section in cp.sections():
        if section not in _PARSERS:
            raise ConfigParseError(f"{source}: unknown section [{section}] (line {_line_of_section(text, section)})")
        values = {}
        for key, raw in cp.items(section):
            parser = _PARSERS[section].get(key)
            line = _line_of(text, section, key)
            if parser is None:
                raise ConfigParseError(f"{source}:{line}: unknown key {key!r} in [{section}]")
            try:
                values[key] = parser(raw)
            except ValueError as exc:
                raise ConfigParseError(f"{source}:{line}: bad value for {section}.{key}: {exc}") from exc
        try:
            cfg = replace(cfg, **{section: replace(getattr(cfg, section), **values)})
        except (ConfigurationError, ValueError, TypeError) as exc:
            raise ConfigParseError(f"{source}: invalid [{section}]: {exc}") from exc
    if cfg.recon.mode not in MODES:
        raise ConfigParseError(f"{source}:{_line_of(text, 'recon', 'mode')}: mode must be one of {', '.join(MODES)}")
    try:
        cfg.spectral()
        cfg.recon_grid()
    except ConfigurationError as exc:
        raise ConfigParseError(f"{source}: {exc}") from exc
    return cfg


def _line_of_section(text: str, section: str) -> int:
    for n, line in enumerate(text.splitlines(), 1):
        if line.strip() == f"[{section}]":
            return n
    return 0


def load_config(path) -> RunConfig:
    if path is None:
        return RunConfig()
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ConfigParseError(f"{p}: {exc.strerror or exc}") from exc
    return parse_config(text, str(p))


def _format_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if v is None:
        return "auto"
    if isinstance(v, tuple):
        return ", ".join(_format_value(x) for x in v)
    if isinstance(v, float):
        return repr(v)
    return str(v)


def format_config(cfg: RunConfig) -> str:
    """Config text that parses back to ``cfg``."""
    out = []
    for section, keys in _PARSERS.items():
        obj = getattr(cfg, section)
        out.append(f"[{section}]")
        for key in keys:
            out.append(f"{key} = {_format_value(getattr(obj, key))}")
        out.append("")
    return "\n".join(out)

