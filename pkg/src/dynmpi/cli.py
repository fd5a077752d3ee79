"""Command-line pipeline: build matrices, simulate, reconstruct, analyze.

Exit codes: 0 ok, 1 usage, 2 IO or parse error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import analysis, formats
from .config import MODES, ConfigParseError, RunConfig, format_config, load_config
from .forward import forward_dynamic, signal_split_voxels
from .grid import Grid
from .phantom import (
    DEFAULT_FRAMES,
    PHANTOMS,
    SampledConcentration,
    eval_spline,
    example_concentration,
    make_phantom,
    one_peak_phantom,
)
from .physics import ConfigurationError
from .recon import DivergenceError, reconstruct_frames, reconstruct_kaczmarz, reconstruct_parametric
from .system import build_system_pair, to_frequency, to_time

log = logging.getLogger("dynmpi")

EXIT_OK, EXIT_USAGE, EXIT_IO, EXIT_NUMERICAL = 0, 1, 2, 3


class UsageError(Exception):
    """Incompatible options or inputs."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _channels(s: str) -> tuple:
    names = tuple(c.strip() for c in s.split(",") if c.strip())
    bad = [c for c in names if c not in ("x", "y", "z")]
    if not names or bad:
        raise argparse.ArgumentTypeError(f"channels must be a comma list of x, y, z; got {s!r}")
    return names


def _system(cfg: RunConfig, grid: Grid, channels):
    return build_system_pair(grid, cfg.scanner, cfg.particles, channels)


def _load_matrix(path, domain="time"):
    S = formats.read_system_pair(path)
    if domain == "time" and S.domain == "frequency":
        S = to_time(S)
    elif domain == "frequency" and S.domain == "time":
        S = to_frequency(S)
    return S


def _frequency_path(out: Path) -> Path:
    return out.with_name(f"{out.stem}_freq{out.suffix}")


# build-matrix -------------------------------------------------------------


def cmd_build_matrix(args, cfg: RunConfig):
    grid = cfg.spectral() if args.grid == "spectral" else cfg.recon_grid()
    channels = args.channels or cfg.recon.channels
    S = _system(cfg, grid, channels)
    out = Path(args.out)
    if args.domain in ("time", "both"):
        formats.write_system_pair(out, S)
    if args.domain == "frequency":
        formats.write_system_pair(out, to_frequency(S))
    elif args.domain == "both":
        formats.write_system_pair(_frequency_path(out), to_frequency(S))
    log.info("system pair %s: %d samples x %d voxels, channels %s", grid.shape, S.n_samples, S.n_voxels, ",".join(channels))


# simulate -----------------------------------------------------------------


def cmd_simulate(args, cfg: RunConfig):
    if args.spline:
        sc, ghash = formats.read_spline(args.spline)
        frames = args.frames or int(round(sc.span[1] / cfg.scanner.cycle_time))
        grid = cfg.recon_grid(frames)
        if ghash != grid.digest():
            raise formats.FormatError("grid hash of the spline file does not match the configured grid")
        name = Path(args.spline).name
    else:
        name = args.phantom or cfg.phantom.name
        if name not in PHANTOMS:
            raise UsageError(f"unknown phantom {name!r}; choose from {', '.join(PHANTOMS)}")
        frames = args.frames or cfg.phantom.frames or DEFAULT_FRAMES[name]
        grid = cfg.recon_grid(frames)
        sc = make_phantom(name, grid, cfg.recon.intervals_per_frame)
    channels = args.channels or cfg.recon.channels
    if args.matrix:
        S = _load_matrix(args.matrix)
        if S.grid.digest() != grid.digest():
            raise formats.FormatError("grid hash mismatch between matrix file and phantom grid; refusing to simulate")
        missing = [c for c in channels if c not in S.channels]
        if missing:
            raise UsageError(f"matrix file lacks channels {missing}")
    else:
        S = _system(cfg, grid.with_frames(1), channels)
    conc = eval_spline(sc, grid)
    # without S2 the derivative term drops out of the model
    u = forward_dynamic(S, conc if args.use_s2 else SampledConcentration(conc.c, np.zeros_like(conc.dc)))
    formats.write_signal(args.out, u, grid)
    if args.csv:
        tau = grid.record_times
        formats.write_csv(args.csv, ["tau"] + [f"u_{c}" for c in u.channels], zip(tau, *u.data))
    if args.phantom_csv:
        _write_concentration_csv(args.phantom_csv, grid.record_times, conc)
    log.info("simulated %s: %d frames x %d samples", name, frames, grid.n_samples)


def _write_concentration_csv(path, times, conc: SampledConcentration):
    rows = (
        (i + 1, t, c, d)
        for i in range(conc.c.shape[1])
        for t, c, d in zip(times, conc.c[:, i], conc.dc[:, i])
    )
    formats.write_csv(path, ["voxel_index", "tau", "c", "dc_dt"], rows)


# reconstruct --------------------------------------------------------------


def _peak_summary(values, axis_values, label):
    """Per-voxel peak value and location over the first axis."""
    idx = np.argmax(values, axis=0)
    out = {}
    for i in range(values.shape[1]):
        out[f"voxel_{i + 1}_peak"] = float(values[idx[i], i])
        out[f"voxel_{i + 1}_{label}"] = axis_values[idx[i]]
    out["global_max"] = float(np.max(values))
    return out


def cmd_reconstruct(args, cfg: RunConfig):
    u, grid, _ = formats.read_signal(args.signal)
    mode = args.mode or cfg.recon.mode
    use_s2 = cfg.recon.use_s2 if args.use_s2 is None else args.use_s2
    channels = args.channels or tuple(c for c in cfg.recon.channels if c in u.channels)
    if not channels or any(c not in u.channels for c in channels):
        raise UsageError(f"signal provides channels {u.channels}, requested {channels}")
    if args.matrix:
        S = _load_matrix(args.matrix)
        if S.grid.digest() != grid.digest():
            raise formats.FormatError("grid hash mismatch between matrix and signal")
    else:
        S = _system(cfg, grid.with_frames(1), channels)
    if mode == "kaczmarz" and u.n_frames != 1:
        raise UsageError("kaczmarz mode reconstructs single-frame signals; use 'frames' for multi-frame records")
    section = replace(cfg.recon, mode=mode, channels=channels, iterations=args.iterations or cfg.recon.iterations)
    rc = section.recon_config()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    if mode == "parametric":
        res = reconstruct_parametric(S, u, rc, use_s2)
        tau = grid.record_times
        conc = SampledConcentration(res.solution(tau), res.solution(tau, 1))
        _write_concentration_csv(out / "concentration.csv", tau, conc)
        summary = _peak_summary(conc.c, tau, "time")
        formats.write_spline(out / "coefficients.dmpi", res.solution, grid)
    elif mode == "frames":
        res = reconstruct_frames(S, u, rc, use_s2)
        sol = res.solution
        rows = ((f + 1, i + 1, sol[f, i]) for f in range(sol.shape[0]) for i in range(sol.shape[1]))
        formats.write_csv(out / "frames.csv", ["frame", "voxel_index", "c"], rows)
        summary = _peak_summary(sol, np.arange(1, sol.shape[0] + 1), "frame")
    else:
        res = reconstruct_kaczmarz(S, u, rc)
        formats.write_csv(out / "image.csv", ["voxel_index", "c"], ((i + 1, v) for i, v in enumerate(res.solution)))
        summary = {f"voxel_{i + 1}": float(v) for i, v in enumerate(res.solution)}
    res_rows = []
    for ch, hist in res.residuals.items():
        hist = np.atleast_2d(hist)
        for f, h in enumerate(hist):
            res_rows.extend((ch, f + 1, k, r) for k, r in enumerate(h))
    formats.write_csv(out / "residuals.csv", ["channel", "frame", "iteration", "residual"], res_rows)
    formats.write_key_values(out / "summary.txt", {"mode": mode, "use_s2": use_s2, "channels": ",".join(channels), **summary})
    log.info("reconstructed %s (%s)", mode, "S1+S2" if use_s2 else "S1 only")


# analyze ------------------------------------------------------------------


def cmd_analyze(args, cfg: RunConfig):
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    window = args.window or cfg.analysis.window
    items = {}
    if args.signal:
        u, _, _ = formats.read_signal(args.signal)
        if u.n_frames != 1:
            raise UsageError("spectral analysis of signals needs a single-frame record")
        spec = np.abs(u.spectrum().data)
        formats.write_csv(out / "signal_spectrum.csv", ["bin"] + [f"abs_u_{c}" for c in u.channels], ((k, *spec[:, k]) for k in range(spec.shape[1])))
    if args.matrix:
        S = _load_matrix(args.matrix, "frequency")
    else:
        S = to_frequency(_system(cfg, cfg.spectral(), args.channels or cfg.recon.channels))
    for ci, ch in enumerate(S.channels):
        summaries = {}
        for name, M in (("s1", S.s1[ci]), ("s2", S.s2[ci])):
            sm = analysis.summarize_spectrum(M, window, cfg.analysis.threshold, skip_dc=cfg.analysis.skip_dc)
            summaries[name] = sm
            formats.write_csv(out / f"spectrum_{name}_{ch}.csv", ["bin", "m", "hull"], zip(sm.bins.tolist(), sm.m, sm.hull))
            items[f"{name}_{ch}_spacing"] = sm.spacing if sm.spacing is not None else "no peaks"
            items[f"{name}_{ch}_hull_spacing"] = sm.hull_spacing if sm.hull_spacing is not None else "no peaks"
            items[f"{name}_{ch}_fwhm"] = sm.fwhm
            items[f"{name}_{ch}_max"] = sm.global_max
        m1 = np.max(analysis.max_spectrum(S.s1[ci]), initial=0.0)
        m2 = np.max(analysis.max_spectrum(S.s2[ci]), initial=0.0)
        items[f"ratio_{ch}"] = m2 / m1 if m1 > 0 else "no peaks"
        if summaries["s1"].global_max > 0 and summaries["s2"].global_max > 0:
            items[f"hull_distance_{ch}"] = analysis.hull_distance(summaries["s1"].hull, summaries["s2"].hull)
    if args.example:
        _analyze_split(args.example, S, out, items)
    items.update(_velocity_items(cfg))
    formats.write_key_values(out / "summary.txt", items)


def _analyze_split(kind: int, S, out: Path, items: dict):
    ex = example_concentration(kind, S.n_samples, S.grid.cycle_time)
    n, R = S.n_samples, S.n_voxels
    conc = SampledConcentration(np.repeat(ex.c[:, None], R, 1), np.repeat(ex.dc[:, None], R, 1))
    a, b = signal_split_voxels(S, conc)
    ma = np.max(np.abs(a), axis=-1)
    mb = np.max(np.abs(b), axis=-1)
    for ci, ch in enumerate(S.channels):
        formats.write_csv(out / f"split_{ch}.csv", ["bin", "max_abs_a", "max_abs_b"], ((k, ma[ci, k], mb[ci, k]) for k in range(n)))
        items[f"split_{ch}_max_a"] = float(ma[ci].max())
        items[f"split_{ch}_max_b"] = float(mb[ci].max())
    items["example_kind"] = kind
    items["example_ratio_c_over_dc"] = float(np.max(np.abs(ex.c_hat)) / np.max(np.abs(ex.dc_hat)))


def _velocity_items(cfg: RunConfig) -> dict:
    grid = cfg.recon_grid(4)
    if tuple(grid.shape) != (3, 3, 1):
        return {}
    sc = one_peak_phantom("4F", grid)
    t = np.linspace(0.0, 4 * grid.cycle_time, 40001)
    i = grid.voxel_index(1, 1) - 1
    c_max = float(np.max(sc(t)[:, i]))
    cdot_max = float(np.max(np.abs(sc(t, 1)[:, i])))
    v_av, v_max = analysis.bolus_velocity(2e-3, 4 * grid.cycle_time, c_max, cdot_max)
    return {"bolus_4F_c_max": c_max, "bolus_4F_cdot_max": cdot_max, "v_av": v_av, "v_max": v_max}


# entry point --------------------------------------------------------------


def _s2_flags(sp, default):
    g = sp.add_mutually_exclusive_group()
    g.add_argument("--use-s2", dest="use_s2", action="store_true", default=default, help="include the S2 (dc/dt) term")
    g.add_argument("--no-s2", dest="use_s2", action="store_false", help="static model, S1 only")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="dynmpi", description="Dynamic MPI simulation and reconstruction pipeline.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, out=True):
        sp.add_argument("--config", help="run configuration file (defaults apply for omitted keys)")
        if out:
            sp.add_argument("--out", required=True)
        sp.add_argument("--channels", type=_channels)

    b = sub.add_parser("build-matrix", help="build the system matrix pair")
    common(b)
    b.add_argument("--grid", choices=("spectral", "reconstruction"), default="spectral")
    b.add_argument("--domain", choices=("time", "frequency", "both"), default="time")

    s = sub.add_parser("simulate", help="simulate a multi-frame dynamic measurement")
    common(s)
    src = s.add_mutually_exclusive_group()
    src.add_argument("--phantom", help=f"one of {', '.join(PHANTOMS)}")
    src.add_argument("--spline", help="spline coefficient file")
    s.add_argument("--matrix", help="system matrix file (built from the config when omitted)")
    s.add_argument("--frames", type=int)
    _s2_flags(s, default=True)
    s.add_argument("--csv", help="also export (tau, u per channel) as CSV")
    s.add_argument("--phantom-csv", help="also export the sampled concentration as CSV")

    r = sub.add_parser("reconstruct", help="reconstruct a concentration from a signal file")
    common(r)
    r.add_argument("--signal", required=True)
    r.add_argument("--matrix")
    r.add_argument("--mode", choices=MODES)
    _s2_flags(r, default=None)
    r.add_argument("--iterations", type=int)

    a = sub.add_parser("analyze", help="spectral analysis report")
    common(a)
    a.add_argument("--matrix")
    a.add_argument("--signal")
    a.add_argument("--window", type=int)
    a.add_argument("--example", type=int, choices=(1, 2, 3, 4), help="also emit the a/b split of an example concentration")

    d = sub.add_parser("print-defaults", help="print the configuration with all defaults")
    common(d, out=False)
    return p


COMMANDS = {
    "build-matrix": cmd_build_matrix,
    "simulate": cmd_simulate,
    "reconstruct": cmd_reconstruct,
    "analyze": cmd_analyze,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        cfg = load_config(args.config)
        if args.command == "print-defaults":
            sys.stdout.write(format_config(cfg))
            return EXIT_OK
        if getattr(args, "window", None) is not None and args.window < 1:
            raise UsageError("--window must be >= 1")
        if getattr(args, "frames", None) is not None and args.frames < 1:
            raise UsageError("--frames must be >= 1")
        COMMANDS[args.command](args, cfg)
    except (UsageError, ConfigurationError) as exc:
        print(f"dynmpi: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ConfigParseError, formats.FormatError, OSError) as exc:
        print(f"dynmpi: error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (DivergenceError, FloatingPointError, np.linalg.LinAlgError) as exc:
        print(f"dynmpi: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
