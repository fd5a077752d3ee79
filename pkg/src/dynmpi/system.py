"""Sampled system matrices of the dynamic model.

``s1`` holds the moment rate dm/dt and ``s2`` the mean moment m itself, both
sampled at voxel centers and cycle times, one slab per receive channel:
arrays have shape (channels, n_T, R).  The scalar ``eta = -mu0 * p * V_voxel``
carries the coil sensitivity (p = 1) and the pixel-basis voxel volume.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .grid import Grid
from .physics import MU0, ParticleConfig, ScannerConfig, mean_moment, mean_moment_dt

AXES = {"x": 0, "y": 1, "z": 2}


@dataclass(frozen=True, eq=False)
class SystemMatrixPair:
    s1: np.ndarray
    s2: np.ndarray
    channels: tuple
    eta: float
    grid: Grid
    domain: str = "time"

    def __post_init__(self):
        if self.s1.shape != self.s2.shape or self.s1.ndim != 3:
            raise ValueError("s1 and s2 must share a (channels, n_T, R) shape")
        if self.s1.shape[0] != len(self.channels):
            raise ValueError("channel count does not match matrix slabs")
        if self.domain not in ("time", "frequency"):
            raise ValueError(f"unknown domain {self.domain!r}")

    @property
    def n_samples(self) -> int:
        return self.s1.shape[1]

    @property
    def n_voxels(self) -> int:
        return self.s1.shape[2]

    def channel(self, name: str) -> int:
        return self.channels.index(name)


def build_system_pair(
    grid: Grid,
    scanner: ScannerConfig | None = None,
    particles: ParticleConfig | None = None,
    channels=("x", "y"),
    sensitivity: float = 1.0,
) -> SystemMatrixPair:
    """Evaluate m and dm/dt at every (cycle time, voxel center)."""
    scanner = scanner or ScannerConfig(cycle_time=grid.cycle_time)
    particles = particles or ParticleConfig()
    channels = tuple(channels)
    axes = [AXES[c] for c in channels]
    t = grid.cycle_times[:, None]  # (n_T, 1)
    r = grid.centers[None, :, :]  # (1, R, 3)
    m = mean_moment(r, t, scanner, particles)  # (n_T, R, 3)
    dm = mean_moment_dt(r, t, scanner, particles)
    s1 = np.ascontiguousarray(np.moveaxis(dm[..., axes], -1, 0))
    s2 = np.ascontiguousarray(np.moveaxis(m[..., axes], -1, 0))
    eta = -MU0 * sensitivity * grid.voxel_volume
    return SystemMatrixPair(s1, s2, channels, eta, grid, "time")


def to_frequency(S: SystemMatrixPair) -> SystemMatrixPair:
    """Column-wise unnormalized DFT along the time axis."""
    if S.domain != "time":
        raise ValueError("pair is already in the frequency domain")
    return replace(S, s1=np.fft.fft(S.s1, axis=1), s2=np.fft.fft(S.s2, axis=1), domain="frequency")


def to_time(S: SystemMatrixPair) -> SystemMatrixPair:
    """Inverse of :func:`to_frequency` (real part kept)."""
    if S.domain != "frequency":
        raise ValueError("pair is already in the time domain")
    return replace(
        S,
        s1=np.fft.ifft(S.s1, axis=1).real,
        s2=np.fft.ifft(S.s2, axis=1).real,
        domain="time",
    )


def static_matrix(S: SystemMatrixPair, channel=None) -> np.ndarray:
    """Classical static system matrix ``eta * S1``.

    Returns shape (channels, n_T, R), or (n_T, R) when ``channel`` is given.
    """
    if S.domain != "time":
        raise ValueError("static_matrix expects a time-domain pair")
    A = S.eta * S.s1
    if channel is None:
        return A
    idx = S.channel(channel) if isinstance(channel, str) else int(channel)
    return A[idx]
