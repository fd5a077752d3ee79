"""Voxel grid, cycle/record time sampling and the discrete frequency axis.

Voxels are numbered 1..R in the public interface, x running fastest, then
y, then z; on a 3x3x1 grid voxels 4, 5, 6 form the middle row and voxel 5
sits at the origin.  Arrays index voxels 0-based as usual.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np

from .physics import ConfigurationError

VOXEL_SIZE = 0.0107  # m, isotropic
SAMPLES_PER_CYCLE = 408
CYCLE_TIME = 652.8e-6


@dataclass(frozen=True)
class Grid:
    shape: tuple = (3, 3, 1)
    voxel_size: tuple = (VOXEL_SIZE, VOXEL_SIZE, VOXEL_SIZE)
    n_samples: int = SAMPLES_PER_CYCLE
    n_frames: int = 1
    cycle_time: float = CYCLE_TIME

    def __post_init__(self):
        shape = tuple(int(n) for n in self.shape)
        size = tuple(float(s) for s in np.broadcast_to(np.asarray(self.voxel_size, float), (3,)))
        if len(shape) != 3 or min(shape) < 1:
            raise ConfigurationError(f"voxel counts must be three positive integers, got {self.shape}")
        if min(size) <= 0:
            raise ConfigurationError("voxel size must be positive")
        if int(self.n_samples) < 2:
            raise ConfigurationError("need at least two samples per cycle")
        if int(self.n_frames) < 1:
            raise ConfigurationError("need at least one frame")
        if not float(self.cycle_time) > 0:
            raise ConfigurationError("cycle_time must be positive")
        object.__setattr__(self, "shape", shape)
        object.__setattr__(self, "voxel_size", size)
        object.__setattr__(self, "n_samples", int(self.n_samples))
        object.__setattr__(self, "n_frames", int(self.n_frames))
        object.__setattr__(self, "cycle_time", float(self.cycle_time))

    @property
    def n_voxels(self) -> int:
        return int(np.prod(self.shape))

    @property
    def extent(self) -> np.ndarray:
        """Field of view derived from counts and voxel size (m)."""
        return np.array(self.shape) * np.array(self.voxel_size)

    @property
    def voxel_volume(self) -> float:
        return float(np.prod(self.voxel_size))

    @property
    def centers(self) -> np.ndarray:
        """Voxel centers, shape (R, 3), x fastest."""
        axes = [
            (np.arange(n) - (n - 1) / 2) * d for n, d in zip(self.shape, self.voxel_size)
        ]
        z, y, x = np.meshgrid(axes[2], axes[1], axes[0], indexing="ij")
        return np.stack([x.ravel(), y.ravel(), z.ravel()], axis=-1)

    def voxel_index(self, ix: int, iy: int, iz: int = 0) -> int:
        """1-based voxel number of the 0-based lattice coordinate."""
        nx, ny, nz = self.shape
        if not (0 <= ix < nx and 0 <= iy < ny and 0 <= iz < nz):
            raise IndexError((ix, iy, iz))
        return 1 + ix + nx * (iy + ny * iz)

    def voxel_coords(self, index: int) -> tuple[int, int, int]:
        """Inverse of :meth:`voxel_index`."""
        if not 1 <= index <= self.n_voxels:
            raise IndexError(index)
        nx, ny, _ = self.shape
        i = index - 1
        return i % nx, (i // nx) % ny, i // (nx * ny)

    @property
    def cycle_times(self) -> np.ndarray:
        """t_j = (j-1) T_c / (n_T - 1); both endpoints included."""
        return np.linspace(0.0, self.cycle_time, self.n_samples)

    @property
    def record_times(self) -> np.ndarray:
        """tau_j = (j-1) F T_c / (F n_T - 1) over the whole multi-frame record."""
        return np.linspace(0.0, self.n_frames * self.cycle_time, self.n_frames * self.n_samples)

    @property
    def frequencies(self) -> np.ndarray:
        """Physical frequency k / T_c of DFT bin k over one cycle (Hz)."""
        return np.arange(self.n_samples) / self.cycle_time

    @property
    def frame_starts(self) -> np.ndarray:
        return np.arange(self.n_frames) * self.cycle_time

    def with_frames(self, n_frames: int) -> "Grid":
        return Grid(self.shape, self.voxel_size, self.n_samples, n_frames, self.cycle_time)

    def digest(self, include_frames: bool = False) -> str:
        """Short stable hash of the spatial/temporal sampling."""
        parts = [repr(self.shape), repr(self.voxel_size), repr(self.n_samples), repr(self.cycle_time)]
        if include_frames:
            parts.append(repr(self.n_frames))
        return hashlib.sha256("|".join(parts).encode()).hexdigest()[:16]


def make_grid(
    nx: int = 3,
    ny: int = 3,
    nz: int = 1,
    voxel_size=VOXEL_SIZE,
    n_samples: int = SAMPLES_PER_CYCLE,
    n_frames: int = 1,
    cycle_time: float = CYCLE_TIME,
) -> Grid:
    return Grid((nx, ny, nz), voxel_size, n_samples, n_frames, cycle_time)


def frame_time_index(j, n_samples: int, n_frames: int):
    """Cycle-local sample index (1-based) of global record sample ``j`` (1-based)."""
    j = np.asarray(j)
    if np.any(j < 1) or np.any(j > n_samples * n_frames):
        raise IndexError(f"sample index out of range 1..{n_samples * n_frames}")
    out = (j - 1) % n_samples + 1
    return int(out) if out.ndim == 0 else out
