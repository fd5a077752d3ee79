"""Field models, Langevin magnetization and the field-free-point trajectory.

Field quantities are expressed in tesla throughout (gradients in T/m, drive
amplitudes in T), so that ``alpha * beta * |H|`` is dimensionless with
``alpha`` in A m^2 and ``beta`` in 1/J.  The vacuum permeability only enters
the signal scaling (see :mod:`dynmpi.system`).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

MU0 = 4e-7 * np.pi  # N/A^2
KB = 1.38064852e-23  # J/K

# below this value of |alpha*beta*z| the Taylor branches are used
SERIES_THRESHOLD = 1e-2


class ConfigurationError(ValueError):
    """Raised for physically or geometrically invalid configurations."""


def _vec3(x) -> np.ndarray:
    arr = np.asarray(x, dtype=float).reshape(-1)
    if arr.shape != (3,):
        raise ConfigurationError(f"expected a 3-vector, got shape {arr.shape}")
    return arr


@dataclass(frozen=True)
class ScannerConfig:
    """Drive/selection field parameters of a Lissajous-type scanner.

    Defaults are the simulation parameters of the reference scanner: drive
    frequencies 2.5 MHz / (102, 96, 99), 12 mT amplitude in x and y (2D scan),
    gradient (-1, -1, 2) T/m and a repetition time of 652.8 us.
    """

    amplitudes: tuple = (0.012, 0.012, 0.0)
    frequencies: tuple = (2.5e6 / 102, 2.5e6 / 96, 2.5e6 / 99)
    phases: tuple = (np.pi / 2, np.pi / 2, np.pi / 2)
    gradients: tuple = (-1.0, -1.0, 2.0)
    cycle_time: float = 652.8e-6

    def __post_init__(self):
        for name in ("amplitudes", "frequencies", "phases", "gradients"):
            object.__setattr__(self, name, tuple(float(v) for v in _vec3(getattr(self, name))))
        object.__setattr__(self, "cycle_time", float(self.cycle_time))
        if not self.cycle_time > 0:
            raise ConfigurationError("cycle_time must be positive")
        g = self.g
        active = self.a != 0
        if np.any(g[active] == 0):
            raise ConfigurationError("zero gradient on an excited dimension")

    @property
    def a(self) -> np.ndarray:
        return np.array(self.amplitudes)

    @property
    def f(self) -> np.ndarray:
        return np.array(self.frequencies)

    @property
    def phi(self) -> np.ndarray:
        return np.array(self.phases)

    @property
    def g(self) -> np.ndarray:
        return np.array(self.gradients)

    @property
    def active_dims(self) -> tuple[int, ...]:
        return tuple(int(i) for i in np.flatnonzero(self.a))


@dataclass(frozen=True)
class ParticleConfig:
    """Monodisperse single-core particles in thermal equilibrium.

    ``saturation_magnetization`` is in A/m; the default equals 0.6 T / mu0.
    """

    temperature: float = 310.0
    saturation_magnetization: float = 0.6 / MU0
    core_diameter: float = 20e-9

    def __post_init__(self):
        for name in ("temperature", "saturation_magnetization", "core_diameter"):
            value = float(getattr(self, name))
            if not value > 0:
                raise ConfigurationError(f"{name} must be positive, got {value}")
            object.__setattr__(self, name, value)

    @property
    def core_volume(self) -> float:
        return np.pi * self.core_diameter**3 / 6.0

    @property
    def alpha(self) -> float:
        """Magnetic moment of one particle (A m^2)."""
        return self.saturation_magnetization * self.core_volume

    @property
    def beta(self) -> float:
        """Inverse thermal energy 1/(k_B T) (1/J)."""
        return 1.0 / (KB * self.temperature)

    @property
    def susceptibility(self) -> float:
        """Initial slope alpha^2 beta / 3 of the Langevin curve."""
        return self.alpha**2 * self.beta / 3.0


@dataclass(frozen=True)
class FieldSample:
    H: np.ndarray
    dH_dt: np.ndarray = field(repr=False)


def selection_field(r, cfg: ScannerConfig) -> np.ndarray:
    """Linear gradient field ``diag(g) r``; ``r`` has shape (..., 3)."""
    return np.asarray(r, dtype=float) * cfg.g


def drive_field(t, cfg: ScannerConfig) -> FieldSample:
    """Sinusoidal drive field and its analytic time derivative.

    For array ``t`` the returned arrays have shape ``t.shape + (3,)``.
    """
    t = np.asarray(t, dtype=float)[..., None]
    w = 2 * np.pi * cfg.f
    arg = w * t + cfg.phi
    return FieldSample(cfg.a * np.sin(arg), w * cfg.a * np.cos(arg))


def ffp_position(t, cfg: ScannerConfig) -> np.ndarray:
    """Position of the field-free point at time ``t``.

    Non-excited dimensions with zero gradient stay at the origin.
    """
    hd = drive_field(t, cfg).H
    g = cfg.g
    safe = np.where(g == 0, 1.0, g)
    return np.where(g == 0, 0.0, -hd / safe)


def total_field(r, t, cfg: ScannerConfig) -> FieldSample:
    """Superposition of selection and drive field at (r, t), broadcasting."""
    d = drive_field(t, cfg)
    H = selection_field(r, cfg) + d.H
    return FieldSample(H, np.broadcast_to(d.dH_dt, H.shape))


# Taylor coefficients of coth(x) - 1/x = sum c_k x^(2k+1)
_LANGEVIN_SERIES = (1 / 3, -1 / 45, 2 / 945, -1 / 4725)
# ... and of its derivative 1/x^2 - 1/sinh^2(x)
_DLANGEVIN_SERIES = (1 / 3, -3 / 45, 10 / 945, -7 / 4725)


def _poly_even(x2, coeffs):
    out = np.zeros_like(x2)
    for c in reversed(coeffs):
        out = out * x2 + c
    return out


def _langevin_over_x(x):
    """(coth(x) - 1/x) / x, well conditioned at the origin."""
    x = np.abs(np.asarray(x, dtype=float))
    small = x < SERIES_THRESHOLD
    out = np.empty_like(x)
    out[small] = _poly_even(x[small] ** 2, _LANGEVIN_SERIES)
    xb = x[~small]
    out[~small] = (1.0 / np.tanh(xb) - 1.0 / xb) / xb
    return out


def _dlangevin(x):
    """d/dx (coth(x) - 1/x) = 1/x^2 - 1/sinh^2(x)."""
    x = np.abs(np.asarray(x, dtype=float))
    small = x < SERIES_THRESHOLD
    out = np.empty_like(x)
    out[small] = _poly_even(x[small] ** 2, _DLANGEVIN_SERIES)
    xb = x[~small]
    # 1/sinh^2 underflows gracefully for large arguments
    with np.errstate(over="ignore"):
        out[~small] = 1.0 / xb**2 - 1.0 / np.sinh(xb) ** 2
    return out


def langevin(z, p: ParticleConfig):
    """Langevin function ``alpha coth(alpha beta z) - 1/(beta z)`` with L(0) = 0."""
    z = np.asarray(z, dtype=float)
    x = p.alpha * p.beta * z
    return p.alpha * x * _langevin_over_x(x)


def langevin_dz(z, p: ParticleConfig):
    """Derivative of :func:`langevin` with respect to the field magnitude."""
    x = p.alpha * p.beta * np.asarray(z, dtype=float)
    return p.alpha**2 * p.beta * _dlangevin(x)


def moment_from_field(H, p: ParticleConfig) -> np.ndarray:
    """Mean moment ``L(|H|) H/|H|`` for fields of shape (..., 3)."""
    H = np.asarray(H, dtype=float)
    h = np.linalg.norm(H, axis=-1)
    x = p.alpha * p.beta * h
    # L(h)/h == alpha^2 beta * (L(x)/x), continuous at h = 0
    return (p.alpha**2 * p.beta * _langevin_over_x(x))[..., None] * H


def moment_rate_from_field(H, dH_dt, p: ParticleConfig) -> np.ndarray:
    """Chain-rule time derivative of :func:`moment_from_field`.

    d/dt [f(h) H] = f(h) dH/dt + (L'(h) - f(h)) (e . dH/dt) e,  e = H/h, f = L(h)/h.
    """
    H = np.asarray(H, dtype=float)
    dH_dt = np.asarray(dH_dt, dtype=float)
    h = np.linalg.norm(H, axis=-1)
    x = p.alpha * p.beta * h
    scale = p.alpha**2 * p.beta
    f = scale * _langevin_over_x(x)
    dL = scale * _dlangevin(x)
    proj = np.sum(H * dH_dt, axis=-1)
    small = x < SERIES_THRESHOLD
    # radial coefficient (L' - f)/h^2; series: -2 c1 (alpha beta)^2 scale + O(x^2)
    with np.errstate(divide="ignore", invalid="ignore"):
        radial = np.where(small, 0.0, (dL - f) / np.where(small, 1.0, h) ** 2)
    ab2 = (p.alpha * p.beta) ** 2
    x2 = x**2
    radial_series = scale * ab2 * (
        2 * _LANGEVIN_SERIES[1]
        + x2 * (4 * _LANGEVIN_SERIES[2])
        + x2**2 * (6 * _LANGEVIN_SERIES[3])
    )
    radial = np.where(small, radial_series, radial)
    return f[..., None] * dH_dt + (radial * proj)[..., None] * H


def mean_moment(r, t, cfg: ScannerConfig, p: ParticleConfig) -> np.ndarray:
    """Equilibrium mean magnetic moment at positions ``r`` and times ``t``."""
    return moment_from_field(total_field(r, t, cfg).H, p)


def mean_moment_dt(r, t, cfg: ScannerConfig, p: ParticleConfig) -> np.ndarray:
    """Analytic time derivative of :func:`mean_moment`."""
    fs = total_field(r, t, cfg)
    return moment_rate_from_field(fs.H, fs.dH_dt, p)
