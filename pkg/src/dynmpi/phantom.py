"""Dynamic concentration models.

Concentrations are cubic B-spline curves in time, one coefficient column per
voxel, on a clamped uniform knot vector spanning the whole record
[0, F T_c].  The named phantoms are single bumps per voxel (see
:func:`spline_bump`) projected onto that basis with nonnegative
coefficients, so they stay nonnegative and C^2.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.interpolate import BSpline
from scipy.optimize import brentq, nnls

from .grid import Grid
from .physics import ConfigurationError

DEGREE = 3
INTERVALS_PER_FRAME = 8
ONE_PEAK_HEIGHT = 8.0 / 3.0
THREE_PEAK_HEIGHT = 20.0 / 3.0
ONE_PEAK_1F_TIME = 0.4128e-3


def clamped_knots(total_time: float, n_intervals: int, degree: int = DEGREE) -> np.ndarray:
    inner = np.linspace(0.0, total_time, n_intervals + 1)
    return np.r_[np.zeros(degree), inner, np.full(degree, total_time)]


def design_matrices(times, knots, degree: int = DEGREE):
    """Basis values and exact first derivatives at ``times``.

    Returns dense arrays ``(B, dB)`` of shape (len(times), M).  The derivative
    uses the B-spline difference formula on the reduced knot vector.
    """
    times = np.asarray(times, dtype=float)
    knots = np.asarray(knots, dtype=float)
    n_coef = len(knots) - degree - 1
    B = BSpline.design_matrix(times, knots, degree).toarray()
    # d/dt sum b_m N_m = sum_m degree (b_{m+1} - b_m)/(t_{m+k+1} - t_{m+1}) N_{m+1, k-1}
    span = knots[degree + 1 : n_coef + degree] - knots[1:n_coef]
    diff = np.zeros((n_coef - 1, n_coef))
    idx = np.arange(n_coef - 1)
    w = np.where(span > 0, degree / np.where(span > 0, span, 1.0), 0.0)
    diff[idx, idx] = -w
    diff[idx, idx + 1] = w
    Bd = BSpline.design_matrix(times, knots[1:-1], degree - 1).toarray()
    return B, Bd @ diff


@dataclass(frozen=True, eq=False)
class SplineConcentration:
    """Cubic B-spline time curves, coefficients of shape (M, R)."""

    coefficients: np.ndarray
    knots: np.ndarray
    degree: int = DEGREE

    def __post_init__(self):
        coef = np.asarray(self.coefficients, dtype=float)
        if coef.ndim == 1:
            coef = coef[:, None]
        knots = np.asarray(self.knots, dtype=float)
        if coef.shape[0] != len(knots) - self.degree - 1:
            raise ConfigurationError(
                f"{coef.shape[0]} coefficients do not match {len(knots)} knots of degree {self.degree}"
            )
        object.__setattr__(self, "coefficients", coef)
        object.__setattr__(self, "knots", knots)

    @classmethod
    def zeros(cls, grid: Grid, intervals_per_frame: int = INTERVALS_PER_FRAME):
        knots = clamped_knots(grid.n_frames * grid.cycle_time, intervals_per_frame * grid.n_frames)
        return cls(np.zeros((len(knots) - DEGREE - 1, grid.n_voxels)), knots)

    @property
    def n_coefficients(self) -> int:
        return self.coefficients.shape[0]

    @property
    def n_voxels(self) -> int:
        return self.coefficients.shape[1]

    @property
    def span(self) -> tuple[float, float]:
        return float(self.knots[self.degree]), float(self.knots[-self.degree - 1])

    def with_coefficients(self, coefficients) -> "SplineConcentration":
        return SplineConcentration(np.asarray(coefficients, float).reshape(self.coefficients.shape), self.knots, self.degree)

    def __call__(self, times, nu: int = 0) -> np.ndarray:
        B, dB = design_matrices(times, self.knots, self.degree)
        return (B if nu == 0 else dB) @ self.coefficients


@dataclass(frozen=True, eq=False)
class SampledConcentration:
    """Concentration ``c`` and its time derivative ``dc``, shape (n_times, R)."""

    c: np.ndarray
    dc: np.ndarray

    def __post_init__(self):
        if self.c.shape != self.dc.shape:
            raise ValueError("c and dc must have the same shape")

    @classmethod
    def constant(cls, values, n_times: int):
        values = np.asarray(values, dtype=float)
        c = np.broadcast_to(values, (n_times, values.size)).copy()
        return cls(c, np.zeros_like(c))

    @property
    def n_times(self) -> int:
        return self.c.shape[0]


def eval_spline(sc: SplineConcentration, grid: Grid) -> SampledConcentration:
    """Sample ``c`` and ``dc/dt`` at the record times of ``grid``."""
    lo, hi = sc.span
    T = grid.n_frames * grid.cycle_time
    if lo > 0 or hi < T * (1 - 1e-12):
        raise ConfigurationError(f"spline span [{lo}, {hi}] does not cover the record [0, {T}]")
    if sc.n_voxels != grid.n_voxels:
        raise ConfigurationError("spline voxel count does not match the grid")
    times = np.clip(grid.record_times, lo, hi)
    B, dB = design_matrices(times, sc.knots, sc.degree)
    return SampledConcentration(B @ sc.coefficients, dB @ sc.coefficients)


def spline_bump(t, center: float, width: float, height: float = 1.0):
    """Cubic bump of total support ``width``: smoothstep rise, mirrored fall.

    This is the clamped cubic spline through (start, 0), (center, height),
    (end, 0) with zero slope at both ends; its steepest slope is
    ``1.5 * height / (width / 2)``.  Returns value and derivative.
    """
    half = width / 2.0
    s = 1.0 - np.abs(np.asarray(t, dtype=float) - center) / half
    inside = s > 0
    s = np.clip(s, 0.0, 1.0)
    val = height * (3 * s**2 - 2 * s**3)
    slope = height * 6 * s * (1 - s) / half
    dval = np.where(inside, -np.sign(np.asarray(t, dtype=float) - center) * slope, 0.0)
    return np.where(inside, val, 0.0), dval


def _fit_bump(knots, center, width, height, window=None):
    """Nonnegative least-squares coefficients of a :func:`spline_bump` in the basis ``knots``.

    Exact when the bump spans the whole clamped range and its center is a knot.  ``window``
    restricts the fit to basis functions supported inside (lo, hi).
    """
    n_coef = len(knots) - DEGREE - 1
    lo, hi = knots[DEGREE], knots[-DEGREE - 1]
    times = np.linspace(lo, hi, 40 * n_coef)
    target, _ = spline_bump(times, center, width, height)
    B, _ = design_matrices(times, knots)
    keep = np.ones(n_coef, dtype=bool)
    if window is not None:
        starts, ends = knots[:n_coef], knots[DEGREE + 1 :]
        keep = (starts >= window[0]) & (ends <= window[1])
    coef = np.zeros(n_coef)
    coef[keep], _ = nnls(B[:, keep], target)
    coef[np.abs(coef) < 1e-12 * height] = 0.0
    return coef


def _bump_column(knots, center, width, height, window=None, pin_peak_time: bool = False):
    """Projected bump with its peak value pinned to ``height``.

    With ``pin_peak_time`` the target bump is shifted (bisection) until the
    projected curve peaks at ``center``.
    """
    lo, hi = (knots[DEGREE], knots[-DEGREE - 1]) if window is None else window
    dense = np.linspace(lo, hi, 8001)
    B, _ = design_matrices(dense, knots)

    def project(c):
        coef = _fit_bump(knots, c, width, height, window)
        return coef, B @ coef

    if pin_peak_time:
        a = max(center - width / 4, lo + width / 2)
        b = min(center + width / 4, hi - width / 2)

        def miss(c):
            return dense[np.argmax(project(c)[1])] - center

        target = brentq(miss, a, b, xtol=1e-10)
    else:
        target = center
    coef, curve = project(target)
    return coef * (height / np.max(curve))


def _check_3x3(grid: Grid):
    if tuple(grid.shape) != (3, 3, 1):
        raise ConfigurationError(f"phantom requires a 3x3x1 grid, got {grid.shape}")


def one_peak_phantom(variant: str, grid: Grid, intervals_per_frame: int = INTERVALS_PER_FRAME) -> SplineConcentration:
    """Single bolus in the central voxel r5; variants '1F', '2F', '4F'.

    1F lives inside the first frame and peaks at 0.4128 ms; 2F and 4F span
    the first two and four frames, peaking in the middle of their support.
    The 4F curve rises over two frames, so its steepest slope is
    1.5 * 2.667 / (2 T_c) ~ 3064 1/s.
    """
    _check_3x3(grid)
    Tc = grid.cycle_time
    widths = {"1F": 1, "2F": 2, "4F": 4}
    if variant not in widths:
        raise ConfigurationError(f"unknown one-peak variant {variant!r}")
    w = widths[variant]
    if grid.n_frames < w:
        raise ConfigurationError(f"variant {variant} needs at least {w} frames")
    sc = SplineConcentration.zeros(grid, intervals_per_frame)
    if variant == "1F":
        center = ONE_PEAK_1F_TIME * Tc / 652.8e-6
        coef = _bump_column(
            sc.knots, center, 2 * (Tc - center), ONE_PEAK_HEIGHT, window=(0.0, Tc), pin_peak_time=True
        )
    else:
        coef = _bump_column(sc.knots, w * Tc / 2, w * Tc, ONE_PEAK_HEIGHT, window=(0.0, w * Tc))
    coefficients = sc.coefficients.copy()
    coefficients[:, grid.voxel_index(1, 1) - 1] = coef
    return sc.with_coefficients(coefficients)


def three_peak_phantom(grid: Grid, intervals_per_frame: int = INTERVALS_PER_FRAME) -> SplineConcentration:
    """Bolus travelling r4 -> r5 -> r6 with peaks mid-frame 3, 4 and 5.

    Each peak is a 4-frame wide bump of height 6.667.
    """
    _check_3x3(grid)
    if grid.n_frames < 7:
        raise ConfigurationError("three-peak phantom needs at least 7 frames")
    Tc = grid.cycle_time
    sc = SplineConcentration.zeros(grid, intervals_per_frame)
    coefficients = sc.coefficients.copy()
    for ix, frame in zip(range(3), (3, 4, 5)):
        center = (frame - 0.5) * Tc
        window = (center - 2 * Tc, center + 2 * Tc)
        coefficients[:, grid.voxel_index(ix, 1) - 1] = _bump_column(
            sc.knots, center, 4 * Tc, THREE_PEAK_HEIGHT, window
        )
    return sc.with_coefficients(coefficients)


def _smootherstep(s):
    s = np.clip(s, 0.0, 1.0)
    return s**3 * (10 - 15 * s + 6 * s**2), 30 * s**2 * (1 - s) ** 2


def smooth_pulse(t, start: float, rise: float, plateau: float, fall: float, height: float = 1.0):
    """C^2 pulse: quintic ramp up, flat top, quintic ramp down.  Returns (c, dc/dt)."""
    t = np.asarray(t, dtype=float)
    up, dup = _smootherstep((t - start) / rise)
    down, ddown = _smootherstep((t - start - rise - plateau) / fall)
    c = height * up * (1 - down)
    dc = height * (dup / rise * (1 - down) - up * ddown / fall)
    return c, dc


@dataclass(frozen=True, eq=False)
class ExampleConcentration:
    times: np.ndarray
    c: np.ndarray
    dc: np.ndarray

    @property
    def c_hat(self) -> np.ndarray:
        return np.fft.fft(self.c)

    @property
    def dc_hat(self) -> np.ndarray:
        return np.fft.fft(self.dc)


def example_concentration(kind: int, n_samples: int = 1632, cycle_time: float = 652.8e-6) -> ExampleConcentration:
    """Single-voxel concentration curves within one cycle.

    1: short pulse early in the cycle; 2: steep rise, plateau, steep fall;
    3: slow rise and fall; 4: two short pulses.
    """
    Tc = cycle_time
    t = np.linspace(0.0, Tc, n_samples)
    short = Tc / 6
    if kind == 1:
        c, dc = smooth_pulse(t, Tc / 12, short / 2, 0.0, short / 2)
    elif kind == 2:
        c, dc = smooth_pulse(t, Tc / 12, Tc / 12, Tc / 3, Tc / 12)
    elif kind == 3:
        c, dc = smooth_pulse(t, Tc / 6, Tc / 3, 0.0, Tc / 3)
    elif kind == 4:
        c1, d1 = smooth_pulse(t, Tc / 12, short / 2, 0.0, short / 2)
        c2, d2 = smooth_pulse(t, Tc / 12 + Tc / 2, short / 2, 0.0, short / 2)
        c, dc = c1 + c2, d1 + d2
    else:
        raise ConfigurationError(f"unknown example concentration kind {kind}")
    return ExampleConcentration(t, c, dc)


PHANTOMS = ("one-peak-1F", "one-peak-2F", "one-peak-4F", "three-peak", "zero")
DEFAULT_FRAMES = {"one-peak-1F": 4, "one-peak-2F": 4, "one-peak-4F": 4, "three-peak": 10, "zero": 4}


def make_phantom(name: str, grid: Grid, intervals_per_frame: int = INTERVALS_PER_FRAME) -> SplineConcentration:
    """Phantom by name, see :data:`PHANTOMS`."""
    if name == "zero":
        return SplineConcentration.zeros(grid, intervals_per_frame)
    if name == "three-peak":
        return three_peak_phantom(grid, intervals_per_frame)
    if name.startswith("one-peak-"):
        return one_peak_phantom(name[len("one-peak-"):], grid, intervals_per_frame)
    raise ConfigurationError(f"unknown phantom {name!r}; choose from {', '.join(PHANTOMS)}")
