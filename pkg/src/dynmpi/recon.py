"""Reconstruction schemes.

* :func:`kaczmarz_static` - cyclic Kaczmarz sweeps for ``A c = u``, optionally
  Tikhonov regularized.
* :func:`reconstruct_parametric` - spline coefficients of the whole record,
  fitted by CGLS (conjugate gradients on the normal equations).
* :func:`reconstruct_frames` - one static vector per frame, gradient descent,
  with the time derivative replaced by the divided difference to the
  previous frame.

Every solver works per receive channel; results carry the per-channel
solutions and their mean.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .forward import Signal
from .phantom import INTERVALS_PER_FRAME, SplineConcentration, clamped_knots, design_matrices
from .system import SystemMatrixPair

log = logging.getLogger(__name__)


class DivergenceError(RuntimeError):
    """Residual grew far beyond its initial value."""


DIVERGENCE_FACTOR = 1e3


@dataclass(frozen=True)
class ReconConfig:
    iterations: int = 200
    solver: str = "cg"
    channels: tuple | None = None
    tikhonov: float = 0.0
    intervals_per_frame: int = INTERVALS_PER_FRAME
    frame_dt: float | None = None  # defaults to the cycle time

    def __post_init__(self):
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")
        if self.tikhonov < 0:
            raise ValueError("tikhonov weight must be >= 0")


@dataclass(eq=False)
class ReconResult:
    """Per-channel solutions and their channel average.

    ``solution`` is a :class:`SplineConcentration` (parametric), an (F, R)
    array (frame-by-frame) or an (R,) vector (Kaczmarz).
    """

    solution: object
    per_channel: dict
    residuals: dict = field(default_factory=dict)


def kaczmarz_static(A, u, iterations: int = 10, tikhonov: float = 0.0, x0=None) -> np.ndarray:
    """Cyclic Kaczmarz on ``A x = u``; ``iterations`` counts full sweeps.

    With ``tikhonov = lam > 0`` the rows are augmented to solve
    ``min |A x - u|^2 + lam |x|^2`` (auxiliary residual variable per row).
    Rows with zero norm are skipped.
    """
    A = np.asarray(A)
    u = np.asarray(u)
    if A.ndim != 2 or u.shape != (A.shape[0],):
        raise ValueError(f"shape mismatch: A {A.shape}, u {u.shape}")
    n_rows, n_cols = A.shape
    x = np.zeros(n_cols, dtype=np.result_type(A, u)) if x0 is None else np.array(x0, dtype=np.result_type(A, u))
    v = np.zeros(n_rows, dtype=x.dtype)
    sq = np.sqrt(tikhonov)
    energy = np.einsum("ij,ij->i", A, A.conj()).real + tikhonov
    rows = np.flatnonzero(energy > 0)
    for _ in range(iterations):
        for j in rows:
            a = A[j]
            step = (u[j] - a @ x - sq * v[j]) / energy[j]
            x += step * a.conj()
            v[j] += sq * step
    return x


def _record_matrices(S: SystemMatrixPair, ch: int, n_frames: int):
    return np.tile(S.s1[ch], (n_frames, 1)), np.tile(S.s2[ch], (n_frames, 1))


class _SplineOperator:
    """Linear map spline coefficients (M, R) -> record samples of one channel."""

    def __init__(self, S: SystemMatrixPair, ch: int, knots, n_frames: int, use_s2: bool = True):
        self.eta = S.eta
        times = np.linspace(0.0, n_frames * S.grid.cycle_time, n_frames * S.n_samples)
        self.B, self.dB = design_matrices(times, knots)
        self.S1, self.S2 = _record_matrices(S, ch, n_frames)
        self.use_s2 = use_s2
        self.shape = (self.B.shape[1], S.n_voxels)

    def __call__(self, coef: np.ndarray) -> np.ndarray:
        out = np.sum(self.S1 * (self.B @ coef), axis=1)
        if self.use_s2:
            out += np.sum(self.S2 * (self.dB @ coef), axis=1)
        return self.eta * out

    def adjoint(self, r: np.ndarray) -> np.ndarray:
        g = self.B.T @ (self.S1 * r[:, None])
        if self.use_s2:
            g += self.dB.T @ (self.S2 * r[:, None])
        return self.eta * g


def _record_spline(S: SystemMatrixPair, u: Signal, intervals_per_frame: int) -> SplineConcentration:
    knots = clamped_knots(u.n_frames * S.grid.cycle_time, intervals_per_frame * u.n_frames)
    return SplineConcentration(np.zeros((len(knots) - 4, S.n_voxels)), knots)


def _check_signal(S: SystemMatrixPair, u: Signal):
    if S.domain != "time" or u.domain != "time":
        raise ValueError("reconstruction works on time-domain data")
    if u.n_samples != S.n_samples or u.data.shape[1] != u.n_frames * S.n_samples:
        raise ValueError("signal sampling does not match the system matrices")


def objective_parametric(spline: SplineConcentration, S: SystemMatrixPair, u: Signal, use_s2: bool = True, channel=0):
    """Half squared residual of the spline model and its gradient w.r.t. the coefficients."""
    _check_signal(S, u)
    ch = S.channel(channel) if isinstance(channel, str) else int(channel)
    op = _SplineOperator(S, ch, spline.knots, u.n_frames, use_s2)
    if op.shape != spline.coefficients.shape:
        raise ValueError("spline basis does not match the record")
    r = op(spline.coefficients) - u.data[u.channels.index(S.channels[ch])]
    return 0.5 * float(r @ r), op.adjoint(r)


def cgls(op, b, shape, iterations: int):
    """Conjugate gradients on the normal equations, zero start.

    Returns the solution and the residual norm |op(x) - b| per iteration
    (entry 0 is the initial residual).
    """
    x = np.zeros(shape)
    r = b.copy()
    s = op.adjoint(r)
    p = s.copy()
    gamma = np.vdot(s, s).real
    r0 = np.linalg.norm(r)
    history = [r0]
    for _ in range(iterations):
        if gamma == 0:
            break
        q = op(p)
        qq = np.vdot(q, q).real
        if qq == 0:
            break
        alpha = gamma / qq
        x += alpha * p
        r -= alpha * q
        s = op.adjoint(r)
        gamma_new = np.vdot(s, s).real
        p = s + (gamma_new / gamma) * p
        gamma = gamma_new
        rn = np.linalg.norm(r)
        history.append(rn)
        if rn > DIVERGENCE_FACTOR * r0:
            raise DivergenceError(f"CGLS residual {rn:.3e} exceeds {DIVERGENCE_FACTOR:g} x initial {r0:.3e}")
    return x, np.array(history)


def reconstruct_parametric(S: SystemMatrixPair, u: Signal, cfg: ReconConfig = ReconConfig(), use_s2: bool = True) -> ReconResult:
    """Fit spline coefficients to a multi-frame record, channel by channel."""
    _check_signal(S, u)
    template = _record_spline(S, u, cfg.intervals_per_frame)
    channels = cfg.channels or tuple(c for c in S.channels if c in u.channels)
    per_channel, residuals = {}, {}
    for name in channels:
        ch = S.channel(name)
        op = _SplineOperator(S, ch, template.knots, u.n_frames, use_s2)
        coef, hist = cgls(op, u.channel(name).astype(float), op.shape, cfg.iterations)
        per_channel[name] = template.with_coefficients(coef)
        residuals[name] = hist
        log.debug("parametric %s: residual %.3e -> %.3e", name, hist[0], hist[-1])
    mean = np.mean([sc.coefficients for sc in per_channel.values()], axis=0)
    return ReconResult(template.with_coefficients(mean), per_channel, residuals)


def _lipschitz(A, n_iter: int = 100) -> float:
    """Largest eigenvalue of A^T A by power iteration."""
    x = np.ones(A.shape[1]) / np.sqrt(A.shape[1])
    lam = 0.0
    for _ in range(n_iter):
        y = A.T @ (A @ x)
        lam = np.linalg.norm(y)
        if lam == 0:
            return 0.0
        x = y / lam
    return float(lam)


def gradient_descent(A, b, iterations: int, x0=None):
    """Minimize 0.5 |A x - b|^2 with a fixed step found by backtracking from 1/L.

    Returns the iterate and the residual norm history.
    """
    x = np.zeros(A.shape[1]) if x0 is None else np.array(x0, dtype=float)
    r = A @ x - b
    f = 0.5 * r @ r
    history = [np.sqrt(2 * f)]
    L = _lipschitz(A)
    if L == 0:
        return x, np.array(history)
    step = 1.0 / L
    g = A.T @ r
    # Armijo on the first step; the accepted step is kept for all iterations
    while True:
        r_try = A @ (x - step * g) - b
        if 0.5 * r_try @ r_try <= f - 0.5 * step * (g @ g) or step < 1e-12 / L:
            break
        step *= 0.5
    r0 = history[0]
    for _ in range(iterations):
        x = x - step * g
        r = A @ x - b
        g = A.T @ r
        rn = np.linalg.norm(r)
        history.append(rn)
        if r0 > 0 and rn > DIVERGENCE_FACTOR * r0:
            raise DivergenceError(f"gradient descent residual {rn:.3e} exceeds {DIVERGENCE_FACTOR:g} x initial")
    return x, np.array(history)


def reconstruct_frames(S: SystemMatrixPair, u: Signal, cfg: ReconConfig = ReconConfig(iterations=100, solver="gd"), use_s2: bool = True) -> ReconResult:
    """Frame-by-frame static reconstruction.

    With ``use_s2`` frame f solves
    ``min |S1 c_f + S2 (c_f - c_{f-1}) / dt - u_f|`` (scaled by eta) with
    ``c_0 = 0``; otherwise ``min |S1 c_f - u_f|``.
    """
    _check_signal(S, u)
    dt = cfg.frame_dt or S.grid.cycle_time
    channels = cfg.channels or tuple(c for c in S.channels if c in u.channels)
    frames = u.frames()
    per_channel, residuals = {}, {}
    for name in channels:
        ch = S.channel(name)
        A1 = S.eta * S.s1[ch]
        A2 = S.eta * S.s2[ch] / dt
        A = A1 + A2 if use_s2 else A1
        prev = np.zeros(S.n_voxels)
        sol, hist = [], []
        for f in range(u.n_frames):
            b = frames[u.channels.index(name), f].astype(float)
            if use_s2:
                b = b + A2 @ prev
            c, h = gradient_descent(A, b, cfg.iterations)
            sol.append(c)
            hist.append(h)
            prev = c
        per_channel[name] = np.array(sol)
        residuals[name] = np.array(hist)
    mean = np.mean(list(per_channel.values()), axis=0)
    return ReconResult(mean, per_channel, residuals)


def reconstruct_kaczmarz(S: SystemMatrixPair, u: Signal, cfg: ReconConfig = ReconConfig(iterations=50, solver="kaczmarz")) -> ReconResult:
    """Static reconstruction of a single-frame record with :func:`kaczmarz_static`."""
    _check_signal(S, u)
    if u.n_frames != 1:
        raise ValueError("Kaczmarz reconstruction expects a single frame")
    channels = cfg.channels or tuple(c for c in S.channels if c in u.channels)
    per_channel = {}
    residuals = {}
    for name in channels:
        A = S.eta * S.s1[S.channel(name)]
        b = u.channel(name)
        c = kaczmarz_static(A, b, cfg.iterations, cfg.tikhonov)
        per_channel[name] = c
        residuals[name] = np.array([np.linalg.norm(b), np.linalg.norm(A @ c - b)])
    mean = np.mean(list(per_channel.values()), axis=0)
    return ReconResult(mean, per_channel, residuals)
