"""Static and dynamic forward operators in time and frequency domain.

Signals are arrays of shape (channels, n) wrapped in :class:`Signal`.  The
DFT convention is numpy's: unnormalized forward transform.  Products in time
then map to ``(1/n)`` times circular convolutions of spectra.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .phantom import SampledConcentration
from .system import SystemMatrixPair, to_frequency


@dataclass(frozen=True, eq=False)
class Signal:
    data: np.ndarray  # (channels, n)
    channels: tuple
    n_samples: int
    n_frames: int
    cycle_time: float
    domain: str = "time"

    @property
    def n_channels(self) -> int:
        return self.data.shape[0]

    def channel(self, name: str) -> np.ndarray:
        return self.data[self.channels.index(name)]

    def frames(self) -> np.ndarray:
        """Time samples split per frame, shape (channels, F, n_T)."""
        if self.domain != "time":
            raise ValueError("only time-domain records split into frames")
        return self.data.reshape(self.n_channels, self.n_frames, self.n_samples)

    def spectrum(self) -> "Signal":
        if self.domain != "time" or self.n_frames != 1:
            raise ValueError("spectrum is defined for single-frame time signals")
        return Signal(np.fft.fft(self.data, axis=-1), self.channels, self.n_samples, 1, self.cycle_time, "frequency")


def _signal(S: SystemMatrixPair, data, n_frames=1, domain="time") -> Signal:
    return Signal(data, S.channels, S.n_samples, n_frames, S.grid.cycle_time, domain)


def forward_static(S: SystemMatrixPair, c) -> Signal:
    """u(t_j) = eta * sum_i S1(j, i) c_i for a static concentration vector."""
    if S.domain != "time":
        raise ValueError("forward_static expects a time-domain pair")
    c = np.asarray(c, dtype=float)
    if c.shape != (S.n_voxels,):
        raise ValueError(f"concentration must have shape ({S.n_voxels},), got {c.shape}")
    return _signal(S, S.eta * (S.s1 @ c))


def forward_dynamic(S: SystemMatrixPair, conc: SampledConcentration) -> Signal:
    """Hadamard form eta [S1 . c + S2 . Dc] 1_R over a multi-frame record.

    The system functions are repeated cyclically, i.e. record sample j uses
    cycle-local sample j mod n_T.
    """
    if S.domain != "time":
        raise ValueError("forward_dynamic expects a time-domain pair")
    n_T, R = S.n_samples, S.n_voxels
    if conc.c.shape[1] != R:
        raise ValueError(f"concentration has {conc.c.shape[1]} voxels, matrices have {R}")
    n_frames, rest = divmod(conc.n_times, n_T)
    if rest:
        raise ValueError(f"record length {conc.n_times} is not a multiple of n_T = {n_T}")
    c = conc.c.reshape(n_frames, n_T, R)
    dc = conc.dc.reshape(n_frames, n_T, R)
    # (ch, 1, n_T, R) * (F, n_T, R) summed over voxels
    u = np.sum(S.s1[:, None] * c + S.s2[:, None] * dc, axis=-1)
    return _signal(S, S.eta * u.reshape(len(S.channels), -1), n_frames)


def circular_convolve(a, b, method: str = "fft") -> np.ndarray:
    """Circular convolution along the first axis, ``(a * b)[k] = sum_m a[m] b[k - m]``.

    ``method='direct'`` evaluates the defining sum; ``'fft'`` uses the
    convolution theorem.  Extra trailing axes broadcast.
    """
    a = np.asarray(a)
    b = np.asarray(b)
    n = a.shape[0]
    if b.shape[0] != n:
        raise ValueError("operands must have the same length along axis 0")
    if method == "direct":
        m = np.arange(n)
        out = np.empty(np.broadcast_shapes(a.shape, b.shape), dtype=np.result_type(a, b))
        for k in range(n):
            out[k] = np.sum(a * b[(k - m) % n], axis=0)
        return out
    if method == "fft":
        return np.fft.fft(np.fft.ifft(a, axis=0) * np.fft.ifft(b, axis=0), axis=0) * n
    raise ValueError(f"unknown convolution method {method!r}")


def _split_terms(S: SystemMatrixPair, conc: SampledConcentration, method: str):
    Sf = S if S.domain == "frequency" else to_frequency(S)
    n_T = Sf.n_samples
    if conc.n_times != n_T:
        raise ValueError(
            "frequency-domain model needs a single-frame concentration; segment multi-frame records first"
        )
    c_hat = np.fft.fft(conc.c, axis=0)
    dc_hat = np.fft.fft(conc.dc, axis=0)
    a = np.stack([circular_convolve(Sf.s1[k], c_hat, method) for k in range(len(Sf.channels))]) / n_T
    b = np.stack([circular_convolve(Sf.s2[k], dc_hat, method) for k in range(len(Sf.channels))]) / n_T
    return Sf, a, b


def signal_split_voxels(S: SystemMatrixPair, conc: SampledConcentration, method: str = "fft"):
    """Per-voxel terms ``a = S1^ * c^ / n_T`` and ``b = S2^ * Dc^ / n_T``.

    Both have shape (channels, n_K, R).
    """
    _, a, b = _split_terms(S, conc, method)
    return a, b


def signal_split(S: SystemMatrixPair, conc: SampledConcentration, method: str = "fft"):
    """Voxel sums ``A`` and ``B`` with ``u^ = eta (A + B)``, shape (channels, n_K)."""
    a, b = signal_split_voxels(S, conc, method)
    return a.sum(axis=-1), b.sum(axis=-1)


def forward_dynamic_freq(S: SystemMatrixPair, conc: SampledConcentration, method: str = "fft") -> Signal:
    """u^ = eta [S1^ * c^ + S2^ * Dc^] 1_R for a single-frame record."""
    A, B = signal_split(S, conc, method)
    return _signal(S, S.eta * (A + B), 1, "frequency")
