"""Spectra of the two system matrices on a 19x19 grid.

S1 holds the moment rate dm/dt and S2 the moment itself.  For a periodic
drive S1(k) = 2 pi i k / T_c * S2(k), so both spectra share their harmonic
pattern while S2 is several orders of magnitude smaller away from DC.
"""

import numpy as np

from dynmpi.analysis import max_spectrum, summarize_spectrum
from dynmpi.grid import make_grid
from dynmpi.system import build_system_pair, to_frequency

grid = make_grid(19, 19, 1, n_samples=1632)
S = to_frequency(build_system_pair(grid))
print(f"grid {grid.shape}, {grid.n_samples} samples, bin spacing {grid.frequencies[1]:.1f} Hz")

for ch, name in enumerate(S.channels):
    s1 = summarize_spectrum(S.s1[ch])
    s2 = summarize_spectrum(S.s2[ch])
    ratio = max_spectrum(S.s2[ch]).max() / max_spectrum(S.s1[ch]).max()
    print(f"\nchannel {name}")
    print(f"  peak spacing   S1 {s1.spacing} bins, S2 {s2.spacing} bins")
    print(f"  hull FWHM      S1 {s1.fwhm:.1f} bins, S2 {s2.fwhm:.1f} bins")
    print(f"  max|S2|/max|S1| = {ratio:.3g}")
    top = s1.bins[np.argsort(s1.m)[::-1][:6]]
    print(f"  strongest S1 bins: {sorted(top.tolist())}")

# the derivative relation holds bin by bin
k = np.arange(1, 200)
rel = np.abs(S.s1[0, k]) / np.maximum(np.abs(S.s2[0, k]), 1e-300)
print(f"\n|S1|/|S2| per bin / (2 pi k / T_c): median {np.median(rel / (2 * np.pi * k[:, None] / grid.cycle_time)):.3f}")
