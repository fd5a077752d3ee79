"""How much the concentration derivative adds to the signal.

The dynamic spectrum is eta (A + B): A comes from S1 and the concentration,
B from S2 and its time derivative.  Faster curves carry more weight in B.
"""

import numpy as np

from dynmpi.forward import signal_split_voxels
from dynmpi.grid import make_grid
from dynmpi.phantom import SampledConcentration, example_concentration
from dynmpi.system import build_system_pair, to_frequency

grid = make_grid(19, 19, 1, n_samples=1632)
S = to_frequency(build_system_pair(grid))

print("kind  max|c^|/max|Dc^|  max|b|/max|a|")
for kind in (1, 2, 3, 4):
    ex = example_concentration(kind)
    conc = SampledConcentration(
        np.repeat(ex.c[:, None], grid.n_voxels, 1), np.repeat(ex.dc[:, None], grid.n_voxels, 1)
    )
    a, b = signal_split_voxels(S, conc)
    r = np.abs(ex.c_hat).max() / np.abs(ex.dc_hat).max()
    print(f"{kind:4d}  {r:16.3g}  {np.abs(b).max() / np.abs(a).max():13.3g}")
