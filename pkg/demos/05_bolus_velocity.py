"""Velocity thresholds implied by the four-frame bolus.

A bolus crossing a 2 mm voxel while its concentration rises over two
frames moves at about 1.5 m/s; the steepest slope of the curve gives a
second, higher estimate.
"""

import numpy as np

from dynmpi.analysis import bolus_velocity
from dynmpi.grid import make_grid
from dynmpi.phantom import one_peak_phantom

grid = make_grid(n_frames=4)
sc = one_peak_phantom("4F", grid)
t = np.linspace(0, 4 * grid.cycle_time, 40001)
c_max = sc(t)[:, 4].max()
cdot_max = np.abs(sc(t, 1)[:, 4]).max()
v_av, v_max = bolus_velocity(2e-3, 4 * grid.cycle_time, c_max, cdot_max)
print(f"c_max {c_max:.4f}, max |dc/dt| {cdot_max:.1f} 1/s")
print(f"v_av {v_av:.3f} m/s, v_max {v_max:.3f} m/s")
