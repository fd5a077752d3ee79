"""Dynamic magnetic particle imaging: Langevin system matrices, a forward
model with a concentration-derivative term, and reconstruction of
time-varying tracer distributions."""

from .analysis import bolus_velocity, hull_approximation, max_spectrum, peak_metrics, summarize_spectrum
from .forward import Signal, forward_dynamic, forward_dynamic_freq, forward_static, signal_split
from .grid import Grid, frame_time_index, make_grid
from .phantom import (
    SampledConcentration,
    SplineConcentration,
    eval_spline,
    example_concentration,
    make_phantom,
    one_peak_phantom,
    three_peak_phantom,
)
from .physics import ConfigurationError, ParticleConfig, ScannerConfig, langevin
from .recon import ReconConfig, kaczmarz_static, reconstruct_frames, reconstruct_kaczmarz, reconstruct_parametric
from .system import SystemMatrixPair, build_system_pair, static_matrix, to_frequency, to_time

__version__ = "0.1.0"
