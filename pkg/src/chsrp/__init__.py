"""Circular-harmonics steered-response-power azimuth estimation.

The public surface is re-exported here; see the submodules for the
lower-level building blocks.
"""

from .bench import ExperimentConfig, RunReport, circular_stats, run_experiment, success_rate, sweep
from .estimator import CHSRPLocalizer
from .filters import FilterBank, design_filters, design_inverse, design_minnorm, design_tikhonov
from .geometry import ArrayGeometry, Ring, max_order, mic_positions, named_geometry
from .harmonics import HarmonicCoefficients, bessel_j, decompose_array, decompose_ring
from .pipeline import FrameConfig, SpectralFrame
from .simulator import SceneSpec, SourceSpec, scenario_presets, synth_time_domain
from .srp import SpatialSpectrum, SteeringGrid, argmax_azimuth, srp_spectrum

__version__ = "0.1.0"

__all__ = [
    "ArrayGeometry", "CHSRPLocalizer", "ExperimentConfig", "FilterBank", "FrameConfig",
    "HarmonicCoefficients", "Ring", "RunReport", "SceneSpec", "SourceSpec", "SpatialSpectrum",
    "SpectralFrame", "SteeringGrid", "argmax_azimuth", "bessel_j", "circular_stats",
    "decompose_array", "decompose_ring", "design_filters", "design_inverse", "design_minnorm",
    "design_tikhonov", "max_order", "mic_positions", "named_geometry", "run_experiment",
    "scenario_presets", "srp_spectrum", "success_rate", "sweep", "synth_time_domain",
]
