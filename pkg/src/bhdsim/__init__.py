"""Balanced homodyne/heterodyne detection with controllable signal sidebands."""

from .analyzer import AnalyzerConfig, Trace, sweep, zero_span
from .detection import DetectionConfig, TimeSeries, beat_signal, difference_photocurrent, shot_noise
from .errors import ConfigError, NyquistError, SimulationError, StageError
from .fields import LocalOscillator, OpticalField, SpectralComponent, make_two_sideband_field, total_power
from .optics import AomConfig, SplitterConfig, aom_shift, attenuate, beamsplitter_mix

__version__ = "0.1.0"

__all__ = [
    "AnalyzerConfig", "AomConfig", "ConfigError", "DetectionConfig", "LocalOscillator", "NyquistError",
    "OpticalField", "SimulationError", "SpectralComponent", "SplitterConfig", "StageError", "TimeSeries",
    "Trace", "aom_shift", "attenuate", "beamsplitter_mix", "beat_signal", "difference_photocurrent",
    "make_two_sideband_field", "shot_noise", "sweep", "total_power", "zero_span",
]
