"""Automatic volume control that follows the preferred speech interference level."""
from .config import Config, load_config
from .errors import AvcError, ConfigurationError, DesignError, MeteringError, ProcessingError
from .isolation import (
    Calibration,
    IsolationParams,
    SampleBlock,
    amplitude_correlate,
    isolate_noise,
    phase_correlate,
    subtract_reference,
)
from .meter import BandPartition, PsilSample, band_level, band_partition, psil
from .pipeline import TraceRecord, run_audio, run_pipeline, run_sil
from .prefs import AdjustEvent, ListenerPrefs, SilHistory, on_manual_adjust, update_sil_threshold, weighted_sil_average
from .scenario import Scenario, Spike, canonical_scenario, generate_sil_trace, synthesize_noise_audio
from .solver import SolverParams, SolverState, gain_signal, init_solver, run_trace, step
from .spectrum import FftDesign, GuidelineReport, Spectrum, compute_spectrum, design_fft, validate_design

__version__ = "0.1.0"
