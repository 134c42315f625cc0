"""Fixed-step closed-loop simulation, ride metrics and frequency response."""

from .core import (
    TRAJECTORY_COLUMNS,
    AccelSource,
    PlantMode,
    SimConfig,
    StepDiagnostics,
    Trajectory,
    simulate,
    step,
)
from .frequency import FrequencyResponse, ModalPeak, frequency_response, modal_peaks, natural_frequencies_hz
from .metrics import Metrics, compute_metrics, energy_monitor, percent_reduction, storage_function

__all__ = [
    "TRAJECTORY_COLUMNS",
    "AccelSource",
    "FrequencyResponse",
    "Metrics",
    "ModalPeak",
    "PlantMode",
    "SimConfig",
    "StepDiagnostics",
    "Trajectory",
    "compute_metrics",
    "energy_monitor",
    "frequency_response",
    "modal_peaks",
    "natural_frequencies_hz",
    "percent_reduction",
    "simulate",
    "step",
    "storage_function",
]
