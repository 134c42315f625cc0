"""Semi-active quarter-car suspension with a Bouc-Wen MR damper.

Skyhook, Groundhook, Skygroundhook and PD-Skygroundhook control, gain tuning
over random roads, and bump / stepped-sine benchmarks.
"""

from .control import ActuationMode, ControlCommand, ControllerKind, ControllerSpec, actuate
from .damper import BoucWenParams, hysteresis_rate, mr_force, required_voltage, semi_active_clamp
from .errors import DivergenceError, RoadFormatError, SemiActiveError, SingularMatrixError, ValidationError
from .model import (
    PdGains,
    SimState,
    VehicleParams,
    coupled_accelerations,
    natural_frequencies,
    passive_accelerations,
)
from .sim import AccelSource, PlantMode, SimConfig, Trajectory, compute_metrics, simulate
from .tune import TuneConfig, TuneReport, performance_index, tune
from .config import ConfigError, load_config

__version__ = "0.1.0"

__all__ = [
    "AccelSource",
    "ActuationMode",
    "BoucWenParams",
    "ConfigError",
    "ControlCommand",
    "ControllerKind",
    "ControllerSpec",
    "DivergenceError",
    "PdGains",
    "PlantMode",
    "RoadFormatError",
    "SemiActiveError",
    "SimConfig",
    "SimState",
    "SingularMatrixError",
    "Trajectory",
    "TuneConfig",
    "TuneReport",
    "ValidationError",
    "VehicleParams",
    "actuate",
    "compute_metrics",
    "coupled_accelerations",
    "hysteresis_rate",
    "load_config",
    "mr_force",
    "natural_frequencies",
    "passive_accelerations",
    "performance_index",
    "required_voltage",
    "semi_active_clamp",
    "simulate",
    "tune",
]
