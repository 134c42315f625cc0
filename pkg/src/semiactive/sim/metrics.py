from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from ..errors import ValidationError
from ..model import VehicleParams
from .core import Trajectory


@dataclass(frozen=True)
class Metrics:
    rms_a_s: float  # m/s^2
    rms_a_u: float  # m/s^2
    peak_travel: float  # mm
    rms_travel: float  # mm
    peak_tire_load: float  # N
    rms_tire_load: float  # N
    energy_monitor_max_rise: float  # J

    def to_dict(self) -> dict:
        return asdict(self)


def _rms(x: np.ndarray) -> float:
    return float(np.sqrt(np.mean(np.square(x))))


def compute_metrics(traj: Trajectory, skip: float = 0.0) -> Metrics:
    """Ride statistics over samples with ``t >= skip``.

    Travel is ``z_s - z_u`` in millimetres; tire load is the dynamic part
    ``k_t (z_u - z_r)``.
    """
    t = traj.t
    if len(traj) == 0:
        raise ValidationError("empty trajectory")
    mask = t >= skip - 1e-12
    if not np.any(mask):
        raise ValidationError(f"no samples at or after skip={skip}")
    p = traj.config.vehicle
    travel = 1e3 * (traj.z_s[mask] - traj.z_u[mask])
    tire = p.k_t * (traj.z_u[mask] - traj.z_r[mask])
    return Metrics(
        rms_a_s=_rms(traj.a_s[mask]),
        rms_a_u=_rms(traj.a_u[mask]),
        peak_travel=float(np.max(np.abs(travel))),
        rms_travel=_rms(travel),
        peak_tire_load=float(np.max(np.abs(tire))),
        rms_tire_load=_rms(tire),
        energy_monitor_max_rise=energy_monitor(traj, p, traj.config.beta),
    )


def percent_reduction(baseline: float, candidate: float) -> float:
    """``100 (baseline - candidate) / baseline``; negative means worse than baseline."""
    if not (math.isfinite(baseline) and baseline > 0.0):
        raise ValidationError(f"baseline must be positive, got {baseline!r}")
    return 100.0 * (baseline - candidate) / baseline


def storage_function(traj: Trajectory, p: VehicleParams, beta: float = 1.0) -> np.ndarray:
    """Kinetic + spring + tire + weighted hysteresis energy at each sample (J)."""
    z_rel = traj.z_s - traj.z_u
    tire = traj.z_u - traj.z_r
    return 0.5 * (
        p.m_s * traj.v_s**2 + p.m_u * traj.v_u**2 + p.k_s * z_rel**2 + p.k_t * tire**2 + beta * traj.x**2
    )


def energy_monitor(traj: Trajectory, p: VehicleParams, beta: float = 1.0) -> float:
    """Largest rise of the storage function over one sample interval with a constant road.

    Intervals where the road moves are skipped, since the road does work on
    the tire there. Returns 0 when the energy never rises.
    """
    if len(traj) < 2:
        return 0.0
    energy = storage_function(traj, p, beta)
    z_r = traj.z_r
    unforced = z_r[1:] == z_r[:-1]
    if not np.any(unforced):
        return 0.0
    rise = np.diff(energy)[unforced]
    return float(max(0.0, np.max(rise)))
