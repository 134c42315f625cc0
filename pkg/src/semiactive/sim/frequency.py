"""Stepped-sine frequency response and modal peak extraction."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from ..errors import ValidationError
from ..model import natural_frequencies
from ..road import Sine
from .core import SimConfig, simulate


@dataclass(frozen=True, eq=False)
class FrequencyResponse:
    freqs: np.ndarray  # Hz
    rms_a_s: np.ndarray
    rms_a_u: np.ndarray
    amplitude: float

    def signal(self, name: str) -> np.ndarray:
        if name not in ("rms_a_s", "rms_a_u"):
            raise KeyError(name)
        return getattr(self, name)


@dataclass(frozen=True)
class ModalPeak:
    mode: int
    signal: str
    natural_hz: float
    peak_hz: float
    peak_value: float


def frequency_response(
    cfg: SimConfig,
    freqs,
    amplitude: float = 0.01,
    cycles_settle: int = 20,
    cycles_measure: int = 10,
) -> FrequencyResponse:
    """Steady-state RMS body and wheel acceleration under pure sine roads.

    Each frequency is an independent run from rest: ``cycles_settle`` periods
    are discarded and RMS is taken over the next ``cycles_measure`` periods.
    The road in ``cfg`` is ignored.
    """
    freqs = np.asarray(freqs, dtype=np.float64)
    if freqs.ndim != 1 or freqs.size == 0:
        raise ValidationError("freqs must be a non-empty 1-D sequence")
    if np.any(freqs <= 0.0) or np.any(np.diff(freqs) <= 0.0):
        raise ValidationError("freqs must be positive and strictly ascending")
    if cycles_settle < 0 or cycles_measure < 1:
        raise ValidationError("need cycles_settle >= 0 and cycles_measure >= 1")
    dt = cfg.dt
    rms_s = np.empty(freqs.size)
    rms_u = np.empty(freqs.size)
    for i, f in enumerate(freqs):
        n_settle = int(round(cycles_settle / (f * dt)))
        n_measure = max(1, int(round(cycles_measure / (f * dt))))
        run = replace(cfg, road=Sine(amplitude, float(f)), t_end=(n_settle + n_measure) * dt, record_stride=1)
        traj = simulate(run)
        window = slice(n_settle, n_settle + n_measure)
        rms_s[i] = math.sqrt(float(np.mean(traj.a_s[window] ** 2)))
        rms_u[i] = math.sqrt(float(np.mean(traj.a_u[window] ** 2)))
    return FrequencyResponse(freqs, rms_s, rms_u, float(amplitude))


def modal_peaks(resp: FrequencyResponse, natural_hz, band: float = 1.5) -> list[ModalPeak]:
    """Largest response within ``[f_n / band, f_n * band]`` of each natural frequency.

    Mode 1 (body bounce) reads sprung acceleration and mode 2 (wheel hop)
    reads unsprung acceleration.
    """
    if band <= 1.0:
        raise ValidationError("band factor must exceed 1")
    peaks = []
    for mode, (f_n, name) in enumerate(zip(natural_hz, ("rms_a_s", "rms_a_u")), start=1):
        y = resp.signal(name)
        inside = (resp.freqs >= f_n / band) & (resp.freqs <= f_n * band)
        if not np.any(inside):
            # fall back to the nearest grid point
            inside = np.zeros(resp.freqs.size, dtype=bool)
            inside[int(np.argmin(np.abs(resp.freqs - f_n)))] = True
        idx = np.flatnonzero(inside)
        j = idx[int(np.argmax(y[idx]))]
        peaks.append(ModalPeak(mode, name, float(f_n), float(resp.freqs[j]), float(y[j])))
    return peaks


def natural_frequencies_hz(cfg: SimConfig) -> tuple[float, float]:
    w1, w2 = natural_frequencies(cfg.vehicle)
    return w1 / (2.0 * math.pi), w2 / (2.0 * math.pi)
