"""Road elevation profiles: closed-form generators and tabulated samples.

Every profile lowers to the same kernel triple ``(kind, params, samples)`` so
the integrator can evaluate it without calling back into Python.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field

import numpy as np
from numba import njit

from .errors import RoadFormatError, ValidationError

ROAD_FLAT, ROAD_BUMP, ROAD_SINE, ROAD_CHIRP, ROAD_TABLE = range(5)


@njit(cache=True, error_model="numpy")
def road_height_kernel(kind, params, samples, t):
    if kind == 1:
        h_b, t1, t2 = params[0], params[1], params[2]
        if t1 <= t <= t2:
            return 0.5 * h_b * (1.0 - math.cos(2.0 * math.pi * (t - t1) / (t2 - t1)))
        return 0.0
    if kind == 2:
        return params[0] * math.sin(2.0 * math.pi * params[1] * t)
    if kind == 3:
        f0, f1, duration, amp = params[0], params[1], params[2], params[3]
        if t < 0.0 or t > duration:
            return 0.0
        phase = f0 * t + (f1 - f0) * t * t / (2.0 * duration)
        return amp * math.sin(2.0 * math.pi * phase)
    if kind == 4:
        t0, step = params[0], params[1]
        n = samples.shape[0]
        u = (t - t0) / step
        if u <= 0.0:
            return samples[0]
        if u >= n - 1:
            return samples[n - 1]
        i = int(math.floor(u))
        w = u - i
        return samples[i] + w * (samples[i + 1] - samples[i])
    return 0.0


_EMPTY = np.zeros(1)


class RoadProfile:
    """Base class. Subclasses provide ``kind`` and ``params``."""

    kind: int = ROAD_FLAT

    def params(self) -> np.ndarray:
        return np.zeros(4)

    def samples(self) -> np.ndarray:
        return _EMPTY

    def kernel_args(self):
        return self.kind, self.params(), self.samples()

    def height(self, t: float) -> float:
        return road_height_kernel(self.kind, self.params(), self.samples(), float(t))

    def sample(self, times) -> np.ndarray:
        kind, params, samples = self.kernel_args()
        return np.array([road_height_kernel(kind, params, samples, float(t)) for t in np.asarray(times)])

    def describe(self) -> dict:
        return {"type": "flat"}


@dataclass(frozen=True)
class Flat(RoadProfile):
    kind = ROAD_FLAT


@dataclass(frozen=True)
class Bump(RoadProfile):
    """Half-cosine bump of height ``h_b`` between ``t1`` and ``t2``."""

    h_b: float = 0.05
    t1: float = 1.0
    t2: float = 1.5
    kind = ROAD_BUMP

    def __post_init__(self):
        if not (math.isfinite(self.h_b) and self.h_b >= 0.0):
            raise ValidationError("bump height h_b must be non-negative")
        if not (math.isfinite(self.t1) and math.isfinite(self.t2) and self.t2 > self.t1):
            raise ValidationError("bump requires t2 > t1")

    def params(self):
        return np.array([self.h_b, self.t1, self.t2, 0.0])

    def describe(self):
        return {"type": "bump", "h_b": self.h_b, "t1": self.t1, "t2": self.t2}


@dataclass(frozen=True)
class Sine(RoadProfile):
    """Pure sinusoid starting at zero phase, for stepped-sine testing."""

    amplitude: float
    frequency: float
    kind = ROAD_SINE

    def __post_init__(self):
        if not (math.isfinite(self.amplitude) and math.isfinite(self.frequency) and self.frequency > 0.0):
            raise ValidationError("sine road needs finite amplitude and positive frequency")

    def params(self):
        return np.array([self.amplitude, self.frequency, 0.0, 0.0])

    def describe(self):
        return {"type": "sine", "amplitude": self.amplitude, "frequency": self.frequency}


@dataclass(frozen=True)
class SineSweep(RoadProfile):
    """Linear chirp from ``f0`` to ``f1`` Hz over ``duration`` seconds."""

    f0: float = 0.5
    f1: float = 15.0
    duration: float = 120.0
    amplitude: float = 0.01
    kind = ROAD_CHIRP

    def __post_init__(self):
        if not (self.f0 > 0.0 and self.f1 > 0.0 and self.duration > 0.0):
            raise ValidationError("sine sweep needs f0, f1, duration > 0")
        if not math.isfinite(self.amplitude):
            raise ValidationError("sine sweep amplitude must be finite")

    def params(self):
        return np.array([self.f0, self.f1, self.duration, self.amplitude])

    def instantaneous_frequency(self, t: float) -> float:
        return self.f0 + (self.f1 - self.f0) * t / self.duration

    def describe(self):
        return {"type": "sine_sweep", "f0": self.f0, "f1": self.f1, "duration": self.duration,
                "amplitude": self.amplitude}


@dataclass(frozen=True, eq=False)
class Tabulated(RoadProfile):
    """Uniformly sampled profile, linearly interpolated, held outside its range."""

    t0: float
    step: float
    values: np.ndarray = field(repr=False)
    source: str = "table"
    kind = ROAD_TABLE

    def __post_init__(self):
        values = np.ascontiguousarray(self.values, dtype=np.float64)
        if values.ndim != 1 or values.size < 2:
            raise ValidationError("tabulated road needs at least two samples")
        if not np.all(np.isfinite(values)):
            raise ValidationError("tabulated road contains non-finite heights")
        if not (self.step > 0.0 and math.isfinite(self.step)):
            raise ValidationError("tabulated road needs a positive sample step")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    def params(self):
        return np.array([self.t0, self.step, 0.0, 0.0])

    def samples(self):
        return self.values

    @property
    def times(self) -> np.ndarray:
        return self.t0 + self.step * np.arange(self.values.size)

    def describe(self):
        return {"type": "tabulated", "source": self.source, "t0": self.t0, "step": self.step,
                "n_samples": int(self.values.size)}


# ---------------------------------------------------------------------------
# functional forms
# ---------------------------------------------------------------------------


def bump(t: float, h_b: float, t1: float, t2: float) -> float:
    return Bump(h_b, t1, t2).height(t)


def sine_sweep(t: float, f0: float, f1: float, duration: float, amplitude: float) -> float:
    return SineSweep(f0, f1, duration, amplitude).height(t)


def brownian_road(
    dt: float = 1e-3,
    n_steps: int = 10_000,
    seed: int = 1,
    scale: float = 0.05,
    draws: np.ndarray | None = None,
) -> Tabulated:
    """Random-walk road ``z_r(k dt) = dt * sum_{i<=k} scale * g_i``, ``z_r(0) = 0``.

    ``g_i`` come from numpy's PCG64 seeded with ``seed``. Pass ``draws`` to
    substitute the normal draws (length ``n_steps``) directly.
    """
    if not dt > 0.0:
        raise ValidationError("dt must be positive")
    if n_steps < 1:
        raise ValidationError("n_steps must be at least 1")
    if draws is None:
        draws = np.random.Generator(np.random.PCG64(seed)).standard_normal(n_steps)
    else:
        draws = np.asarray(draws, dtype=np.float64)
        if draws.shape != (n_steps,):
            raise ValidationError(f"expected {n_steps} draws, got shape {draws.shape}")
    z = np.empty(n_steps + 1)
    z[0] = 0.0
    z[1:] = dt * np.cumsum(scale * draws)
    return Tabulated(0.0, dt, z, source=f"brownian(seed={seed})")


# ---------------------------------------------------------------------------
# CSV I/O
# ---------------------------------------------------------------------------


def load_road_csv(path: str | os.PathLike) -> Tabulated:
    """Read a ``t,z_r`` CSV. A single non-numeric first line is taken as a header."""
    with open(path, encoding="utf-8", newline="") as fh:
        lines = fh.read().splitlines()
    times: list[float] = []
    heights: list[float] = []
    linenos: list[int] = []
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line:
            continue
        cells = [c.strip() for c in line.split(",")]
        try:
            row = [float(c) for c in cells]
        except ValueError:
            if lineno == 1:
                continue
            raise RoadFormatError(f"non-numeric row {raw!r}", line=lineno) from None
        if len(row) != 2:
            raise RoadFormatError(f"expected 2 columns, got {len(row)}", line=lineno)
        if not all(math.isfinite(v) for v in row):
            raise RoadFormatError("non-finite value", line=lineno)
        times.append(row[0])
        heights.append(row[1])
        linenos.append(lineno)
    if len(times) < 2:
        raise RoadFormatError(f"{os.fspath(path)}: need at least two samples")
    t = np.array(times)
    steps = np.diff(t)
    if np.any(steps <= 0.0):
        bad = int(np.argmax(steps <= 0.0))
        raise RoadFormatError("time column must be strictly increasing", line=linenos[bad + 1])
    step = (t[-1] - t[0]) / (t.size - 1)
    if np.max(np.abs(steps - step)) > 1e-6 * step:
        raise RoadFormatError("time column is not uniformly spaced")
    return Tabulated(float(t[0]), float(step), np.array(heights), source=os.fspath(path))


def write_road_csv(path: str | os.PathLike, times, heights) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("t,z_r\n")
        for t, z in zip(times, heights):
            fh.write(f"{float(t):.17g},{float(z):.17g}\n")
