"""Bouc-Wen magnetorheological damper: forward force, hysteresis, inverse voltage.

The damper force is::

    F = -(c_oa + c_ob V) v_rel - k_0 z_rel + (alpha_a + alpha_b V) x

where ``v_rel = v_s - v_u`` and ``x`` is the hysteresis variable with::

    dx/dt = -q |v_rel| x - b v_rel |x| + gamma v_rel

The viscous term carries a minus sign so that positive coefficients dissipate.
"""

from __future__ import annotations

import math
from dataclasses import astuple, dataclass

import numpy as np
from numba import njit

from .errors import ValidationError

#: Inversion guard on ``|c_ob v_rel - alpha_b x|`` (N/V).
EPS_DEN = 1e-6


@dataclass(frozen=True)
class BoucWenParams:
    c_oa: float = 2100.0  # N*s/m
    c_ob: float = 3500.0  # N*s/(m*V)
    alpha_a: float = 1400.0  # N
    alpha_b: float = 69500.0  # N/V
    q: float = 48000.0  # 1/m
    b: float = 48000.0  # 1/m
    gamma: float = 4.0
    k_0: float = 0.0  # N/m
    v_max: float = 5.0  # V

    def __post_init__(self):
        for name, value in zip(self.__dataclass_fields__, astuple(self)):
            if not math.isfinite(value):
                raise ValidationError(f"damper.{name} must be finite, got {value!r}")
        for name in ("c_oa", "c_ob", "alpha_a", "alpha_b", "q", "b", "k_0"):
            if getattr(self, name) < 0.0:
                raise ValidationError(f"damper.{name} must be non-negative")
        if self.gamma <= 0.0:
            raise ValidationError("damper.gamma must be positive")
        if self.v_max <= 0.0:
            raise ValidationError("damper.v_max must be positive")

    @property
    def c_max(self) -> float:
        """Largest viscous coefficient the damper can produce."""
        return self.c_oa + self.c_ob * self.v_max

    def as_array(self) -> np.ndarray:
        return np.array(astuple(self), dtype=np.float64)


@njit(cache=True, error_model="numpy")
def mr_force_kernel(v_rel, z_rel, x, voltage, c_oa, c_ob, alpha_a, alpha_b, k_0):
    return -(c_oa + c_ob * voltage) * v_rel - k_0 * z_rel + (alpha_a + alpha_b * voltage) * x


@njit(cache=True, error_model="numpy")
def hysteresis_rate_kernel(x, v_rel, q, b, gamma):
    return -q * abs(v_rel) * x - b * v_rel * abs(x) + gamma * v_rel


@njit(cache=True, error_model="numpy")
def required_voltage_kernel(f_d, v_rel, x, c_oa, c_ob, alpha_a, alpha_b, v_max, eps_den):
    den = c_ob * v_rel - alpha_b * x
    if not abs(den) >= eps_den:
        return 0.0, True
    v_raw = (-c_oa * v_rel + alpha_a * x - f_d) / den
    if v_raw < 0.0:
        return 0.0, True
    if v_raw > v_max:
        return v_max, True
    # + 0.0 folds a -0.0 into +0.0
    return v_raw + 0.0, False


@njit(cache=True, error_model="numpy")
def semi_active_clamp_kernel(f_d, v_rel, c_max, eps_den):
    if not abs(v_rel) > eps_den:
        return 0.0
    c = -f_d / v_rel
    if c < 0.0:
        return 0.0
    if c > c_max:
        return c_max
    return c + 0.0


def _check_finite(**values):
    for name, value in values.items():
        if not math.isfinite(value):
            raise ValidationError(f"{name} must be finite, got {value!r}")


def mr_force(v_rel: float, z_rel: float, x: float, voltage: float, bw: BoucWenParams) -> float:
    """Damper force in N at a voltage inside ``[0, v_max]``.

    Raises
    ------
    ValidationError
        If the voltage is out of range (clamping is the caller's job) or an
        input is not finite.
    """
    _check_finite(v_rel=v_rel, z_rel=z_rel, x=x, voltage=voltage)
    if not 0.0 <= voltage <= bw.v_max:
        raise ValidationError(f"voltage {voltage!r} outside [0, {bw.v_max}]")
    return mr_force_kernel(v_rel, z_rel, x, voltage, bw.c_oa, bw.c_ob, bw.alpha_a, bw.alpha_b, bw.k_0)


def hysteresis_rate(x: float, v_rel: float, bw: BoucWenParams) -> float:
    _check_finite(x=x, v_rel=v_rel)
    return hysteresis_rate_kernel(x, v_rel, bw.q, bw.b, bw.gamma)


def required_voltage(
    f_d: float, v_rel: float, x: float, bw: BoucWenParams, eps_den: float = EPS_DEN
) -> tuple[float, bool]:
    """Voltage that makes the damper produce ``f_d``, clamped to ``[0, v_max]``.

    Returns ``(voltage, saturated)``. ``saturated`` is set when the raw value
    was clamped or when the denominator ``c_ob v_rel - alpha_b x`` is smaller
    than ``eps_den`` in magnitude; in the latter case the voltage is 0.
    """
    _check_finite(f_d=f_d, v_rel=v_rel, x=x)
    return required_voltage_kernel(f_d, v_rel, x, bw.c_oa, bw.c_ob, bw.alpha_a, bw.alpha_b, bw.v_max, eps_den)


def semi_active_clamp(f_d: float, v_rel: float, c_max: float, eps_den: float = EPS_DEN) -> float:
    """Effective viscous coefficient ``clamp(-f_d / v_rel, 0, c_max)``.

    The realised force ``-C * v_rel`` never injects energy. Returns 0 when
    ``|v_rel| <= eps_den``.
    """
    _check_finite(f_d=f_d, v_rel=v_rel)
    if not c_max > 0.0:
        raise ValidationError("c_max must be positive")
    return semi_active_clamp_kernel(f_d, v_rel, c_max, eps_den)
