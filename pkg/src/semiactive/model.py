"""Quarter-car plant: parameters, state, equations of motion and modal analysis.

Sign conventions
----------------
Displacements are positive upward. The damper force ``f`` acts with ``+f`` on
the sprung mass and ``-f`` on the unsprung mass, so it is an internal force and
the pair conserves momentum. The suspension force on the body is::

    F_s = -k_s (z_s - z_u) - c_s (v_s - v_u)
"""

from __future__ import annotations

import math
from dataclasses import astuple, dataclass

import numpy as np
from numba import njit

from .errors import SingularMatrixError, ValidationError


def _require_finite(**values: float) -> None:
    for name, value in values.items():
        if not math.isfinite(value):
            raise ValidationError(f"{name} must be finite, got {value!r}")


@dataclass(frozen=True)
class VehicleParams:
    """Quarter-car constants. Defaults are the reference vehicle."""

    m_s: float = 320.0  # kg
    m_u: float = 45.0  # kg
    c_s: float = 1500.0  # N*s/m
    k_s: float = 22000.0  # N/m
    k_t: float = 192000.0  # N/m

    def __post_init__(self):
        for name, value in zip(("m_s", "m_u", "c_s", "k_s", "k_t"), astuple(self)):
            if not (math.isfinite(value) and value > 0.0):
                raise ValidationError(f"vehicle.{name} must be positive and finite, got {value!r}")

    def as_array(self) -> np.ndarray:
        return np.array(astuple(self), dtype=np.float64)


@dataclass(frozen=True)
class SimState:
    """Plant state: displacements (m), velocities (m/s) and the hysteresis variable."""

    z_s: float = 0.0
    z_u: float = 0.0
    v_s: float = 0.0
    v_u: float = 0.0
    x: float = 0.0

    def __post_init__(self):
        _require_finite(z_s=self.z_s, z_u=self.z_u, v_s=self.v_s, v_u=self.v_u, x=self.x)

    @property
    def v_rel(self) -> float:
        return self.v_s - self.v_u

    @property
    def z_rel(self) -> float:
        return self.z_s - self.z_u

    def as_array(self) -> np.ndarray:
        return np.array(astuple(self), dtype=np.float64)

    @classmethod
    def from_array(cls, y) -> "SimState":
        return cls(*(float(v) for v in y))


@dataclass(frozen=True)
class PdGains:
    """Gains of the PD-Skygroundhook law.

    ``p_*`` are in N*s/m and ``d_*`` in N*s^2/m. Defaults are the published
    tuned values.
    """

    p_sky: float = 7400.0
    d_sky: float = 5600.0
    p_gr: float = 440.0
    d_gr: float = 50.0

    def __post_init__(self):
        for name, value in zip(("p_sky", "d_sky", "p_gr", "d_gr"), astuple(self)):
            if not (math.isfinite(value) and value >= 0.0):
                raise ValidationError(f"gain {name} must be non-negative and finite, got {value!r}")

    def as_array(self) -> np.ndarray:
        return np.array(astuple(self), dtype=np.float64)

    @classmethod
    def zero(cls) -> "PdGains":
        return cls(0.0, 0.0, 0.0, 0.0)


# ---------------------------------------------------------------------------
# numba kernels (shared with the integrator)
# ---------------------------------------------------------------------------


@njit(cache=True, error_model="numpy")
def passive_acc_kernel(z_s, z_u, v_s, v_u, z_r, f, m_s, m_u, c_s, k_s, k_t):
    f_susp = -k_s * (z_s - z_u) - c_s * (v_s - v_u)
    a_s = (f_susp + f) / m_s
    a_u = (-f_susp - k_t * (z_u - z_r) - f) / m_u
    return a_s, a_u


@njit(cache=True, error_model="numpy")
def coupled_acc_kernel(z_s, z_u, v_s, v_u, z_r, f, m_s, m_u, c_s, k_s, k_t, p_sky, d_sky, p_gr, d_gr):
    """Solve the 2x2 closed-loop mass system. Returns (a_s, a_u, det)."""
    f_susp = -k_s * (z_s - z_u) - c_s * (v_s - v_u)
    a11 = m_s + d_sky
    a12 = -d_gr
    a21 = -d_sky
    a22 = m_u + d_gr
    b1 = f_susp + f - p_sky * v_s + p_gr * v_u
    b2 = k_t * (z_r - z_u) - f_susp - f + p_sky * v_s - p_gr * v_u
    det = a11 * a22 - a12 * a21
    a_s = (a22 * b1 - a12 * b2) / det
    a_u = (a11 * b2 - a21 * b1) / det
    return a_s, a_u, det


# ---------------------------------------------------------------------------
# public API
# ---------------------------------------------------------------------------


def passive_accelerations(state: SimState, p: VehicleParams, z_r: float, f_mr: float) -> tuple[float, float]:
    """Body and wheel accelerations with damper force ``f_mr`` (+ on body, - on wheel)."""
    _require_finite(z_r=z_r, f_mr=f_mr)
    return passive_acc_kernel(state.z_s, state.z_u, state.v_s, state.v_u, z_r, f_mr, p.m_s, p.m_u, p.c_s, p.k_s, p.k_t)


def mass_matrix_det(p: VehicleParams, g: PdGains) -> float:
    return p.m_s * p.m_u + p.m_s * g.d_gr + p.m_u * g.d_sky


def coupled_accelerations(
    state: SimState, p: VehicleParams, g: PdGains, z_r: float, f_d: float = 0.0
) -> tuple[float, float]:
    """Accelerations of the ideal-actuator closed loop.

    The derivative gains move onto the left-hand side as added inertia::

        [[m_s + d_sky, -d_gr], [-d_sky, m_u + d_gr]] @ [a_s, a_u] = B

    with ``B = [F_s + f_d - p_sky v_s + p_gr v_u,
    k_t (z_r - z_u) - F_s - f_d + p_sky v_s - p_gr v_u]``.
    ``f_d`` is any additional force applied between the masses.
    """
    _require_finite(z_r=z_r, f_d=f_d)
    if not abs(mass_matrix_det(p, g)) > 1e-12 * p.m_s * p.m_u:
        raise SingularMatrixError("closed-loop mass matrix is singular")
    a_s, a_u, _ = coupled_acc_kernel(
        state.z_s, state.z_u, state.v_s, state.v_u, z_r, f_d,
        p.m_s, p.m_u, p.c_s, p.k_s, p.k_t, g.p_sky, g.d_sky, g.p_gr, g.d_gr,
    )
    return a_s, a_u


def natural_frequencies(p: VehicleParams) -> tuple[float, float]:
    """Undamped natural frequencies (rad/s), ascending.

    Roots of ``w^4 m_s m_u - w^2 (k_s m_u + k_s m_s + k_t m_s) + k_s k_t = 0``
    taken in closed form as a quadratic in ``w^2``.
    """
    a = p.m_s * p.m_u
    b = -(p.k_s * p.m_u + p.k_s * p.m_s + p.k_t * p.m_s)
    c = p.k_s * p.k_t
    disc = b * b - 4.0 * a * c
    if disc < 0.0:
        raise ValidationError("negative discriminant in modal quadratic")
    root = math.sqrt(disc)
    # Citardauq form for the small root avoids cancellation when k_s << k_t.
    w2_hi = (-b + root) / (2.0 * a)
    w2_lo = (2.0 * c) / (-b + root) if c > 0.0 else 0.0
    return math.sqrt(max(w2_lo, 0.0)), math.sqrt(w2_hi)
