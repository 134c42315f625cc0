"""Semi-active control laws and the force-to-voltage actuation pipeline."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np
from numba import njit

from .damper import (
    EPS_DEN,
    BoucWenParams,
    mr_force_kernel,
    required_voltage_kernel,
    semi_active_clamp_kernel,
)
from .errors import ValidationError
from .model import PdGains, SimState


class ControllerKind(str, enum.Enum):
    PASSIVE = "passive"
    SKYHOOK = "skyhook"
    GROUNDHOOK = "groundhook"
    SKYGROUNDHOOK = "skygroundhook"
    PD_SKYGROUNDHOOK = "pd_skygroundhook"

    @property
    def code(self) -> int:
        return _KIND_CODES[self]

    @property
    def label(self) -> str:
        return _KIND_LABELS[self]


_KIND_CODES = {k: i for i, k in enumerate(ControllerKind)}
_KIND_LABELS = {
    ControllerKind.PASSIVE: "Passive",
    ControllerKind.SKYHOOK: "Skyhook",
    ControllerKind.GROUNDHOOK: "Groundhook",
    ControllerKind.SKYGROUNDHOOK: "Skygroundhook",
    ControllerKind.PD_SKYGROUNDHOOK: "PD-Skygroundhook",
}


class ActuationMode(str, enum.Enum):
    """How a desired force becomes a damper force.

    INVERSION solves the damper model for a voltage and clamps it to the
    supply range. CLAMP treats the damper as an ideal variable viscous element
    ``-C v_rel`` with ``0 <= C <= c_max``.
    """

    INVERSION = "inversion"
    CLAMP = "clamp"


@dataclass(frozen=True)
class ControllerSpec:
    """Control law selector plus gains. Only the fields used by ``kind`` are read."""

    kind: ControllerKind = ControllerKind.PASSIVE
    c_sky: float = 0.0
    c_gr: float = 0.0
    c_passive: float = 0.0
    pd: PdGains = field(default_factory=PdGains.zero)

    def __post_init__(self):
        object.__setattr__(self, "kind", ControllerKind(self.kind))
        for name in ("c_sky", "c_gr", "c_passive"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value >= 0.0):
                raise ValidationError(f"controller.{name} must be non-negative and finite, got {value!r}")

    @classmethod
    def published(cls, kind: ControllerKind | str) -> "ControllerSpec":
        """The reference tuned gains for each law."""
        kind = ControllerKind(kind)
        if kind is ControllerKind.SKYHOOK:
            return cls(kind, c_sky=17000.0)
        if kind is ControllerKind.GROUNDHOOK:
            return cls(kind, c_gr=4000.0)
        if kind is ControllerKind.SKYGROUNDHOOK:
            return cls(kind, c_sky=25500.0, c_gr=1150.0)
        if kind is ControllerKind.PD_SKYGROUNDHOOK:
            return cls(kind, pd=PdGains())
        return cls(kind)

    def params_array(self) -> np.ndarray:
        g = self.pd
        return np.array(
            [self.c_sky, self.c_gr, self.c_passive, g.p_sky, g.d_sky, g.p_gr, g.d_gr], dtype=np.float64
        )


@dataclass(frozen=True)
class ControlCommand:
    f_desired: float
    voltage: float
    saturated: bool
    f_realized: float


# ---------------------------------------------------------------------------
# control laws
# ---------------------------------------------------------------------------


@njit(cache=True, error_model="numpy")
def skyhook_kernel(v_s, v_rel, c_sky):
    if v_s * v_rel > 0.0:
        return -c_sky * v_rel
    return 0.0


@njit(cache=True, error_model="numpy")
def groundhook_kernel(v_u, v_rel, c_gr):
    if v_u * v_rel < 0.0:
        return -c_gr * v_rel
    return 0.0


@njit(cache=True, error_model="numpy")
def skygroundhook_kernel(v_s, v_u, v_rel, c_sky, c_gr, c_passive):
    if v_s * v_rel > 0.0:
        return -c_sky * v_s - c_gr * v_u
    return -c_passive * v_rel


@njit(cache=True, error_model="numpy")
def pd_skygroundhook_kernel(v_s, a_s, v_u, a_u, p_sky, d_sky, p_gr, d_gr):
    return -p_sky * v_s - d_sky * a_s - p_gr * v_u - d_gr * a_u


@njit(cache=True, error_model="numpy")
def desired_force_kernel(kind, v_s, v_u, a_s, a_u, z_rel, x, ctrl, bw):
    """Dispatch on the integer controller code. ``bw`` is the damper array."""
    v_rel = v_s - v_u
    if kind == 0:
        return mr_force_kernel(v_rel, z_rel, x, 0.0, bw[0], bw[1], bw[2], bw[3], bw[7])
    if kind == 1:
        return skyhook_kernel(v_s, v_rel, ctrl[0])
    if kind == 2:
        return groundhook_kernel(v_u, v_rel, ctrl[1])
    if kind == 3:
        return skygroundhook_kernel(v_s, v_u, v_rel, ctrl[0], ctrl[1], ctrl[2])
    return pd_skygroundhook_kernel(v_s, a_s, v_u, a_u, ctrl[3], ctrl[4], ctrl[5], ctrl[6])


def _finite(*values):
    for v in values:
        if not math.isfinite(v):
            raise ValidationError(f"non-finite controller input {v!r}")


def skyhook_force(v_s: float, v_rel: float, c_sky: float) -> float:
    """On-off skyhook: ``-c_sky v_rel`` when body and suspension velocities agree in sign."""
    _finite(v_s, v_rel, c_sky)
    return skyhook_kernel(v_s, v_rel, c_sky)


def groundhook_force(v_u: float, v_rel: float, c_gr: float) -> float:
    _finite(v_u, v_rel, c_gr)
    return groundhook_kernel(v_u, v_rel, c_gr)


def skygroundhook_force(v_s: float, v_u: float, v_rel: float, c_sky: float, c_gr: float, c_passive: float) -> float:
    """Hybrid law. A single activation condition ``v_s v_rel > 0`` gates both hooks."""
    _finite(v_s, v_u, v_rel, c_sky, c_gr, c_passive)
    return skygroundhook_kernel(v_s, v_u, v_rel, c_sky, c_gr, c_passive)


def pd_skygroundhook_force(v_s: float, a_s: float, v_u: float, a_u: float, g: PdGains) -> float:
    _finite(v_s, a_s, v_u, a_u)
    return pd_skygroundhook_kernel(v_s, a_s, v_u, a_u, g.p_sky, g.d_sky, g.p_gr, g.d_gr)


def desired_force(
    spec: ControllerSpec, state: SimState, bw: BoucWenParams, a_s: float = 0.0, a_u: float = 0.0
) -> float:
    """Force the law asks for in ``state``.

    ``a_s`` and ``a_u`` are only read by the PD law. The passive law asks for
    whatever the damper produces at zero volts.
    """
    return desired_force_kernel(
        spec.kind.code, state.v_s, state.v_u, a_s, a_u, state.z_rel, state.x, spec.params_array(), bw.as_array()
    )


# ---------------------------------------------------------------------------
# actuation
# ---------------------------------------------------------------------------


@njit(cache=True, error_model="numpy")
def actuate_kernel(f_desired, v_rel, z_rel, x, bw, mode, c_max, eps_den, zero_voltage):
    """Returns (voltage, saturated, f_realized, coeff).

    ``coeff`` is the held viscous coefficient in clamp mode and 0 otherwise.
    ``zero_voltage`` forces 0 V in inversion mode (passive damper).
    """
    c_oa, c_ob, alpha_a, alpha_b, k_0, v_max = bw[0], bw[1], bw[2], bw[3], bw[7], bw[8]
    if mode == 1:
        coeff = semi_active_clamp_kernel(f_desired, v_rel, c_max, eps_den)
        f_real = -coeff * v_rel
        volt, sat = required_voltage_kernel(f_real, v_rel, x, c_oa, c_ob, alpha_a, alpha_b, v_max, eps_den)
        return volt, sat, f_real, coeff
    if zero_voltage:
        volt, sat = 0.0, False
    else:
        volt, sat = required_voltage_kernel(f_desired, v_rel, x, c_oa, c_ob, alpha_a, alpha_b, v_max, eps_den)
    f_real = mr_force_kernel(v_rel, z_rel, x, volt, c_oa, c_ob, alpha_a, alpha_b, k_0)
    return volt, sat, f_real, 0.0


def actuate(
    f_desired: float,
    state: SimState,
    bw: BoucWenParams,
    mode: ActuationMode | str = ActuationMode.INVERSION,
    c_max: float | None = None,
    eps_den: float = EPS_DEN,
) -> ControlCommand:
    """Map a desired force onto what the damper can actually deliver.

    In clamp mode the voltage is a diagnostic: the inversion of the realised
    force. ``c_max`` defaults to the damper's viscous ceiling.
    """
    mode = ActuationMode(mode)
    _finite(f_desired)
    c_max = bw.c_max if c_max is None else c_max
    volt, sat, f_real, _ = actuate_kernel(
        f_desired, state.v_rel, state.z_rel, state.x, bw.as_array(),
        1 if mode is ActuationMode.CLAMP else 0, c_max, eps_den, False,
    )
    return ControlCommand(f_desired=f_desired, voltage=volt, saturated=bool(sat), f_realized=f_real)
