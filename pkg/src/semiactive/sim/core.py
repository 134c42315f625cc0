from __future__ import annotations

import enum
import math
import os
import warnings
from dataclasses import dataclass, field, replace

import numpy as np

from ..control import ActuationMode, ControllerKind, ControllerSpec
from ..damper import EPS_DEN, BoucWenParams
from ..errors import DivergenceError, ValidationError
from ..model import SimState, VehicleParams
from ..road import Bump, RoadProfile
from . import kernel


class PlantMode(str, enum.Enum):
    """EXPLICIT puts the MR damper in the loop; IMPLICIT uses an ideal actuator."""

    EXPLICIT = "explicit"
    IMPLICIT = "implicit"


class AccelSource(str, enum.Enum):
    """Where the PD law gets body/wheel accelerations in explicit mode.

    MODEL predicts them from the closed-loop mass system at the current state.
    DELAYED reuses the accelerations measured at the end of the previous step.
    """

    MODEL = "model"
    DELAYED = "delayed"


@dataclass(frozen=True)
class SimConfig:
    dt: float = 1e-3
    t_end: float = 5.0
    plant_mode: PlantMode = PlantMode.EXPLICIT
    actuation: ActuationMode = ActuationMode.INVERSION
    accel_source: AccelSource = AccelSource.MODEL
    controller: ControllerSpec = field(default_factory=ControllerSpec)
    vehicle: VehicleParams = field(default_factory=VehicleParams)
    damper: BoucWenParams = field(default_factory=BoucWenParams)
    road: RoadProfile = field(default_factory=Bump)
    record_stride: int = 1
    substeps: int = 0  # 0 = automatic
    beta: float = 1.0
    c_max: float | None = None
    eps_den: float = EPS_DEN
    initial_state: SimState = field(default_factory=SimState)

    def __post_init__(self):
        object.__setattr__(self, "plant_mode", PlantMode(self.plant_mode))
        object.__setattr__(self, "actuation", ActuationMode(self.actuation))
        object.__setattr__(self, "accel_source", AccelSource(self.accel_source))
        if not (math.isfinite(self.dt) and self.dt > 0.0):
            raise ValidationError("sim.dt must be positive")
        if not (math.isfinite(self.t_end) and self.t_end >= self.dt):
            raise ValidationError("sim.t_end must be at least dt")
        if int(self.record_stride) != self.record_stride or self.record_stride < 1:
            raise ValidationError("sim.record_stride must be a positive integer")
        if int(self.substeps) != self.substeps or self.substeps < 0:
            raise ValidationError("sim.substeps must be a non-negative integer (0 = auto)")
        if not (math.isfinite(self.beta) and self.beta >= 0.0):
            raise ValidationError("sim.beta must be non-negative")
        if self.c_max is not None and not (math.isfinite(self.c_max) and self.c_max > 0.0):
            raise ValidationError("sim.c_max must be positive")
        if self.plant_mode is PlantMode.EXPLICIT and self.dt > 1e-3:
            warnings.warn(
                f"dt={self.dt:g} s exceeds 1e-3 s; the hysteresis state is stiff in explicit mode",
                RuntimeWarning,
                stacklevel=3,
            )

    @property
    def n_steps(self) -> int:
        return int(math.floor(self.t_end / self.dt + 1e-9))

    @property
    def n_records(self) -> int:
        return self.n_steps // self.record_stride + 1

    @property
    def effective_c_max(self) -> float:
        return self.damper.c_max if self.c_max is None else self.c_max

    def with_controller(self, controller: ControllerSpec) -> "SimConfig":
        return replace(self, controller=controller)

    def kernel_args(self):
        opts = np.array(
            [
                0 if self.plant_mode is PlantMode.EXPLICIT else 1,
                0 if self.actuation is ActuationMode.INVERSION else 1,
                0 if self.accel_source is AccelSource.MODEL else 1,
                self.controller.kind.code,
                int(self.substeps),
            ],
            dtype=np.int64,
        )
        return (
            self.vehicle.as_array(),
            self.damper.as_array(),
            self.controller.params_array(),
            opts,
            float(self.effective_c_max),
            float(self.eps_den),
        )


TRAJECTORY_COLUMNS = ("t", "z_s", "z_u", "v_s", "v_u", "x", "a_s", "a_u", "f_desired", "f_realized", "voltage", "z_r")


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Recorded closed-loop signals. Arrays are read-only."""

    data: np.ndarray = field(repr=False)  # (n, 13): TRAJECTORY_COLUMNS + saturated
    config: SimConfig

    def __post_init__(self):
        self.data.setflags(write=False)

    def __len__(self):
        return self.data.shape[0]

    def column(self, name: str) -> np.ndarray:
        if name == "saturated":
            return self.data[:, 12] != 0.0
        return self.data[:, TRAJECTORY_COLUMNS.index(name)]

    def __getattr__(self, name):
        if name in TRAJECTORY_COLUMNS or name == "saturated":
            return self.column(name)
        raise AttributeError(name)

    @property
    def v_rel(self) -> np.ndarray:
        return self.v_s - self.v_u

    def state(self, i: int) -> SimState:
        return SimState.from_array(self.data[i, 1:6])

    def to_csv(self, path: str | os.PathLike) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(",".join(TRAJECTORY_COLUMNS) + "\n")
            for row in self.data[:, :12]:
                fh.write(",".join(format(float(v), ".17g") for v in row) + "\n")


@dataclass(frozen=True)
class StepDiagnostics:
    f_desired: float
    f_realized: float
    voltage: float
    saturated: bool
    a_s: float  # at step start, under the new command
    a_u: float
    next_acc: tuple[float, float]  # at step end, under the held command
    substeps: int
    z_r: float


def step(
    state: SimState, t: float, cfg: SimConfig, prev_acc: tuple[float, float] = (0.0, 0.0)
) -> tuple[SimState, StepDiagnostics]:
    """Advance one control period ``cfg.dt`` from ``state`` at time ``t``.

    The command is computed once from the state at ``t`` and held over the
    RK4 stages (zero-order hold). ``prev_acc`` feeds the delayed acceleration
    source; pass ``diagnostics.next_acc`` from the previous call.
    """
    veh, bw, ctrl, opts, c_max, eps_den = cfg.kernel_args()
    road_kind, road_p, road_s = cfg.road.kernel_args()
    y = state.as_array()
    cmd = np.empty(kernel.CMD_SIZE)
    kernel.command(y, float(t), float(prev_acc[0]), float(prev_acc[1]), veh, bw, ctrl, opts, c_max, eps_den,
                   road_kind, road_p, road_s, cmd, np.empty(5))
    acc = np.zeros(3)
    y_new = y.copy()
    kernel.advance(y_new, float(t), cfg.dt, veh, bw, ctrl, opts, cmd[kernel.CMD_HELD_V], cmd[kernel.CMD_HELD_C],
                   road_kind, road_p, road_s, acc, np.empty((5, 5)))
    if not np.all(np.isfinite(y_new)):
        raise DivergenceError(t, cfg.dt)
    diag = StepDiagnostics(
        f_desired=float(cmd[kernel.CMD_F_DES]),
        f_realized=float(cmd[kernel.CMD_F_REAL]),
        voltage=float(cmd[kernel.CMD_VOLT]),
        saturated=bool(cmd[kernel.CMD_SAT]),
        a_s=float(cmd[kernel.CMD_A_S]),
        a_u=float(cmd[kernel.CMD_A_U]),
        next_acc=(float(acc[0]), float(acc[1])),
        substeps=int(acc[2]),
        z_r=float(cmd[kernel.CMD_Z_R]),
    )
    return SimState.from_array(y_new), diag


def simulate(cfg: SimConfig) -> Trajectory:
    """Integrate from ``cfg.initial_state`` (rest by default) to ``cfg.t_end``.

    Raises
    ------
    DivergenceError
        If any step produces a non-finite state.
    """
    veh, bw, ctrl, opts, c_max, eps_den = cfg.kernel_args()
    road_kind, road_p, road_s = cfg.road.kernel_args()
    rec = np.zeros((cfg.n_records, 13))
    bad = kernel.simulate_kernel(
        cfg.initial_state.as_array(), cfg.dt, cfg.n_steps, int(cfg.record_stride),
        veh, bw, ctrl, opts, c_max, eps_den, road_kind, road_p, road_s, rec,
    )
    if bad >= 0:
        raise DivergenceError(bad * cfg.dt, cfg.dt)
    if not np.all(np.isfinite(rec)):
        raise DivergenceError(cfg.t_end, cfg.dt, "non-finite value in recorded signals")
    return Trajectory(rec, cfg)


def controller_label(spec: ControllerSpec) -> str:
    return ControllerKind(spec.kind).label
