"""Gain tuning: ride performance index, projected gradient ascent and grid refinement.

The index compares a controller against the passive damper on an ensemble of
random roads,

    J = mean_roads [ lambda_s * %red(RMS a_s) + lambda_u * %red(RMS a_u) ]

so larger is better and a controller identical to passive scores 0.
"""

from __future__ import annotations

import itertools
import json
import math
import os
import time
import warnings
from dataclasses import asdict, dataclass, field, replace
from typing import Callable, Sequence

import numpy as np

from .control import ControllerKind, ControllerSpec
from .errors import DivergenceError, SingularMatrixError, ValidationError
from .model import PdGains
from .road import RoadProfile, brownian_road
from .sim.core import PlantMode, SimConfig, simulate
from .sim.metrics import percent_reduction

Objective = Callable[[np.ndarray], float]

#: Tunable gains per controller, in vector order.
GAIN_NAMES: dict[ControllerKind, tuple[str, ...]] = {
    ControllerKind.PASSIVE: (),
    ControllerKind.SKYHOOK: ("c_sky",),
    ControllerKind.GROUNDHOOK: ("c_gr",),
    ControllerKind.SKYGROUNDHOOK: ("c_sky", "c_gr"),
    ControllerKind.PD_SKYGROUNDHOOK: ("p_sky", "d_sky", "p_gr", "d_gr"),
}

#: Neutral starting point, deliberately far from any published tuning.
DEFAULT_THETA0: dict[ControllerKind, tuple[float, ...]] = {
    ControllerKind.PASSIVE: (),
    ControllerKind.SKYHOOK: (1000.0,),
    ControllerKind.GROUNDHOOK: (1000.0,),
    ControllerKind.SKYGROUNDHOOK: (1000.0, 100.0),
    ControllerKind.PD_SKYGROUNDHOOK: (1000.0, 1000.0, 100.0, 10.0),
}

DEFAULT_FD_STEPS: dict[ControllerKind, tuple[float, ...]] = {
    ControllerKind.PASSIVE: (),
    ControllerKind.SKYHOOK: (10.0,),
    ControllerKind.GROUNDHOOK: (10.0,),
    ControllerKind.SKYGROUNDHOOK: (10.0, 10.0),
    ControllerKind.PD_SKYGROUNDHOOK: (10.0, 10.0, 1.0, 0.5),
}


def gains_to_spec(kind: ControllerKind | str, theta, base: ControllerSpec | None = None) -> ControllerSpec:
    """Controller spec for gain vector ``theta`` (order as in ``GAIN_NAMES``)."""
    kind = ControllerKind(kind)
    names = GAIN_NAMES[kind]
    theta = [float(v) for v in np.atleast_1d(np.asarray(theta, dtype=np.float64))] if names else []
    if len(theta) != len(names):
        raise ValidationError(f"{kind.value} takes {len(names)} gains, got {len(theta)}")
    spec = base if base is not None and base.kind is kind else ControllerSpec(kind)
    if kind is ControllerKind.PD_SKYGROUNDHOOK:
        return replace(spec, pd=PdGains(*theta))
    return replace(spec, **dict(zip(names, theta)))


def spec_to_gains(spec: ControllerSpec) -> np.ndarray:
    if spec.kind is ControllerKind.PD_SKYGROUNDHOOK:
        return spec.pd.as_array()
    return np.array([getattr(spec, n) for n in GAIN_NAMES[spec.kind]], dtype=np.float64)


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GdParams:
    learning_rate: float = 50.0  # gain units per unit of J gradient
    max_iters: int = 200
    fd_steps: tuple[float, ...] | None = None  # None = per-controller default
    tol: float = 1e-4  # relative step size
    max_halvings: int = 8  # step halvings per iteration before giving up

    def __post_init__(self):
        if not (math.isfinite(self.learning_rate) and self.learning_rate >= 0.0):
            raise ValidationError("tune.gd.learning_rate must be non-negative")
        if int(self.max_iters) != self.max_iters or self.max_iters < 0:
            raise ValidationError("tune.gd.max_iters must be a non-negative integer")
        if not (self.tol >= 0.0):
            raise ValidationError("tune.gd.tol must be non-negative")
        if int(self.max_halvings) != self.max_halvings or self.max_halvings < 0:
            raise ValidationError("tune.gd.max_halvings must be a non-negative integer")
        if self.fd_steps is not None:
            steps = tuple(float(h) for h in self.fd_steps)
            if not all(math.isfinite(h) and h > 0.0 for h in steps):
                raise ValidationError("tune.gd.fd_steps must be positive")
            object.__setattr__(self, "fd_steps", steps)


@dataclass(frozen=True)
class GridParams:
    """Radius is ``max(radius_frac * |center|, floor)`` per gain unless ``radius`` is given."""

    points: int = 5
    radius_frac: float = 0.1
    radius: tuple[float, ...] | None = None
    floor: tuple[float, ...] | None = None  # None = the finite-difference steps

    def __post_init__(self):
        if int(self.points) != self.points or self.points < 3 or self.points % 2 == 0:
            raise ValidationError("tune.grid.points must be an odd integer >= 3")
        if not (math.isfinite(self.radius_frac) and self.radius_frac >= 0.0):
            raise ValidationError("tune.grid.radius_frac must be non-negative")
        for name in ("radius", "floor"):
            value = getattr(self, name)
            if value is not None:
                value = tuple(float(r) for r in value)
                if not all(math.isfinite(r) and r >= 0.0 for r in value):
                    raise ValidationError(f"tune.grid.{name} entries must be non-negative")
                object.__setattr__(self, name, value)


@dataclass(frozen=True)
class TuneConfig:
    kind: ControllerKind = ControllerKind.PD_SKYGROUNDHOOK
    theta0: tuple[float, ...] | None = None  # None = DEFAULT_THETA0[kind]
    seeds: tuple[int, ...] = tuple(range(1, 13))
    road_dt: float = 1e-3
    road_steps: int = 10_000
    road_scale: float = 0.05
    lambda_s: float = 1.0
    lambda_u: float = 1.0
    gd: GdParams = field(default_factory=GdParams)
    grid: GridParams = field(default_factory=GridParams)
    sim: SimConfig = field(default_factory=lambda: SimConfig(plant_mode=PlantMode.IMPLICIT))
    validate_explicit: bool = True

    def __post_init__(self):
        object.__setattr__(self, "kind", ControllerKind(self.kind))
        if self.kind is ControllerKind.PASSIVE:
            raise ValidationError("tune.kind: the passive damper has no gains to tune")
        for name in ("lambda_s", "lambda_u"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value >= 0.0):
                raise ValidationError(f"tune.{name} must be non-negative")
        if self.lambda_s == 0.0 and self.lambda_u == 0.0:
            raise ValidationError("tune.lambda_s and tune.lambda_u cannot both be zero")
        seeds = tuple(int(s) for s in self.seeds)
        if not seeds:
            raise ValidationError("tune.seeds must list at least one seed")
        if len(set(seeds)) != len(seeds):
            raise ValidationError("tune.seeds must be distinct")
        object.__setattr__(self, "seeds", seeds)
        if not (math.isfinite(self.road_dt) and self.road_dt > 0.0):
            raise ValidationError("tune.road_dt must be positive")
        if int(self.road_steps) != self.road_steps or self.road_steps < 1:
            raise ValidationError("tune.road_steps must be a positive integer")
        if not math.isfinite(self.road_scale):
            raise ValidationError("tune.road_scale must be finite")
        n = len(GAIN_NAMES[self.kind])
        theta0 = DEFAULT_THETA0[self.kind] if self.theta0 is None else tuple(float(v) for v in self.theta0)
        if len(theta0) != n:
            raise ValidationError(f"tune.theta0 needs {n} gains for {self.kind.value}")
        if not all(math.isfinite(v) and v >= 0.0 for v in theta0):
            raise ValidationError("tune.theta0 gains must be non-negative")
        object.__setattr__(self, "theta0", theta0)
        for name, value in (("gd.fd_steps", self.gd.fd_steps), ("grid.radius", self.grid.radius),
                            ("grid.floor", self.grid.floor)):
            if value is not None and len(value) != n:
                raise ValidationError(f"tune.{name} needs {n} entries for {self.kind.value}")

    @property
    def fd_steps(self) -> np.ndarray:
        steps = self.gd.fd_steps if self.gd.fd_steps is not None else DEFAULT_FD_STEPS[self.kind]
        return np.array(steps, dtype=np.float64)

    @property
    def t_end(self) -> float:
        return self.road_steps * self.road_dt

    def roads(self) -> list[RoadProfile]:
        return [brownian_road(self.road_dt, self.road_steps, seed, self.road_scale) for seed in self.seeds]

    def road_configs(self, plant_mode: PlantMode | None = None) -> list[SimConfig]:
        base = replace(self.sim, t_end=self.t_end, record_stride=1)
        if plant_mode is not None:
            base = replace(base, plant_mode=plant_mode)
        return [replace(base, road=road) for road in self.roads()]

    def echo(self) -> dict:
        return {
            "kind": self.kind.value,
            "gain_names": list(GAIN_NAMES[self.kind]),
            "theta0": list(self.theta0),
            "seeds": list(self.seeds),
            "road_dt": self.road_dt,
            "road_steps": self.road_steps,
            "road_scale": self.road_scale,
            "lambda_s": self.lambda_s,
            "lambda_u": self.lambda_u,
            "gd": {**asdict(self.gd), "fd_steps": self.fd_steps.tolist()},
            "grid": asdict(self.grid),
            "plant_mode": self.sim.plant_mode.value,
            "dt": self.sim.dt,
            "validate_explicit": self.validate_explicit,
        }


# ---------------------------------------------------------------------------
# performance index
# ---------------------------------------------------------------------------


def _rms_pair(cfg: SimConfig) -> tuple[float, float]:
    traj = simulate(cfg)
    return (float(np.sqrt(np.mean(np.square(traj.a_s)))), float(np.sqrt(np.mean(np.square(traj.a_u)))))


def passive_baselines(cfgs: Sequence[SimConfig]) -> list[tuple[float, float]]:
    """RMS (a_s, a_u) of the passive damper on each road."""
    passive = ControllerSpec(ControllerKind.PASSIVE)
    return [_rms_pair(replace(cfg, controller=passive)) for cfg in cfgs]


def aggregate_index(pct_s, pct_u, lambda_s: float = 1.0, lambda_u: float = 1.0) -> float:
    """Mean over roads of ``lambda_s * pct_s + lambda_u * pct_u``."""
    pct_s = np.atleast_1d(np.asarray(pct_s, dtype=np.float64))
    pct_u = np.atleast_1d(np.asarray(pct_u, dtype=np.float64))
    if pct_s.shape != pct_u.shape or pct_s.size == 0:
        raise ValidationError("need one sprung and one unsprung reduction per road")
    total = 0.0
    for s, u in zip(pct_s, pct_u):  # fixed order keeps the sum reproducible
        total += lambda_s * float(s) + lambda_u * float(u)
    return total / pct_s.size


def performance_index(
    theta,
    kind: ControllerKind | str,
    cfgs: Sequence[SimConfig],
    lambda_s: float = 1.0,
    lambda_u: float = 1.0,
    baselines: Sequence[tuple[float, float]] | None = None,
) -> float:
    """Ensemble performance index in percent; ``-inf`` if any road diverges.

    ``baselines`` are the passive RMS pairs for ``cfgs`` and are computed when
    omitted.
    """
    if not cfgs:
        raise ValidationError("performance_index needs at least one road")
    if baselines is None:
        baselines = passive_baselines(cfgs)
    if len(baselines) != len(cfgs):
        raise ValidationError("one passive baseline per road is required")
    spec = gains_to_spec(kind, theta)
    pct_s, pct_u = [], []
    for cfg, (base_s, base_u) in zip(cfgs, baselines):
        try:
            rms_s, rms_u = _rms_pair(replace(cfg, controller=spec))
        except (DivergenceError, SingularMatrixError):
            return -math.inf
        if not (math.isfinite(rms_s) and math.isfinite(rms_u)):
            return -math.inf
        pct_s.append(_reduction(base_s, rms_s))
        pct_u.append(_reduction(base_u, rms_u))
    return aggregate_index(pct_s, pct_u, lambda_s, lambda_u)


def _reduction(baseline: float, candidate: float) -> float:
    # a road with no excitation has nothing to improve on
    if baseline == 0.0:
        return 0.0 if candidate == 0.0 else -math.inf
    return percent_reduction(baseline, candidate)


class CachedObjective:
    """Memoises an objective on the exact gain vector and counts real evaluations."""

    def __init__(self, fn: Objective):
        self.fn = fn
        self.cache: dict[tuple[float, ...], float] = {}

    @staticmethod
    def key(theta) -> tuple[float, ...]:
        # + 0.0 merges -0.0 with 0.0
        return tuple(float(v) + 0.0 for v in np.atleast_1d(np.asarray(theta, dtype=np.float64)))

    def __call__(self, theta) -> float:
        k = self.key(theta)
        if k not in self.cache:
            value = float(self.fn(np.array(k)))
            self.cache[k] = -math.inf if math.isnan(value) else value
        return self.cache[k]

    @property
    def evaluations(self) -> int:
        return len(self.cache)


# ---------------------------------------------------------------------------
# optimisers
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SearchResult:
    theta: np.ndarray
    j: float
    history: list  # [(theta tuple, J)]
    evaluations: int
    stop_reason: str


def _as_objective(J) -> CachedObjective:
    return J if isinstance(J, CachedObjective) else CachedObjective(J)


def fd_gradient(J: Objective, theta: np.ndarray, steps: np.ndarray) -> np.ndarray:
    """Central differences, switching to a forward difference where ``theta - h`` would leave the domain."""
    grad = np.empty(theta.size)
    j0 = None
    for i in range(theta.size):
        h = steps[i]
        up = theta.copy()
        up[i] += h
        if theta[i] - h >= 0.0:
            down = theta.copy()
            down[i] -= h
            grad[i] = (J(up) - J(down)) / (2.0 * h)
        else:
            if j0 is None:
                j0 = J(theta)
            grad[i] = (J(up) - j0) / h
    return grad


def gradient_ascent(J, theta0, params: GdParams = GdParams(), fd_steps=None) -> SearchResult:
    """Projected finite-difference gradient ascent; returns the best gains seen.

    Each iteration proposes ``max(theta + eta * grad, 0)``. A proposal that does
    not improve J halves ``eta`` and is retried, up to ``params.max_halvings``
    times. Stops after ``max_iters`` iterations, when the accepted step is
    smaller than ``tol`` relative to ``|theta|``, or when no step size helps.
    """
    obj = _as_objective(J)
    theta = np.array(theta0, dtype=np.float64).ravel()
    if np.any(~np.isfinite(theta)) or np.any(theta < 0.0):
        raise ValidationError("theta0 must be finite and non-negative")
    steps = params.fd_steps if fd_steps is None else fd_steps
    if steps is None:
        raise ValidationError("finite-difference steps are required")
    steps = np.broadcast_to(np.asarray(steps, dtype=np.float64), theta.shape).copy()
    if np.any(steps <= 0.0):
        raise ValidationError("finite-difference steps must be positive")

    values = []

    def ev(th):
        # track only what this ascent looks at; the cache may be shared with other stages
        v = obj(th)
        values.append(v)
        return v

    j = ev(theta)
    history = [(tuple(theta), j)]
    best_theta, best_j = theta.copy(), j
    eta = float(params.learning_rate)
    reason = "max_iters"
    for _ in range(int(params.max_iters)):
        if eta == 0.0:
            reason = "zero_step"
            break
        grad = fd_gradient(ev, theta, steps)
        if not np.all(np.isfinite(grad)):
            reason = "non_finite_gradient"
            break
        accepted = False
        for _ in range(int(params.max_halvings) + 1):
            cand = np.maximum(theta + eta * grad, 0.0)
            j_cand = ev(cand)
            if j_cand > j:
                accepted = True
                break
            eta *= 0.5
        if not accepted:
            reason = "no_improvement"
            break
        rel = float(np.linalg.norm(cand - theta)) / max(float(np.linalg.norm(theta)), 1.0)
        theta, j = cand, j_cand
        history.append((tuple(theta), j))
        if j > best_j:
            best_theta, best_j = theta.copy(), j
        if rel < params.tol:
            reason = "converged"
            break

    if all(v == -math.inf for v in values):
        warnings.warn("every candidate gain vector was rejected; returning theta0", RuntimeWarning, stacklevel=2)
        best_theta = np.array(theta0, dtype=np.float64).ravel()
        best_j = -math.inf
        reason = "all_rejected"
    return SearchResult(best_theta, best_j, history, obj.evaluations, reason)


def grid_axes(center, radius, points: int) -> list[np.ndarray]:
    """Per-gain sample values: ``points`` evenly spaced over ``center +- radius``, clipped at 0."""
    center = np.asarray(center, dtype=np.float64).ravel()
    radius = np.broadcast_to(np.asarray(radius, dtype=np.float64), center.shape)
    if points < 3 or points % 2 == 0:
        raise ValidationError("grid points per axis must be odd and >= 3")
    if np.any(radius < 0.0) or not np.all(np.isfinite(radius)):
        raise ValidationError("grid radius must be finite and non-negative")
    offsets = np.linspace(-1.0, 1.0, points)
    axes = []
    for c, r in zip(center, radius):
        values = np.maximum(c + r * offsets, 0.0)
        values[points // 2] = c  # exact center, immune to rounding
        axes.append(np.unique(values))
    return axes


def grid_refine(J, center, radius, points: int = 5) -> SearchResult:
    """Exhaustive search of the Cartesian grid around ``center``.

    Points are visited in lexicographic order and only a strictly better J
    replaces the incumbent, so ties go to the lexicographically smallest gains.
    """
    obj = _as_objective(J)
    before = obj.evaluations
    axes = grid_axes(center, radius, points)
    best_theta, best_j = None, -math.inf
    history = []
    for combo in itertools.product(*axes):
        theta = np.array(combo, dtype=np.float64)
        j = obj(theta)
        if best_theta is None or j > best_j:
            best_theta, best_j = theta, j
    history.append((tuple(best_theta), best_j))
    return SearchResult(best_theta, best_j, history, obj.evaluations - before, "grid")


# ---------------------------------------------------------------------------
# pipeline
# ---------------------------------------------------------------------------


@dataclass
class TuneReport:
    kind: ControllerKind
    gain_names: tuple[str, ...]
    theta_star: np.ndarray
    j_star: float
    j_published: float
    theta_published: np.ndarray
    theta0: np.ndarray
    j_theta0: float
    gd_theta: np.ndarray
    gd_j: float
    gd_stop: str
    history: list  # [(stage, theta tuple, J)]
    evaluations: int
    explicit: dict | None
    config_echo: dict
    elapsed_s: float = 0.0

    def to_dict(self) -> dict:
        names = list(self.gain_names)
        return {
            "kind": self.kind.value,
            "gain_names": names,
            "theta_star": dict(zip(names, map(float, self.theta_star))),
            "j_star": _json_float(self.j_star),
            "j_published": _json_float(self.j_published),
            "theta_published": dict(zip(names, map(float, self.theta_published))),
            "theta0": dict(zip(names, map(float, self.theta0))),
            "j_theta0": _json_float(self.j_theta0),
            "gradient_ascent": {
                "theta": dict(zip(names, map(float, self.gd_theta))),
                "j": _json_float(self.gd_j),
                "stop_reason": self.gd_stop,
            },
            "history": [
                {"stage": stage, "theta": [float(v) for v in theta], "j": _json_float(j)}
                for stage, theta, j in self.history
            ],
            "evaluations": self.evaluations,
            "explicit_validation": self.explicit,
            "config_echo": self.config_echo,
        }

    def to_json(self, path: str | os.PathLike | None = None) -> str:
        text = json.dumps(self.to_dict(), indent=2, sort_keys=False, allow_nan=False) + "\n"
        if path is not None:
            with open(path, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(text)
        return text


def _json_float(value: float):
    # JSON has no infinities; a rejected candidate is reported as null
    return float(value) if math.isfinite(value) else None


def _grid_radius(cfg: TuneConfig, center: np.ndarray) -> np.ndarray:
    if cfg.grid.radius is not None:
        return np.array(cfg.grid.radius)
    floor = np.array(cfg.grid.floor) if cfg.grid.floor is not None else cfg.fd_steps
    return np.maximum(cfg.grid.radius_frac * np.abs(center), floor)


def tune(cfg: TuneConfig, progress: Callable[[str], None] | None = None) -> TuneReport:
    """Gradient ascent from ``cfg.theta0`` followed by a grid search around its result."""
    started = time.perf_counter()
    say = progress or (lambda msg: None)
    cfgs = cfg.road_configs()
    baselines = passive_baselines(cfgs)
    obj = CachedObjective(
        lambda theta: performance_index(theta, cfg.kind, cfgs, cfg.lambda_s, cfg.lambda_u, baselines)
    )
    theta0 = np.array(cfg.theta0)
    theta_pub = spec_to_gains(ControllerSpec.published(cfg.kind))
    j_pub = obj(theta_pub)
    say(f"J(published) = {j_pub:.4f}")

    gd = gradient_ascent(obj, theta0, cfg.gd, fd_steps=cfg.fd_steps)
    say(f"gradient ascent: J = {gd.j:.4f} after {len(gd.history) - 1} steps ({gd.stop_reason})")
    grid = grid_refine(obj, gd.theta, _grid_radius(cfg, gd.theta), cfg.grid.points)
    say(f"grid refine: J = {grid.j:.4f} over {grid.evaluations} new points")

    history = [("gd", theta, j) for theta, j in gd.history]
    history += [("grid", theta, j) for theta, j in grid.history]
    # the grid only wins on strict improvement, so a flat objective keeps the ascent result
    theta_star, j_star = (grid.theta, grid.j) if grid.j > gd.j else (gd.theta, gd.j)

    explicit = None
    if cfg.validate_explicit:
        explicit = _explicit_check(cfg, theta_star, theta_pub)
    return TuneReport(
        kind=cfg.kind,
        gain_names=GAIN_NAMES[cfg.kind],
        theta_star=theta_star,
        j_star=j_star,
        j_published=j_pub,
        theta_published=theta_pub,
        theta0=theta0,
        j_theta0=obj(theta0),
        gd_theta=gd.theta,
        gd_j=gd.j,
        gd_stop=gd.stop_reason,
        history=history,
        evaluations=obj.evaluations,
        explicit=explicit,
        config_echo=cfg.echo(),
        elapsed_s=time.perf_counter() - started,
    )


def _explicit_check(cfg: TuneConfig, theta_star: np.ndarray, theta_pub: np.ndarray) -> dict:
    """Re-score the tuned and published gains with the damper in the loop."""
    cfgs = cfg.road_configs(PlantMode.EXPLICIT)
    baselines = passive_baselines(cfgs)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        j_star = performance_index(theta_star, cfg.kind, cfgs, cfg.lambda_s, cfg.lambda_u, baselines)
        j_pub = performance_index(theta_pub, cfg.kind, cfgs, cfg.lambda_s, cfg.lambda_u, baselines)
    return {
        "plant_mode": PlantMode.EXPLICIT.value,
        "actuation": cfg.sim.actuation.value,
        "j_star": _json_float(j_star),
        "j_published": _json_float(j_pub),
    }


__all__ = [
    "GAIN_NAMES",
    "CachedObjective",
    "GdParams",
    "GridParams",
    "SearchResult",
    "TuneConfig",
    "TuneReport",
    "aggregate_index",
    "fd_gradient",
    "gains_to_spec",
    "gradient_ascent",
    "grid_axes",
    "grid_refine",
    "passive_baselines",
    "performance_index",
    "spec_to_gains",
    "tune",
]
