"""YAML run configuration.

A user file is merged over the packaged defaults, checked for unknown keys and
lowered into the library's dataclasses. Problems raise :class:`ConfigError`
carrying the dotted field name and, when known, the source line.
"""

from __future__ import annotations

import copy
import json
import math
import os
import re
from dataclasses import dataclass, replace
from importlib import resources
from pathlib import Path
from typing import Any

import numpy as np
import yaml

from .control import ActuationMode, ControllerKind, ControllerSpec
from .damper import BoucWenParams
from .errors import RoadFormatError, SemiActiveError, ValidationError
from .model import PdGains, SimState, VehicleParams
from .road import Bump, Flat, RoadProfile, Sine, SineSweep, brownian_road, load_road_csv
from .sim.core import AccelSource, PlantMode, SimConfig
from .tune import GdParams, GridParams, TuneConfig

ROAD_TYPES = ("flat", "bump", "sine", "sine_sweep", "brownian", "csv")


class ConfigError(SemiActiveError, ValueError):
    def __init__(self, message: str, field: str | None = None, line: int | None = None, path: str | None = None):
        self.field = field
        self.line = line
        self.path = path
        where = ""
        if path:
            where = f"{path}:{line}: " if line else f"{path}: "
        elif line:
            where = f"line {line}: "
        label = f"{field}: " if field and field not in message else ""
        super().__init__(f"{where}{label}{message}")


def default_config_text() -> str:
    return resources.files("semiactive").joinpath("data/default.yaml").read_text(encoding="utf-8")


def default_config_dict() -> dict:
    return yaml.safe_load(default_config_text())


# ---------------------------------------------------------------------------
# parsing
# ---------------------------------------------------------------------------


def _line_index(text: str) -> dict[str, int]:
    """Map dotted key paths to 1-based source lines."""
    try:
        root = yaml.compose(text)
    except yaml.YAMLError:
        return {}
    lines: dict[str, int] = {}

    def walk(node, prefix):
        if isinstance(node, yaml.MappingNode):
            for key, value in node.value:
                path = f"{prefix}.{key.value}" if prefix else str(key.value)
                lines[path] = key.start_mark.line + 1
                walk(value, path)

    if root is not None:
        walk(root, "")
    return lines


def _merge(base: dict, over: dict, prefix: str, lines: dict, src: str | None) -> dict:
    out = copy.deepcopy(base)
    for key, value in over.items():
        path = f"{prefix}.{key}" if prefix else str(key)
        if key not in base:
            raise ConfigError(f"unknown key '{key}'", path, lines.get(path), src)
        if isinstance(base[key], dict):
            if not isinstance(value, dict):
                raise ConfigError("expected a mapping", path, lines.get(path), src)
            out[key] = _merge(base[key], value, path, lines, src)
        else:
            out[key] = value
    return out


@dataclass(frozen=True)
class RunConfig:
    """Everything a CLI command needs, plus the fully resolved dictionary."""

    data: dict
    source: str | None
    sim: SimConfig
    specs: dict  # ControllerKind -> ControllerSpec with the configured gains
    sweep: dict
    tune: TuneConfig

    @property
    def controller(self) -> ControllerSpec:
        return self.sim.controller

    def all_controllers(self) -> list[ControllerSpec]:
        return [self.specs[k] for k in ControllerKind]

    def sweep_freqs(self) -> np.ndarray:
        s = self.sweep
        return np.geomspace(s["f_min"], s["f_max"], s["n_freqs"])

    def echo(self) -> dict:
        return copy.deepcopy(self.data)


def load_config(
    path: str | os.PathLike | None = None,
    overrides: dict | None = None,
) -> RunConfig:
    """Read ``path`` (YAML, or a ``manifest.json`` with an echoed config) over the defaults."""
    defaults = default_config_dict()
    src = None
    user: dict = {}
    lines: dict[str, int] = {}
    base_dir = Path.cwd()
    if path is not None:
        src = str(path)
        try:
            text = Path(path).read_text(encoding="utf-8")
        except FileNotFoundError:
            raise ConfigError("config file not found", path=src) from None
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc.strerror}", path=src) from None
        try:
            # JSON goes through json: YAML 1.1 reads exponents like 1e-06 as strings
            loaded = json.loads(text) if text.lstrip().startswith("{") else yaml.safe_load(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"not valid JSON ({exc.msg})", line=exc.lineno, path=src) from None
        except yaml.YAMLError as exc:
            mark = getattr(exc, "problem_mark", None)
            line = mark.line + 1 if mark is not None else None
            raise ConfigError(f"not valid YAML ({getattr(exc, 'problem', exc)})", line=line, path=src) from None
        if loaded is None:
            loaded = {}
        if not isinstance(loaded, dict):
            raise ConfigError("top level must be a mapping", path=src, line=1)
        if _is_manifest(loaded):
            loaded = loaded["config"]
            # echoed paths are already absolute
        else:
            lines = _line_index(text)
        user = loaded
        base_dir = Path(path).resolve().parent
    data = _merge(defaults, user, "", lines, src)
    if overrides:
        data = _merge(data, overrides, "", {}, "--override")
    return build(data, lines, src, base_dir)


def _is_manifest(doc: dict) -> bool:
    return isinstance(doc.get("config"), dict) and doc.get("tool") == "semiactive"


class _Ctx:
    def __init__(self, data, lines, src):
        self.data = data
        self.lines = lines
        self.src = src

    def err(self, field: str, message: str) -> ConfigError:
        return ConfigError(message, field, self.lines.get(field), self.src)

    def get(self, field: str):
        node = self.data
        for part in field.split("."):
            node = node[part]
        return node

    def num(self, field: str, allow_none: bool = False) -> float | None:
        value = self.get(field)
        if value is None and allow_none:
            return None
        if isinstance(value, str):
            # YAML 1.1 leaves exponents without a dot (1e-6) as strings
            try:
                value = float(value)
            except ValueError:
                pass
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise self.err(field, f"expected a number, got {value!r}")
        value = float(value)
        if not math.isfinite(value):
            raise self.err(field, f"must be finite, got {value!r}")
        return value

    def integer(self, field: str) -> int:
        value = self.get(field)
        if isinstance(value, bool) or not isinstance(value, int):
            if isinstance(value, float) and value.is_integer():
                return int(value)
            raise self.err(field, f"expected an integer, got {value!r}")
        return int(value)

    def choice(self, field: str, options) -> str:
        value = self.get(field)
        if value not in options:
            raise self.err(field, f"must be one of {', '.join(options)}; got {value!r}")
        return value

    def flag(self, field: str) -> bool:
        value = self.get(field)
        if not isinstance(value, bool):
            raise self.err(field, f"expected true or false, got {value!r}")
        return value

    def numlist(self, field: str, allow_none: bool = True) -> tuple[float, ...] | None:
        value = self.get(field)
        if value is None and allow_none:
            return None
        if not isinstance(value, list):
            raise self.err(field, f"expected a list of numbers, got {value!r}")
        out = []
        for v in value:
            if isinstance(v, bool) or not isinstance(v, (int, float)):
                raise self.err(field, f"expected a list of numbers, got {value!r}")
            out.append(float(v))
        return tuple(out)

    def section(self, name: str, cls, fields=None):
        """Build ``cls`` from the numeric keys of section ``name``."""
        keys = fields or list(self.get(name))
        kwargs = {k: self.num(f"{name}.{k}") for k in keys}
        try:
            return cls(**kwargs)
        except ValidationError as exc:
            raise self._blame(name, keys, exc) from None

    def _blame(self, name: str, keys, exc: Exception) -> ConfigError:
        message = str(exc)
        for key in sorted(keys, key=len, reverse=True):
            if re.search(rf"\b{re.escape(key)}\b", message):
                return self.err(f"{name}.{key}", message)
        return self.err(name, message)


def build(data: dict, lines: dict | None = None, src: str | None = None, base_dir=None) -> RunConfig:
    ctx = _Ctx(data, lines or {}, src)
    base_dir = Path(base_dir) if base_dir is not None else Path.cwd()

    vehicle = ctx.section("vehicle", VehicleParams)
    damper = ctx.section("damper", BoucWenParams)

    kind = ControllerKind(ctx.choice("controller.kind", [k.value for k in ControllerKind]))
    specs = _controller_specs(ctx)

    road = _road(ctx, base_dir)

    plant = ctx.choice("sim.plant_mode", [m.value for m in PlantMode])
    actuation = ctx.choice("sim.actuation", [m.value for m in ActuationMode])
    accel = ctx.choice("sim.accel_source", [m.value for m in AccelSource])
    state = ctx.section("sim.initial_state", SimState)
    sim_kwargs = dict(
        dt=ctx.num("sim.dt"),
        t_end=ctx.num("sim.t_end"),
        plant_mode=plant,
        actuation=actuation,
        accel_source=accel,
        controller=specs[kind],
        vehicle=vehicle,
        damper=damper,
        road=road,
        record_stride=ctx.integer("sim.record_stride"),
        substeps=ctx.integer("sim.substeps"),
        beta=ctx.num("sim.beta"),
        c_max=ctx.num("sim.c_max", allow_none=True),
        eps_den=ctx.num("sim.eps_den"),
        initial_state=state,
    )
    try:
        sim = SimConfig(**sim_kwargs)
    except ValidationError as exc:
        raise ctx._blame("sim", list(sim_kwargs), exc) from None

    sweep = {
        "f_min": ctx.num("sweep.f_min"),
        "f_max": ctx.num("sweep.f_max"),
        "n_freqs": ctx.integer("sweep.n_freqs"),
        "amplitude": ctx.num("sweep.amplitude"),
        "cycles_settle": ctx.integer("sweep.cycles_settle"),
        "cycles_measure": ctx.integer("sweep.cycles_measure"),
        "band": ctx.num("sweep.band"),
    }
    if not 0.0 < sweep["f_min"] < sweep["f_max"]:
        raise ctx.err("sweep.f_min", "need 0 < f_min < f_max")
    if sweep["n_freqs"] < 2:
        raise ctx.err("sweep.n_freqs", "need at least 2 frequencies")
    if sweep["cycles_settle"] < 0:
        raise ctx.err("sweep.cycles_settle", "must be non-negative")
    if sweep["cycles_measure"] < 1:
        raise ctx.err("sweep.cycles_measure", "must be at least 1")
    if not sweep["band"] > 1.0:
        raise ctx.err("sweep.band", "must exceed 1")

    tune = _tune(ctx, sim, specs)
    return RunConfig(data, src, sim, specs, sweep, tune)


def _controller_specs(ctx: _Ctx) -> dict:
    c_passive = ctx.num("controller.skygroundhook.c_passive")
    out = {ControllerKind.PASSIVE: ControllerSpec(ControllerKind.PASSIVE)}
    try:
        out[ControllerKind.SKYHOOK] = ControllerSpec(ControllerKind.SKYHOOK, c_sky=ctx.num("controller.skyhook.c_sky"))
        out[ControllerKind.GROUNDHOOK] = ControllerSpec(
            ControllerKind.GROUNDHOOK, c_gr=ctx.num("controller.groundhook.c_gr")
        )
        out[ControllerKind.SKYGROUNDHOOK] = ControllerSpec(
            ControllerKind.SKYGROUNDHOOK,
            c_sky=ctx.num("controller.skygroundhook.c_sky"),
            c_gr=ctx.num("controller.skygroundhook.c_gr"),
            c_passive=c_passive,
        )
    except ValidationError as exc:
        raise ctx._blame("controller", ["c_sky", "c_gr", "c_passive"], exc) from None
    pd = ctx.section("controller.pd_skygroundhook", PdGains, ["p_sky", "d_sky", "p_gr", "d_gr"])
    out[ControllerKind.PD_SKYGROUNDHOOK] = ControllerSpec(ControllerKind.PD_SKYGROUNDHOOK, pd=pd)
    return out


def _road(ctx: _Ctx, base_dir: Path) -> RoadProfile:
    kind = ctx.choice("road.type", ROAD_TYPES)
    if kind == "flat":
        return Flat()
    if kind == "bump":
        return ctx.section("road.bump", Bump, ["h_b", "t1", "t2"])
    if kind == "sine":
        return ctx.section("road.sine", Sine, ["amplitude", "frequency"])
    if kind == "sine_sweep":
        return ctx.section("road.sine_sweep", SineSweep, ["f0", "f1", "duration", "amplitude"])
    if kind == "brownian":
        try:
            return brownian_road(
                dt=ctx.num("road.brownian.dt"),
                n_steps=ctx.integer("road.brownian.n_steps"),
                seed=ctx.integer("road.brownian.seed"),
                scale=ctx.num("road.brownian.scale"),
            )
        except ValidationError as exc:
            raise ctx._blame("road.brownian", ["dt", "n_steps", "seed", "scale"], exc) from None
    raw = ctx.get("road.csv.path")
    if not isinstance(raw, str) or not raw:
        raise ctx.err("road.csv.path", "a CSV path is required when road.type is csv")
    path = Path(raw)
    if not path.is_absolute():
        path = (base_dir / path).resolve()
    # echo the absolute path so a manifest reloads from anywhere
    ctx.data["road"]["csv"]["path"] = str(path)
    try:
        return load_road_csv(path)
    except FileNotFoundError:
        raise ctx.err("road.csv.path", f"road file not found: {path}") from None
    except RoadFormatError as exc:
        raise ctx.err("road.csv.path", f"{path}: {exc}") from None


def _tune(ctx: _Ctx, sim: SimConfig, specs: dict) -> TuneConfig:
    kind = ctx.choice("tune.kind", [k.value for k in ControllerKind if k is not ControllerKind.PASSIVE])
    seeds = ctx.get("tune.seeds")
    if not isinstance(seeds, list) or not all(isinstance(s, int) and not isinstance(s, bool) for s in seeds):
        raise ctx.err("tune.seeds", f"expected a list of integers, got {seeds!r}")
    plant = ctx.choice("tune.plant_mode", [m.value for m in PlantMode])
    try:
        gd = GdParams(
            learning_rate=ctx.num("tune.gd.learning_rate"),
            max_iters=ctx.integer("tune.gd.max_iters"),
            fd_steps=ctx.numlist("tune.gd.fd_steps"),
            tol=ctx.num("tune.gd.tol"),
            max_halvings=ctx.integer("tune.gd.max_halvings"),
        )
    except ValidationError as exc:
        raise ctx._blame("tune.gd", ["learning_rate", "max_iters", "fd_steps", "tol", "max_halvings"], exc) from None
    try:
        grid = GridParams(
            points=ctx.integer("tune.grid.points"),
            radius_frac=ctx.num("tune.grid.radius_frac"),
            radius=ctx.numlist("tune.grid.radius"),
            floor=ctx.numlist("tune.grid.floor"),
        )
    except ValidationError as exc:
        raise ctx._blame("tune.grid", ["points", "radius_frac", "radius", "floor"], exc) from None
    fields = dict(
        kind=kind,
        theta0=ctx.numlist("tune.theta0"),
        seeds=tuple(seeds),
        road_dt=ctx.num("tune.road_dt"),
        road_steps=ctx.integer("tune.road_steps"),
        road_scale=ctx.num("tune.road_scale"),
        lambda_s=ctx.num("tune.lambda_s"),
        lambda_u=ctx.num("tune.lambda_u"),
        validate_explicit=ctx.flag("tune.validate_explicit"),
    )
    tune_sim = replace(sim, plant_mode=plant, controller=specs[ControllerKind(kind)], record_stride=1)
    try:
        return TuneConfig(gd=gd, grid=grid, sim=tune_sim, **fields)
    except ValidationError as exc:
        keys = list(fields) + ["gd.fd_steps", "grid.radius", "grid.floor"]
        raise ctx._blame("tune", keys, exc) from None


def dump_json(obj: Any) -> str:
    """Canonical JSON text used for every file the CLI writes."""
    return json.dumps(obj, indent=2, sort_keys=False, allow_nan=False) + "\n"


__all__ = [
    "ROAD_TYPES",
    "ConfigError",
    "RunConfig",
    "build",
    "default_config_dict",
    "default_config_text",
    "dump_json",
    "load_config",
]
