"""Command-line interface.

Exit codes: 0 success, 2 configuration or validation error, 3 numerical
divergence, 4 I/O failure.
"""

from __future__ import annotations

import argparse
import datetime as _dt
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .config import ConfigError, RunConfig, dump_json, load_config
from .control import ControllerKind
from .errors import DivergenceError, RoadFormatError, SemiActiveError, ValidationError
from .model import natural_frequencies
from .road import Tabulated, write_road_csv
from .sim import compute_metrics, frequency_response, modal_peaks, natural_frequencies_hz, percent_reduction, simulate
from .tune import tune

EXIT_OK, EXIT_CONFIG, EXIT_DIVERGED, EXIT_IO = 0, 2, 3, 4

MODES = {
    "explicit": {"sim": {"plant_mode": "explicit", "actuation": "inversion"}},
    "clamp": {"sim": {"plant_mode": "explicit", "actuation": "clamp"}},
    "implicit": {"sim": {"plant_mode": "implicit"}},
}

BENCH_COLUMNS = (
    "method",
    "rms_a_s",
    "rms_a_u",
    "peak_travel_mm",
    "peak_tire_load_N",
    "pct_rms_a_s",
    "pct_rms_a_u",
    "pct_peak_travel",
    "pct_peak_tire_load",
)


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _write_text(path: Path, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _write_csv(path: Path, header, rows) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(v if isinstance(v, str) else _fmt(v) for v in row))
    _write_text(path, "\n".join(lines) + "\n")


def _timestamp() -> str | None:
    # reproducible builds convention; without it the manifest carries no clock time
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    if epoch is None:
        return None
    try:
        stamp = _dt.datetime.fromtimestamp(int(epoch), tz=_dt.timezone.utc)
    except (ValueError, OverflowError, OSError):
        raise ConfigError(f"SOURCE_DATE_EPOCH is not a valid epoch: {epoch!r}") from None
    return stamp.strftime("%Y-%m-%dT%H:%M:%SZ")


def _seeds_used(cfg: RunConfig, command: str) -> list[int]:
    if command == "tune":
        return list(cfg.tune.seeds)
    if cfg.data["road"]["type"] == "brownian":
        return [int(cfg.data["road"]["brownian"]["seed"])]
    return []


def _prepare(args, command: str, extra_overrides: dict | None = None) -> tuple[RunConfig, Path]:
    cfg = load_config(args.config, _overrides(args, extra_overrides))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    manifest = {
        "tool": "semiactive",
        "version": __version__,
        "command": command,
        "config_path": None if args.config is None else str(args.config),
        "output_dir": str(args.out),
        "timestamp": _timestamp(),
        "seeds": _seeds_used(cfg, command),
        "config": cfg.echo(),
    }
    _write_text(out / "manifest.json", dump_json(manifest))
    return cfg, out


def _overrides(args, extra: dict | None) -> dict:
    over: dict = {}

    def put(section, key, value):
        over.setdefault(section, {})
        if isinstance(value, dict):
            over[section].setdefault(key, {}).update(value)
        else:
            over[section][key] = value

    if getattr(args, "mode", None):
        for section, values in MODES[args.mode].items():
            for k, v in values.items():
                put(section, k, v)
    if getattr(args, "seed", None) is not None:
        put("road", "brownian", {"seed": args.seed})
    for section, values in (extra or {}).items():
        for k, v in values.items():
            put(section, k, v)
    return over


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def cmd_simulate(args) -> int:
    extra = {"controller": {"kind": args.controller}} if args.controller else None
    cfg, out = _prepare(args, "simulate", extra)
    traj = simulate(cfg.sim)
    traj.to_csv(out / "trajectory.csv")
    metrics = compute_metrics(traj)
    doc = {"controller": cfg.controller.kind.value, **metrics.to_dict()}
    _write_text(out / "metrics.json", dump_json(doc))
    print(f"{cfg.controller.kind.label}: rms_a_s={metrics.rms_a_s:.6g} rms_a_u={metrics.rms_a_u:.6g} "
          f"peak_tire_load_N={metrics.peak_tire_load:.6g}")
    return EXIT_OK


def bump_bench_rows(cfg: RunConfig) -> list[list]:
    results = []
    for spec in cfg.all_controllers():
        results.append((spec.kind, compute_metrics(simulate(cfg.sim.with_controller(spec)))))
    base = results[0][1]
    assert results[0][0] is ControllerKind.PASSIVE
    rows = []
    for kind, m in results:
        rows.append([
            kind.label,
            m.rms_a_s,
            m.rms_a_u,
            m.peak_travel,
            m.peak_tire_load,
            percent_reduction(base.rms_a_s, m.rms_a_s),
            percent_reduction(base.rms_a_u, m.rms_a_u),
            percent_reduction(base.peak_travel, m.peak_travel),
            percent_reduction(base.peak_tire_load, m.peak_tire_load),
        ])
    return rows


def cmd_bump_bench(args) -> int:
    cfg, out = _prepare(args, "bump-bench")
    rows = bump_bench_rows(cfg)
    _write_csv(out / "bump_bench.csv", BENCH_COLUMNS, rows)
    for row in rows:
        print(f"{row[0]:<17} rms_a_s={row[1]:.4f} ({row[5]:+.2f}%)  peak_tire_load_N={row[4]:.1f} ({row[8]:+.2f}%)")
    return EXIT_OK


def sweep_tables(cfg: RunConfig):
    freqs = cfg.sweep_freqs()
    natural = natural_frequencies_hz(cfg.sim)
    s = cfg.sweep
    per_freq, peaks = [], {}
    for spec in cfg.all_controllers():
        resp = frequency_response(
            cfg.sim.with_controller(spec), freqs, s["amplitude"], s["cycles_settle"], s["cycles_measure"]
        )
        for f, a_s, a_u in zip(resp.freqs, resp.rms_a_s, resp.rms_a_u):
            per_freq.append([spec.kind.label, f, a_s, a_u])
        peaks[spec.kind] = modal_peaks(resp, natural, s["band"])
    base = peaks[ControllerKind.PASSIVE]
    summary = []
    for kind, modes in peaks.items():
        for p, ref in zip(modes, base):
            summary.append([kind.label, str(p.mode), p.signal, p.natural_hz, p.peak_hz, p.peak_value,
                            percent_reduction(ref.peak_value, p.peak_value)])
    return per_freq, summary


def cmd_sweep(args) -> int:
    cfg, out = _prepare(args, "sweep")
    per_freq, summary = sweep_tables(cfg)
    _write_csv(out / "sweep.csv", ("method", "freq_hz", "rms_a_s", "rms_a_u"), per_freq)
    _write_csv(out / "sweep_peaks.csv",
               ("method", "mode", "signal", "natural_hz", "peak_hz", "peak_value", "pct_vs_passive"), summary)
    for row in summary:
        print(f"{row[0]:<17} mode {row[1]} peak={row[5]:.4f} at {row[4]:.3f} Hz ({row[6]:+.2f}%)")
    return EXIT_OK


def _parse_seeds(text: str) -> list[int]:
    try:
        seeds = [int(s) for s in text.split(",") if s.strip()]
    except ValueError:
        raise ConfigError(f"--seeds expects comma-separated integers, got {text!r}", field="--seeds") from None
    if not seeds:
        raise ConfigError("--seeds is empty", field="--seeds")
    return seeds


def cmd_tune(args) -> int:
    extra = {"tune": {"seeds": _parse_seeds(args.seeds)}} if args.seeds else None
    cfg, out = _prepare(args, "tune", extra)
    tc = cfg.tune
    for seed, road in zip(tc.seeds, tc.roads()):
        write_road_csv(out / f"road_seed{seed}.csv", road.times, road.values)
    report = tune(tc, progress=lambda msg: print(msg, file=sys.stderr))
    report.to_json(out / "tune_report.json")
    names = ", ".join(f"{n}={v:.6g}" for n, v in zip(report.gain_names, report.theta_star))
    print(f"theta_star: {names}")
    print(f"j_star={report.j_star:.6g} j_published={report.j_published:.6g} evaluations={report.evaluations}")
    return EXIT_OK


def cmd_freqs(args) -> int:
    cfg = load_config(args.config, _overrides(args, None))
    w1, w2 = natural_frequencies(cfg.sim.vehicle)
    print(f"omega1_rad_s={w1!r}")
    print(f"omega2_rad_s={w2!r}")
    print(f"omega1_hz={w1 / (2.0 * math.pi)!r}")
    print(f"omega2_hz={w2 / (2.0 * math.pi)!r}")
    return EXIT_OK


def cmd_road_gen(args) -> int:
    extra = {"road": {"type": args.type}} if args.type else None
    cfg, out = _prepare(args, "road-gen", extra)
    road = cfg.sim.road
    kind = cfg.data["road"]["type"]
    if isinstance(road, Tabulated):
        times, heights = road.times, road.values
    else:
        times = cfg.sim.dt * np.arange(cfg.sim.n_steps + 1)
        heights = road.sample(times)
    name = f"road_seed{cfg.data['road']['brownian']['seed']}.csv" if kind == "brownian" else f"road_{kind}.csv"
    write_road_csv(out / name, times, heights)
    print(out / name)
    return EXIT_OK


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------


def _add_common(p: argparse.ArgumentParser, suppress: bool) -> None:
    # subcommand copies use SUPPRESS so they do not reset flags given before the subcommand
    default = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    p.add_argument("--config", default=default(None),
                   help="YAML config (or a manifest.json from an earlier run)")
    p.add_argument("--out", default=default("out"), help="output directory (default: ./out)")
    p.add_argument("--seed", type=int, default=default(None), help="override road.brownian.seed")
    p.add_argument("--mode", choices=sorted(MODES), default=default(None),
                   help="explicit = damper with voltage inversion, clamp = damper as a clamped viscous "
                        "element, implicit = ideal force actuator")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    _add_common(common, suppress=True)

    parser = argparse.ArgumentParser(prog="semiactive", description=__doc__.splitlines()[0])
    _add_common(parser, suppress=False)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", parents=[common], help="single run: trajectory, metrics, manifest")
    p.add_argument("--controller", choices=[k.value for k in ControllerKind], help="override controller.kind")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("bump-bench", parents=[common], help="all five controllers on the configured road")
    p.set_defaults(func=cmd_bump_bench)

    p = sub.add_parser("sweep", parents=[common], help="stepped-sine response and modal peaks")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("tune", parents=[common], help="tune gains on the Brownian road ensemble")
    p.add_argument("--seeds", help="comma-separated road seeds, e.g. 1,2")
    p.set_defaults(func=cmd_tune)

    p = sub.add_parser("freqs", parents=[common], help="print undamped natural frequencies")
    p.set_defaults(func=cmd_freqs)

    road = sub.add_parser("road", help="road profile utilities")
    road_sub = road.add_subparsers(dest="road_command", required=True)
    p = road_sub.add_parser("gen", parents=[common], help="write the configured road profile as CSV")
    p.add_argument("--type", choices=["flat", "bump", "sine", "sine_sweep", "brownian"], help="override road.type")
    p.set_defaults(func=cmd_road_gen)
    return parser


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return int(args.func(args))
    except (ConfigError, ValidationError, RoadFormatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DivergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DIVERGED
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except SemiActiveError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
