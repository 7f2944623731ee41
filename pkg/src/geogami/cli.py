"""Command-line interface: fit, gearbox, simulate, sweep.

Angles typed by users are degrees; everything internal is radians.  Every
error path exits nonzero with a single ``error: ...`` diagnostic line on
stderr.  Output files are written atomically.
"""

from __future__ import annotations

import argparse
import io
import json
import math
import sys
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

from . import compliance, transmission
from .compliance import JointFamily, MeasurementFormatError
from .config import (ConfigError, RunConfig, SIMULATION_MODES, load_config,
                     load_preset, write_atomic)
from .locomotion import SimTrace
from .svgplot import trace_svg

DEFAULT_PRESET = "paper-table1"


class CliError(Exception):
    """User-facing CLI failure; message becomes the diagnostic line."""


def _resolve_config(args: argparse.Namespace) -> RunConfig:
    if getattr(args, "config", None):
        return load_config(args.config)
    return load_preset(getattr(args, "preset", None) or DEFAULT_PRESET)


# -- fit ----------------------------------------------------------------------

def _cmd_fit(args: argparse.Namespace) -> int:
    try:
        family = JointFamily(args.family)
    except ValueError:
        raise CliError(f"unknown joint family {args.family!r}")
    data = compliance.read_measurement_csv(args.input, family)
    model = compliance.fit_joint_model(data, degree=args.degree)
    force_res, return_res = compliance.fit_residuals(model, data)
    write_atomic(args.out, json.dumps(model.to_dict(), indent=2) + "\n")
    print(f"fitted {family.value} model from {len(data.samples)} samples "
          f"(degree {args.degree})")
    print(f"mean stiffness: {model.mean_stiffness:.4f} N/rad over "
          f"[{math.degrees(model.valid_range[0]):.1f}, "
          f"{math.degrees(model.valid_range[1]):.1f}] deg")
    print(f"max residuals: force {force_res:.3e} N, "
          f"return angle {return_res:.3e} rad")
    print(f"wrote {args.out}")
    return 0


# -- gearbox ------------------------------------------------------------------

def _chain_rows(args: argparse.Namespace,
                config: RunConfig) -> List[Tuple[str, Optional[float], str]]:
    cfg = config.build_gearbox()
    queries = [name for name in ("retraction_mm", "motor_deg", "tension_n",
                                 "torque_nm")
               if getattr(args, name) is not None]
    if len(queries) != 1:
        raise CliError(
            "give exactly one query: --retraction-mm, --motor-deg, "
            "--tension-n, or --torque-nm")
    query = queries[0]
    theta_m = theta_d = theta_s = length = None
    tau_m = tau_s = force = None
    if query == "retraction_mm":
        length = args.retraction_mm
        theta_m = transmission.motor_angle_for_retraction(length, 1, cfg)
        theta_d = transmission.driver_angle(theta_m, cfg)
        theta_s = length / cfg.spool_radius
        tau_m = cfg.motor_torque
    elif query == "motor_deg":
        theta_m = math.radians(args.motor_deg)
        theta_d = transmission.driver_angle(theta_m, cfg)
        theta_s = transmission.spool_angle(
            theta_m, 1, transmission.EngagementSchedule.constant(), cfg)
        length = transmission.cable_retraction(theta_s, cfg)
        tau_m = cfg.motor_torque
    elif query == "tension_n":
        force = args.tension_n
        tau_m = transmission.motor_torque_for_cable_force(force, cfg)
        tau_s = force * cfg.spool_radius * 1e-3
    else:
        tau_m = args.torque_nm
    if tau_m is not None and tau_s is None:
        tau_s = transmission.spool_torque(tau_m, 1, 1, cfg)
    if tau_s is not None and force is None:
        force = transmission.cable_force(tau_s, cfg)
    return [
        ("theta_m", theta_m, "rad"),
        ("theta_d", theta_d, "rad"),
        ("theta_s", theta_s, "rad"),
        ("L", length, "mm"),
        ("tau_m", tau_m, "N*m"),
        ("tau_s", tau_s, "N*m"),
        ("F", force, "N"),
    ]


def _cmd_gearbox(args: argparse.Namespace) -> int:
    config = _resolve_config(args)
    cfg = config.build_gearbox()
    rows = _chain_rows(args, config)
    if args.csv:
        print("quantity,value,unit")
        for name, value, unit in rows:
            rendered = f"{value:.9g}" if value is not None else ""
            print(f"{name},{rendered},{unit}")
        return 0
    print(f"gearbox: T_w={cfg.worm_teeth} T_dr={cfg.driver_teeth} "
          f"T_dv={cfg.driven_teeth} r_s={cfg.spool_radius} mm "
          f"sector_arc={math.degrees(cfg.sector_arc):.1f} deg "
          f"duty={cfg.duty_factor:.3f}")
    note = (f"total efficiency eta = {cfg.efficiency:.3f} "
            f"(eta_worm {cfg.efficiency_worm} x eta_spur {cfg.efficiency_spur})")
    if abs(cfg.efficiency - 0.702) < 0.005:
        note += (": sized so a 1.8 N wire tension costs ~2.4e-4 N*m of motor "
                 "torque through this gearing")
    print(note)
    for name, value, unit in rows:
        rendered = f"{value:15.6g}" if value is not None else f"{'-':>15}"
        print(f"  {name:<8}{rendered}  {unit}")
    return 0


# -- simulate -----------------------------------------------------------------

def _run_simulation(config: RunConfig, mode: Optional[str],
                    origami: Optional[bool], dt: float,
                    duration: Optional[float]) -> Tuple[SimTrace, str]:
    if duration is not None:
        # frozen dataclasses: rebuild with the overridden duration
        from dataclasses import replace as _replace
        config = _replace(config, program=_replace(config.program,
                                                   duration_s=duration))
    mode = mode or config.program.mode
    simulator = config.build_simulator(mode=mode, origami=origami)
    return simulator.run(dt=dt), mode


def _trace_csv_text(trace: SimTrace) -> str:
    buffer = io.StringIO()
    trace.write_csv(buffer)
    return buffer.getvalue()


def _cmd_simulate(args: argparse.Namespace) -> int:
    config = _resolve_config(args)
    origami = None if args.origami is None else (args.origami == "on")
    trace, mode = _run_simulation(config, args.mode, origami, args.dt,
                                  args.duration_s)
    out_dir = Path(args.out)
    trace_path = out_dir / f"trace_{mode}.csv"
    write_atomic(str(trace_path), _trace_csv_text(trace))
    print(f"wrote {trace_path}")
    if args.plot:
        times = [r.time for r in trace.records]
        roll_deg = [math.degrees(r.roll_angle) for r in trace.records]
        motor = [r.motor_angle for r in trace.records]
        svg_path = out_dir / f"trace_{mode}.svg"
        write_atomic(str(svg_path),
                     trace_svg(times, roll_deg, motor, title=f"mode={mode}"))
        print(f"wrote {svg_path}")
    print(trace.summary_line())
    return 0


# -- sweep --------------------------------------------------------------------

def _set_config_value(data: dict, dotted: str, value: float) -> None:
    parts = dotted.split(".")
    node = data
    for part in parts[:-1]:
        if isinstance(node, list):
            try:
                node = node[int(part)]
            except (ValueError, IndexError):
                raise CliError(f"unknown config field {dotted!r}")
        elif isinstance(node, dict) and part in node:
            node = node[part]
        else:
            raise CliError(f"unknown config field {dotted!r}")
    leaf = parts[-1]
    if isinstance(node, list):
        try:
            index = int(leaf)
            current = node[index]
        except (ValueError, IndexError):
            raise CliError(f"unknown config field {dotted!r}")
        if not isinstance(current, (int, float)) or isinstance(current, bool):
            raise CliError(f"config field {dotted!r} is not numeric")
        node[index] = value
    else:
        if not isinstance(node, dict) or leaf not in node:
            raise CliError(f"unknown config field {dotted!r}")
        current = node[leaf]
        if not isinstance(current, (int, float)) or isinstance(current, bool):
            raise CliError(f"config field {dotted!r} is not numeric")
        node[leaf] = value


def _sweep_values(args: argparse.Namespace) -> List[float]:
    if (args.values is None) == (args.range is None):
        raise CliError("give exactly one of --values or --range")
    if args.values is not None:
        try:
            values = [float(v) for v in args.values.split(",") if v.strip()]
        except ValueError:
            raise CliError(f"could not parse --values {args.values!r}")
        if not values:
            raise CliError("empty --values list")
        return values
    try:
        start_s, stop_s, step_s = args.range.split(":")
        start, stop, step = float(start_s), float(stop_s), float(step_s)
    except ValueError:
        raise CliError(f"--range must be start:stop:step, got {args.range!r}")
    if step == 0:
        raise CliError("--range step must be nonzero")
    if (stop - start) * step < 0:
        raise CliError("--range step points away from stop")
    values = []
    k = 0
    while True:
        value = start + k * step
        if (step > 0 and value > stop + 1e-12) or \
                (step < 0 and value < stop - 1e-12):
            break
        values.append(value)
        k += 1
    if not values:
        raise CliError("empty --range")
    return values


def _cmd_sweep(args: argparse.Namespace) -> int:
    base = _resolve_config(args)
    values = _sweep_values(args)
    rows = []
    for value in values:
        data = base.to_dict()
        _set_config_value(data, args.param, value)
        config = RunConfig.from_dict(data)
        config.validate()
        trace, _ = _run_simulation(config, None, None, args.dt,
                                   args.duration_s)
        gearbox = config.build_gearbox()
        capacity = transmission.cable_force_from_motor_torque(
            gearbox.motor_torque, gearbox)
        rows.append((value, trace.rolls_completed, trace.travel_mm, capacity,
                     trace.stalled))
    lines = ["value,rolls,travel_mm,max_tension_N,stall"]
    for value, rolls, travel, tension, stalled in rows:
        lines.append(f"{value:.9g},{rolls},{travel:.3f},{tension:.6f},"
                     f"{'yes' if stalled else 'no'}")
    text = "\n".join(lines) + "\n"
    out_path = Path(args.out) / "sweep.csv"
    write_atomic(str(out_path), text)
    print(text, end="")
    print(f"wrote {out_path}")
    return 0


# -- parser -------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="geogami",
        description="Quasi-static simulator of a mono-actuated rolling "
                    "origami ring: gearbox chain, stiffness network, and "
                    "COM-driven rolling.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_config_args(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", help="run-configuration JSON file")
        p.add_argument("--preset", help=f"named preset (default "
                                        f"{DEFAULT_PRESET})")

    fit = sub.add_parser("fit", help="fit a joint bending model from a "
                                     "measurement CSV")
    fit.add_argument("input", help="CSV with header theta_deg,force_N,return_deg")
    fit.add_argument("--degree", type=int, default=3,
                     help="polynomial degree (default 3)")
    fit.add_argument("--family", default="custom",
                     choices=[f.value for f in JointFamily],
                     help="joint family label")
    fit.add_argument("--out", default="model.json",
                     help="output model JSON path")
    fit.set_defaults(func=_cmd_fit)

    gearbox = sub.add_parser("gearbox", help="evaluate the transmission chain")
    add_config_args(gearbox)
    gearbox.add_argument("--retraction-mm", type=float,
                         help="cable retraction to achieve (mm)")
    gearbox.add_argument("--motor-deg", type=float,
                         help="motor angle (degrees, constant engagement)")
    gearbox.add_argument("--tension-n", type=float,
                         help="cable tension to produce (N)")
    gearbox.add_argument("--torque-nm", type=float,
                         help="motor torque to propagate (N*m)")
    gearbox.add_argument("--csv", action="store_true",
                         help="machine-readable output")
    gearbox.set_defaults(func=_cmd_gearbox)

    simulate = sub.add_parser("simulate", help="run one actuation program")
    add_config_args(simulate)
    simulate.add_argument("--mode", choices=SIMULATION_MODES,
                          help="drive mode (default from config)")
    simulate.add_argument("--origami", choices=("on", "off"),
                          help="origami cap installed (default from config)")
    simulate.add_argument("--plot", action="store_true",
                          help="also emit a two-panel SVG")
    simulate.add_argument("--out", default=".", help="output directory")
    simulate.add_argument("--dt", type=float, default=1e-3,
                          help="time step (s, default 1e-3)")
    simulate.add_argument("--duration-s", type=float, default=None,
                          help="override the program duration")
    simulate.set_defaults(func=_cmd_simulate)

    sweep = sub.add_parser(
        "sweep",
        help="run one simulation per parameter value",
        description="Runs one simulation per value and aggregates "
                    "value,rolls,travel_mm,max_tension_N,stall; max_tension_N "
                    "is the cable force available at the configured motor "
                    "torque.")
    add_config_args(sweep)
    sweep.add_argument("--param", required=True,
                       help="dotted config field, e.g. gearbox.spool_radius_mm")
    sweep.add_argument("--values", help="comma-separated values")
    sweep.add_argument("--range", help="start:stop:step (inclusive)")
    sweep.add_argument("--out", default=".", help="output directory")
    sweep.add_argument("--dt", type=float, default=1e-3,
                       help="time step (s, default 1e-3)")
    sweep.add_argument("--duration-s", type=float, default=None,
                       help="override the program duration")
    sweep.set_defaults(func=_cmd_sweep)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (CliError, ConfigError, MeasurementFormatError, ValueError,
            OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
