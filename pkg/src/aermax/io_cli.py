"""Configuration loading, result persistence, and the command-line interface.

Commands: ``run`` executes one optimization (or a sweep) and writes the
per-slot CSV series plus ``summary.json``; ``validate`` echoes the
unit-converted scenario and checks the straight-line plan without
optimizing; ``sweep-report`` aggregates sweep summaries into one CSV.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from dataclasses import dataclass, replace as dc_replace
from pathlib import Path

import numpy as np

from aermax.bcd import (
    BcdOptions,
    RunResult,
    SubproblemInfeasibleError,
    run_algorithm1,
    run_algorithm2,
    run_benchmark,
)
from aermax.kinematics import check_feasibility, initial_trajectory, plan_to_csv
from aermax.model import Scenario, dbm_to_watts, scenario_from_dict

MODES = ("2d", "3d", "fpot", "opft")
SWEEP_AXES = ("p_dbm", "t")


@dataclass(frozen=True)
class RunConfig:
    scenario_path: str
    mode: str = "2d"
    sweep_axis: str | None = None
    sweep_values: tuple[float, ...] = ()
    out_dir: str = "results"
    seed: int = 0              # consumed by randomized tests only
    max_iter: int = 30
    epsilon: float | None = None
    dump_programs: bool = False

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode}")
        if self.sweep_axis is not None and not self.sweep_values:
            raise ValueError("sweep axis given without values")


def load_scenario(path) -> Scenario:
    with open(path) as fh:
        cfg = json.load(fh)
    return scenario_from_dict(cfg)


def _apply_sweep(s: Scenario, axis: str, value: float) -> Scenario:
    if axis == "p_dbm":
        p = dbm_to_watts(value)
        return dc_replace(s, p_s=p, p_r=p)
    if axis == "t":
        slot = s.t / s.n
        return dc_replace(s, t=float(value), n=int(round(value / slot)))
    raise ValueError(f"unknown sweep axis: {axis}")


def _write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def persist_result(result: RunResult, out_dir, s: Scenario,
                   sweep: tuple[str, float] | None = None) -> list[Path]:
    """Write trajectory/power/rates CSVs and summary.json into out_dir."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    dt = s.delta_t
    paths = [out / "trajectory.csv", out / "power.csv", out / "rates.csv",
             out / "summary.json"]
    plan_to_csv(result.plan, paths[0], dt)
    n_rows = result.plan.n_slots + 1
    _write_csv(paths[1], ("n", "t", "P_E_W", "P_hor_W", "P_ver_W"),
               [[i, repr(i * dt), repr(float(result.sched.p_e[i])),
                 repr(float(result.p_hor[i])), repr(float(result.p_ver[i]))]
                for i in range(n_rows)])
    _write_csv(paths[2], ("n", "t", "R_D", "R_E", "ER"),
               [[i, repr(i * dt), repr(float(result.r_d[i])),
                 repr(float(result.r_e[i])), repr(float(result.er[i]))]
                for i in range(n_rows)])
    summary = {
        "mode": result.mode,
        "theta_trace": list(result.theta_trace),
        "theta_final": result.theta_final,
        "iterations": result.iterations,
        "converged": result.converged,
        "infeasible_slots": list(result.infeasible_slots),
        "wall_time": result.wall_time,
        "scenario": {
            "q_s": s.q_s.tolist(), "q_d": s.q_d.tolist(), "q_r": s.q_r.tolist(),
            "q_i": s.q_i.tolist(), "q_f": s.q_f.tolist(), "z_r": s.z_r,
            "t": s.t, "n": s.n,
        },
    }
    if sweep is not None:
        summary["sweep_axis"], summary["sweep_value"] = sweep
    paths[3].write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    return paths


def execute_run(cfg: RunConfig) -> int:
    s = load_scenario(cfg.scenario_path)
    points = ([(None, None)] if cfg.sweep_axis is None
              else [(cfg.sweep_axis, v) for v in cfg.sweep_values])
    for axis, value in points:
        s_point = s if axis is None else _apply_sweep(s, axis, value)
        out = Path(cfg.out_dir)
        if axis is not None:
            tag = f"{value:g}".replace(".", "p")
            out = out / f"{axis}_{tag}"
        opts = BcdOptions(max_iter=cfg.max_iter, epsilon=cfg.epsilon,
                          dump_dir=str(out / "programs") if cfg.dump_programs else None)
        if cfg.mode == "2d":
            result = run_algorithm1(s_point, opts)
        elif cfg.mode == "3d":
            result = run_algorithm2(s_point, opts)
        else:
            result = run_benchmark(s_point, cfg.mode, opts)
        persist_result(result, out, s_point,
                       sweep=None if axis is None else (axis, value))
    return 0


def cmd_run(args) -> int:
    cfg = _config_from_args(args)
    try:
        return execute_run(cfg)
    except SubproblemInfeasibleError as exc:
        print(f"error: model infeasible: {exc}", file=sys.stderr)
        return 2


def cmd_validate(args) -> int:
    s = load_scenario(args.config)
    echo = s.to_dict()
    mode = "3d" if args.mode == "3d" else "2d"
    plan = initial_trajectory(s, mode)
    report = check_feasibility(s, plan, mode)
    payload = {
        "scenario": echo,
        "initial_plan_violations": [
            {"constraint": v.constraint, "slot": v.slot, "magnitude": v.magnitude}
            for v in report.violations
        ],
    }
    text = json.dumps(payload, indent=2, sort_keys=True)
    print(text)
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "scenario_echo.json").write_text(json.dumps(echo, indent=2, sort_keys=True) + "\n")
    return 0


def cmd_sweep_report(args) -> int:
    root = Path(args.results_dir)
    rows = []
    for summary_path in sorted(root.glob("*/summary.json")):
        data = json.loads(summary_path.read_text())
        if "sweep_axis" not in data:
            continue
        rows.append([data["sweep_axis"], repr(float(data["sweep_value"])),
                     data["mode"], repr(float(data["theta_final"]))])
    if not rows:
        print("error: no sweep summaries found", file=sys.stderr)
        return 1
    rows.sort(key=lambda r: (r[0], float(r[1])))
    out_path = Path(args.out) if args.out else root / "sweep_report.csv"
    _write_csv(out_path, ("axis", "value", "scheme", "theta_final"), rows)
    print(out_path)
    return 0


def _parse_sweep(spec: str) -> tuple[str, tuple[float, ...]]:
    if "=" not in spec:
        raise ValueError("sweep spec must look like axis=v1,v2,...")
    axis, _, values = spec.partition("=")
    axis = axis.strip()
    if axis not in SWEEP_AXES:
        raise ValueError(f"sweep axis must be one of {SWEEP_AXES}, got {axis}")
    parsed = tuple(float(v) for v in values.split(",") if v.strip())
    if not parsed:
        raise ValueError("sweep spec has no values")
    return axis, parsed


def _config_from_args(args) -> RunConfig:
    axis, values = (None, ()) if not args.sweep else _parse_sweep(args.sweep)
    return RunConfig(
        scenario_path=args.config,
        mode=args.mode,
        sweep_axis=axis,
        sweep_values=values,
        out_dir=args.out,
        seed=args.seed,
        max_iter=args.max_iter,
        epsilon=args.epsilon,
        dump_programs=args.dump_programs,
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="aermax",
        description="Aerial monitor trajectory and jamming-power optimization")
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="execute one optimization run or a sweep")
    run_p.add_argument("--config", required=True, help="scenario JSON path")
    run_p.add_argument("--mode", default="2d", choices=MODES)
    run_p.add_argument("--sweep", default=None,
                       help="axis=v1,v2,... with axis in {p_dbm, t}")
    run_p.add_argument("--out", default="results")
    run_p.add_argument("--seed", type=int, default=0)
    run_p.add_argument("--max-iter", type=int, default=30)
    run_p.add_argument("--epsilon", type=float, default=None)
    run_p.add_argument("--dump-programs", action="store_true")
    run_p.set_defaults(func=cmd_run)

    val_p = sub.add_parser("validate", help="echo the scenario, check the straight line")
    val_p.add_argument("--config", required=True)
    val_p.add_argument("--mode", default="2d", choices=("2d", "3d"))
    val_p.add_argument("--out", default=None)
    val_p.set_defaults(func=cmd_validate)

    rep_p = sub.add_parser("sweep-report", help="aggregate sweep summaries into one CSV")
    rep_p.add_argument("results_dir")
    rep_p.add_argument("--out", default=None)
    rep_p.set_defaults(func=cmd_sweep_report)
    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(name)s %(message)s")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 1 if exc.code not in (0, None) else 0
    try:
        return args.func(args)
    except (OSError, ValueError, KeyError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
