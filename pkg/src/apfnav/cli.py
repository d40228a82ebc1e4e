"""Command-line interface: validate configs, run scenarios, compare modes.

Exit codes are stable:
  0  success (for `run`: goal reached)
  2  config parse error
  3  config schema violation
  4  physical inconsistency in the config
  5  simulation finished without reaching the goal (budget or stall)
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from .config import (ConfigParseError, ConfigPhysicalError, ConfigSchemaError,
                     config_digest, load_config)
from .simulator import compute_metrics, run
from .traceio import write_metrics, write_trace

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_SCHEMA = 3
EXIT_PHYSICAL = 4
EXIT_GOAL_NOT_REACHED = 5

OUT_DIR_ENV = "APFNAV_OUT"


def _load(path, mode=None, seed=None):
    try:
        return load_config(path, mode_override=mode, seed_override=seed), EXIT_OK, None
    except ConfigParseError as exc:
        return None, EXIT_PARSE, str(exc)
    except ConfigSchemaError as exc:
        return None, EXIT_SCHEMA, str(exc)
    except ConfigPhysicalError as exc:
        return None, EXIT_PHYSICAL, str(exc)


def cmd_validate(args) -> int:
    config, code, err = _load(args.config)
    if config is None:
        print(f"invalid: {err}", file=sys.stderr)
        return code
    print(f"valid: {args.config} (scenario {config.name!r}, mode {config.mode}, "
          f"{len(config.scene.obstacles)} obstacles, {len(config.waypoints)} waypoints)")
    return EXIT_OK


def _out_dir(args) -> Path:
    out = args.out or os.environ.get(OUT_DIR_ENV) or "."
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _emit_outputs(trace, metrics, config, out_dir: Path, emit: set, tag: str):
    digest = config_digest(config)
    written = []
    if "trace" in emit:
        p = out_dir / f"{tag}.trace.csv"
        write_trace(trace, p, config_hash=digest, scenario=config.name, mode=config.mode)
        written.append(p)
    if "metrics" in emit:
        p = out_dir / f"{tag}.metrics.txt"
        write_metrics(metrics, p)
        written.append(p)
    if "plot" in emit:
        from .plotting import plot_run
        p = out_dir / f"{tag}.svg"
        plot_run(trace, config, p)
        written.append(p)
    return written


def _summary_line(name: str, mode: str, m) -> str:
    return (f"{name}[{mode}]: goal_reached={m.goal_reached} time_to_goal={m.time_to_goal:.2f}s "
            f"path_length={m.path_length:.2f}m min_clearance={m.min_clearance:.2f}m "
            f"max_deviation={m.max_deviation_from_plan:.2f}m stuck={m.stuck} "
            f"oscillations={m.oscillation_count}")


def cmd_run(args) -> int:
    config, code, err = _load(args.config, mode=args.mode, seed=args.seed)
    if config is None:
        print(f"error: {err}", file=sys.stderr)
        return code
    trace = run(config)
    metrics = compute_metrics(trace, config)
    out_dir = _out_dir(args)
    emit = set(args.emit.split(",")) if args.emit else {"trace", "metrics"}
    tag = f"{config.name}_{config.mode}"
    written = _emit_outputs(trace, metrics, config, out_dir, emit, tag)
    print(_summary_line(config.name, config.mode, metrics))
    for p in written:
        print(f"wrote {p}")
    return EXIT_OK if metrics.goal_reached else EXIT_GOAL_NOT_REACHED


def cmd_compare(args) -> int:
    rows = []
    out_dir = _out_dir(args)
    emit = set(args.emit.split(",")) if args.emit else {"trace", "metrics"}
    for mode in ("conventional", "modified"):
        config, code, err = _load(args.config, mode=mode, seed=args.seed)
        if config is None:
            print(f"error: {err}", file=sys.stderr)
            return code
        trace = run(config)
        metrics = compute_metrics(trace, config)
        _emit_outputs(trace, metrics, config, out_dir, emit, f"{config.name}_{mode}")
        rows.append((mode, metrics))

    header = ["mode", "goal_reached", "time_to_goal", "path_length",
              "min_clearance", "oscillation_count", "returned_to_plan"]
    print("\t".join(header))
    for mode, m in rows:
        print("\t".join([mode, str(m.goal_reached), f"{m.time_to_goal:.2f}",
                         f"{m.path_length:.2f}", f"{m.min_clearance:.2f}",
                         str(m.oscillation_count), str(m.returned_to_plan)]))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="apfnav",
                                     description="Potential-field UAV obstacle "
                                                 "avoidance scenario runner")
    sub = parser.add_subparsers(dest="command", required=True)

    p_val = sub.add_parser("validate", help="validate a scenario config file")
    p_val.add_argument("--config", required=True)
    p_val.set_defaults(func=cmd_validate)

    for name, func in (("run", cmd_run), ("compare", cmd_compare)):
        p = sub.add_parser(name)
        p.add_argument("--config", required=True)
        p.add_argument("--out", default=None,
                       help=f"output directory (default ${OUT_DIR_ENV} or cwd)")
        p.add_argument("--emit", default="trace,metrics",
                       help="comma list of trace,metrics,plot")
        p.add_argument("--seed", type=int, default=None, help="sensor noise seed")
        if name == "run":
            p.add_argument("--mode", choices=["conventional", "modified"], default=None)
        p.set_defaults(func=func)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
