#!/usr/bin/env python3
"""Run every shipped scenario in both modes and tabulate the outcomes.

Writes traces, metrics, and path plots for each run into --out (default
results/) and prints one summary row per (scenario, mode).
"""

import argparse
import sys
import time
from pathlib import Path

from apfnav.config import config_digest, load_config
from apfnav.plotting import plot_run
from apfnav.simulator import compute_metrics, run
from apfnav.traceio import write_metrics, write_trace

SCENARIOS = ["scenario1", "scenario2", "scenario3", "scenario4"]


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--scenario-dir", default=Path(__file__).parent.parent / "scenarios")
    parser.add_argument("--out", default="results")
    parser.add_argument("--scenarios", nargs="*", default=SCENARIOS)
    args = parser.parse_args(argv)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    header = ["scenario", "mode", "goal", "stuck", "time_to_goal", "path_length",
              "min_clearance", "max_dev", "oscillations", "returned", "wall_s"]
    print("\t".join(header))
    for name in args.scenarios:
        for mode in ("conventional", "modified"):
            config = load_config(Path(args.scenario_dir) / f"{name}.yaml",
                                 mode_override=mode)
            t0 = time.perf_counter()
            trace = run(config)
            wall = time.perf_counter() - t0
            metrics = compute_metrics(trace, config)
            tag = f"{name}_{mode}"
            write_trace(trace, out / f"{tag}.trace.csv",
                        config_hash=config_digest(config), scenario=name, mode=mode)
            write_metrics(metrics, out / f"{tag}.metrics.txt")
            plot_run(trace, config, out / f"{tag}.svg")
            print("\t".join([
                name, mode, str(metrics.goal_reached), str(metrics.stuck),
                f"{metrics.time_to_goal:.1f}", f"{metrics.path_length:.1f}",
                f"{metrics.min_clearance:.2f}", f"{metrics.max_deviation_from_plan:.2f}",
                str(metrics.oscillation_count), str(metrics.returned_to_plan),
                f"{wall:.1f}"]))
    print(f"outputs in {out}/")
    return 0


if __name__ == "__main__":
    sys.exit(main())
