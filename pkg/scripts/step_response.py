#!/usr/bin/env python3
"""Closed-loop tracker characterization: step response and moving-reference lag.

Reports percent overshoot and settling for a 1 m position step, and the
steady cruise lag behind a reference moving at the velocity bound. Useful
when retuning the tracker weights.
"""

import argparse
import sys

import numpy as np

from apfnav.mpc import MpcConfig, MpcTracker
from apfnav.trajectory import DynamicLimits, UavState, plan, sample


def step_response(cfg: MpcConfig, ticks: int = 800):
    tracker = MpcTracker(cfg, UavState(np.zeros(3)))
    ref = UavState(np.array([1.0, 0.0, 0.0]))
    peak, final = 0.0, 0.0
    for _ in range(ticks):
        point = tracker.track_step(ref)
        peak = max(peak, float(point.position[0]))
        final = float(point.position[0])
    return 100.0 * (peak - 1.0), final


def cruise_lag(cfg: MpcConfig, v_max: float = 2.0, a_max: float = 1.0):
    limits = DynamicLimits(np.full(3, v_max), np.full(3, a_max))
    traj = plan([(0, 0, 1), (40, 0, 1)], limits, dt_knot=cfg.dt)
    tracker = MpcTracker(cfg, UavState(np.array([0.0, 0.0, 1.0])))
    t, lag = 0.0, 0.0
    for _ in range(int(traj.duration / cfg.dt)):
        ref = sample(traj, t)
        point = tracker.track_step(ref)
        t += cfg.dt
        lag = max(lag, float(np.linalg.norm(sample(traj, t).position - point.position)))
    return lag


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--q-weights", nargs=4, type=float,
                        default=list(MpcConfig().q_weights))
    args = parser.parse_args(argv)
    cfg = MpcConfig(q_weights=tuple(args.q_weights))
    overshoot, final = step_response(cfg)
    print(f"q_weights={tuple(args.q_weights)}")
    print(f"1 m step: overshoot {overshoot:.2f}%, final {final:.4f} m")
    print(f"cruise lag behind a v_max reference: {cruise_lag(cfg):.3f} m "
          "(expected: the tracker shares the reference's velocity bound)")
    return 0


if __name__ == "__main__":
    sys.exit(main())
