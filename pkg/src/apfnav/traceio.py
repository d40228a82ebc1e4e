"""Trace and metrics file formats.

A trace file is a one-line header (format version, config hash, scenario
name, mode, termination flags) followed by a CSV column header and one row
per tick. Floats are written with shortest round-trip repr, so re-parsing a
trace and recomputing metrics reproduces the metrics file exactly. Metrics
files are flat key=value documents.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .simulator import Metrics, SimTrace

TRACE_MAGIC = "# apfnav-trace v1"
COLUMNS = ["t", "x", "y", "z", "vx", "vy", "vz", "yaw", "mode",
           "ref_x", "ref_y", "ref_z", "fx", "fy", "fz", "f_t_mag",
           "active_clusters", "cluster_count"]


def _fmt(v: float) -> str:
    return repr(float(v))


def write_trace(trace: SimTrace, path, config_hash: str = "",
                scenario: str = "", mode: str = "") -> None:
    lines = [f"{TRACE_MAGIC} config={config_hash} scenario={scenario} mode={mode} "
             f"goal_reached={int(trace.goal_reached)} stopped_on_stuck={int(trace.stopped_on_stuck)}"]
    lines.append(",".join(COLUMNS))
    for k in range(trace.times.size):
        row = [_fmt(trace.times[k]),
               *(_fmt(v) for v in trace.positions[k]),
               *(_fmt(v) for v in trace.velocities[k]),
               _fmt(trace.yaws[k]),
               str(int(trace.modes[k])),
               *(_fmt(v) for v in trace.ref_positions[k]),
               *(_fmt(v) for v in trace.f_modified[k]),
               _fmt(trace.f_t_magnitude[k]),
               str(int(trace.active_clusters[k])),
               str(int(trace.cluster_counts[k]))]
        lines.append(",".join(row))
    Path(path).write_text("\n".join(lines) + "\n")


def read_trace(path) -> tuple[SimTrace, dict]:
    """Parse a trace file; returns (trace, header fields)."""
    text = Path(path).read_text().splitlines()
    if not text or not text[0].startswith(TRACE_MAGIC):
        raise ValueError(f"{path}: not an apfnav trace file")
    header = dict(kv.split("=", 1) for kv in text[0][len(TRACE_MAGIC):].split() if "=" in kv)
    if text[1] != ",".join(COLUMNS):
        raise ValueError(f"{path}: unexpected trace columns")
    rows = [line.split(",") for line in text[2:] if line]
    data = np.array([[float(v) for v in r] for r in rows])
    if data.size == 0:
        raise ValueError(f"{path}: empty trace")

    times = data[:, 0]
    modes = data[:, 8].astype(np.int8)
    # Reconstruct activation events from the mode column.
    activations = []
    start = None
    count = 0
    dt = float(times[1] - times[0]) if times.size > 1 else 0.0
    for k in range(times.size):
        if modes[k] == 1:
            if start is None:
                start = float(times[k])
            count += 1
        elif start is not None:
            activations.append((start, count * dt))
            start, count = None, 0
    if start is not None:
        activations.append((start, count * dt))

    trace = SimTrace(times=times, positions=data[:, 1:4], velocities=data[:, 4:7],
                     yaws=data[:, 7], modes=modes, ref_positions=data[:, 9:12],
                     f_modified=data[:, 12:15], f_t_magnitude=data[:, 15],
                     active_clusters=data[:, 16].astype(int),
                     cluster_counts=data[:, 17].astype(int),
                     apf_activations=activations,
                     goal_reached=header.get("goal_reached") == "1",
                     stopped_on_stuck=header.get("stopped_on_stuck") == "1")
    return trace, header


def _fmt_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def write_metrics(metrics: Metrics, path) -> None:
    lines = [f"{key}={_fmt_value(value)}" for key, value in metrics.as_dict().items()]
    Path(path).write_text("\n".join(lines) + "\n")


def read_metrics(path) -> dict:
    out = {}
    for line in Path(path).read_text().splitlines():
        if not line.strip():
            continue
        key, value = line.split("=", 1)
        if value in ("true", "false"):
            out[key] = value == "true"
        else:
            try:
                out[key] = int(value)
            except ValueError:
                out[key] = float(value)
    return out


def metrics_text(metrics: Metrics) -> str:
    return "\n".join(f"{k}={_fmt_value(v)}" for k, v in metrics.as_dict().items())
