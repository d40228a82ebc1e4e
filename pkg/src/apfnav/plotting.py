"""X-Y path plots: planned vs executed trajectory with obstacle outlines."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
from matplotlib.patches import Circle, Rectangle

from .scene import AxisAlignedBox, VerticalCylinder
from .simulator import ScenarioConfig, SimTrace


def plot_run(trace: SimTrace, config: ScenarioConfig, path, title: str | None = None) -> None:
    """Save a vector image of the run in the X-Y plane."""
    fig, ax = plt.subplots(figsize=(7, 6))
    for ob in config.scene.obstacles:
        if isinstance(ob, AxisAlignedBox):
            ax.add_patch(Rectangle(ob.min_corner[:2],
                                   ob.max_corner[0] - ob.min_corner[0],
                                   ob.max_corner[1] - ob.min_corner[1],
                                   facecolor="0.8", edgecolor="0.3"))
        elif isinstance(ob, VerticalCylinder):
            ax.add_patch(Circle(ob.center_xy, ob.radius, facecolor="0.8", edgecolor="0.3"))

    wps = config.waypoints
    ax.plot(wps[:, 0], wps[:, 1], "--", color="tab:blue", label="planned path")
    ax.plot(trace.positions[:, 0], trace.positions[:, 1], color="tab:red", label="executed")
    ax.plot(wps[0, 0], wps[0, 1], "o", color="tab:green", label="start")
    ax.plot(wps[-1, 0], wps[-1, 1], "*", color="tab:orange", markersize=12, label="goal")
    ax.set_xlabel("x [m]")
    ax.set_ylabel("y [m]")
    ax.set_aspect("equal", adjustable="datalim")
    ax.legend(loc="best", fontsize=8)
    ax.set_title(title or f"{config.name} ({config.mode})")
    fig.savefig(path, bbox_inches="tight")
    plt.close(fig)
