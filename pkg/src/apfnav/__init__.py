"""UAV obstacle avoidance with a rotational-repulsive potential field.

Library pieces: lidar scene simulation, euclidean clustering, limit-aware
global trajectories, the modified repulsive force field with its follow/avoid
supervisor, a constant-snap MPC tracker, and a closed-loop scenario
simulator with metrics.
"""

from .apf import (ApfParams, ForceField, Mode, SupervisorState, repulsive_potential,
                  rotation_direction, rotational_force, supervisor_step, total_force,
                  translational_force)
from .clustering import Cluster, centroid, euclidean_cluster
from .mpc import MpcConfig, MpcTracker, TrajectoryPoint, build_model
from .scene import AxisAlignedBox, LidarModel, Scene, VerticalCylinder, raycast
from .simulator import (Metrics, ScenarioConfig, SimTrace, compute_metrics,
                        detect_local_minimum, run)
from .trajectory import (DynamicLimits, PlannedTrajectory, UavState, heading, plan,
                         sample, wrap_angle)

__all__ = [
    "ApfParams", "ForceField", "Mode", "SupervisorState", "repulsive_potential",
    "rotation_direction", "rotational_force", "supervisor_step", "total_force",
    "translational_force",
    "Cluster", "centroid", "euclidean_cluster",
    "MpcConfig", "MpcTracker", "TrajectoryPoint", "build_model",
    "AxisAlignedBox", "LidarModel", "Scene", "VerticalCylinder", "raycast",
    "Metrics", "ScenarioConfig", "SimTrace", "compute_metrics",
    "detect_local_minimum", "run",
    "DynamicLimits", "PlannedTrajectory", "UavState", "heading", "plan",
    "sample", "wrap_angle",
]

__version__ = "0.1.0"
