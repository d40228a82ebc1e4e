"""Closed-loop scenario simulation: sense, cluster, supervise, track, record.

The plant ideally tracks the MPC virtual state (an optional first-order lag
exists for robustness studies), so the executed trace inherits the tracker's
velocity/acceleration bounds. Everything is deterministic for a fixed
configuration and seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .apf import ApfParams, Mode, SupervisorState, supervisor_step
from .clustering import euclidean_cluster
from .mpc import MpcConfig, MpcTracker
from .scene import LidarModel, Scene, raycast
from .trajectory import DynamicLimits, UavState, plan

T_STUCK = 30.0          # trailing window for local-minimum detection, seconds
STUCK_PROGRESS = 0.5    # minimum path progress over the window, meters
STUCK_ACTIVE_FRAC = 0.5
_FORCE_SIGN_EPS = 1e-9


@dataclass(frozen=True)
class ClusteringConfig:
    c_tolerance: float = 1.0
    min_cluster_size: int = 1

    def __post_init__(self):
        if self.c_tolerance <= 0:
            raise ValueError("c_tolerance must be positive")
        if self.min_cluster_size < 1:
            raise ValueError("min_cluster_size must be >= 1")


@dataclass(frozen=True)
class SimConfig:
    dt: float = 0.01
    time_budget: float = 300.0
    goal_tolerance: float = 0.5
    scan_rate_hz: float = 10.0
    stop_on_stuck: bool = True
    plant: str = "ideal"        # "ideal" or "lag"
    lag_tau: float = 0.2

    def __post_init__(self):
        if self.dt <= 0 or self.time_budget <= 0 or self.goal_tolerance <= 0:
            raise ValueError("dt, time_budget, goal_tolerance must be positive")
        if self.scan_rate_hz <= 0:
            raise ValueError("scan_rate_hz must be positive")
        if self.plant not in ("ideal", "lag"):
            raise ValueError("plant must be 'ideal' or 'lag'")
        if self.lag_tau <= 0:
            raise ValueError("lag_tau must be positive")


@dataclass(frozen=True)
class ScenarioConfig:
    name: str
    scene: Scene
    waypoints: np.ndarray
    limits: DynamicLimits
    apf: ApfParams
    clustering: ClusteringConfig
    lidar: LidarModel
    mpc: MpcConfig
    sim: SimConfig
    mode: str = "modified"      # "modified" or "conventional" (k_rr forced to 0)

    def __post_init__(self):
        object.__setattr__(self, "waypoints", np.asarray(self.waypoints, dtype=float))
        if self.mode not in ("modified", "conventional"):
            raise ValueError("mode must be 'modified' or 'conventional'")

    def effective_apf(self) -> ApfParams:
        if self.mode == "conventional":
            return replace(self.apf, k_rr=0.0)
        return self.apf


@dataclass
class SimTrace:
    times: np.ndarray
    positions: np.ndarray
    velocities: np.ndarray
    yaws: np.ndarray
    modes: np.ndarray            # 0 = follow trajectory, 1 = APF active
    ref_positions: np.ndarray
    f_modified: np.ndarray       # total modified force per tick, (K, 3)
    f_t_magnitude: np.ndarray
    active_clusters: np.ndarray  # clusters inside the influence distance
    cluster_counts: np.ndarray
    apf_activations: list        # [(t_k, t_o), ...]
    goal_reached: bool
    stopped_on_stuck: bool


@dataclass
class Metrics:
    goal_reached: bool
    time_to_goal: float
    path_length: float
    min_clearance: float
    max_deviation_from_plan: float
    returned_to_plan: bool
    oscillation_count: int
    stuck: bool

    def as_dict(self) -> dict:
        return {
            "goal_reached": self.goal_reached,
            "time_to_goal": self.time_to_goal,
            "path_length": self.path_length,
            "min_clearance": self.min_clearance,
            "max_deviation_from_plan": self.max_deviation_from_plan,
            "returned_to_plan": self.returned_to_plan,
            "oscillation_count": self.oscillation_count,
            "stuck": self.stuck,
        }


def _project_on_polyline(waypoints: np.ndarray, positions: np.ndarray):
    """Closest-point projection; returns (arc length, distance) per position."""
    wps = np.asarray(waypoints, dtype=float)
    pos = np.atleast_2d(np.asarray(positions, dtype=float))
    starts = wps[:-1]
    diffs = wps[1:] - starts
    lens = np.linalg.norm(diffs, axis=1)
    cum = np.concatenate([[0.0], np.cumsum(lens)])
    units = diffs / lens[:, None]

    # (ticks, segments) projection parameters and distances.
    rel = pos[:, None, :] - starts[None, :, :]
    t = np.clip(np.einsum("tsd,sd->ts", rel, units), 0.0, lens[None, :])
    closest = starts[None, :, :] + t[:, :, None] * units[None, :, :]
    dist = np.linalg.norm(pos[:, None, :] - closest, axis=2)
    best = np.argmin(dist, axis=1)
    idx = np.arange(pos.shape[0])
    return cum[best] + t[idx, best], dist[idx, best]


def path_progress(waypoints: np.ndarray, positions: np.ndarray) -> np.ndarray:
    """Arc length of the closest point on the waypoint polyline, per position."""
    return _project_on_polyline(waypoints, positions)[0]


def detect_local_minimum(times: np.ndarray, progress: np.ndarray, modes: np.ndarray,
                         t_stuck: float = T_STUCK) -> bool:
    """True when path progress stalls while avoidance dominates the window."""
    times = np.asarray(times, dtype=float)
    if times.size == 0 or times[-1] - times[0] < t_stuck:
        return False
    j = int(np.searchsorted(times, times[-1] - t_stuck))
    window_modes = np.asarray(modes)[j:]
    active_frac = float(np.mean(window_modes == 1))
    advanced = float(progress[-1] - progress[j])
    return advanced < STUCK_PROGRESS and active_frac > STUCK_ACTIVE_FRAC


def run(config: ScenarioConfig) -> SimTrace:
    """Run the closed loop until goal, budget, or (optionally) a detected stall."""
    dt = config.sim.dt
    if abs(config.mpc.dt - dt) > 1e-12:
        raise ValueError("mpc.dt must equal sim.dt")
    params = config.effective_apf()
    traj = plan(config.waypoints, config.limits, dt_knot=dt)
    goal = config.waypoints[-1]

    state = traj.knot_state(0)
    tracker = MpcTracker(config.mpc, state)
    sup = SupervisorState(last_heading=float(traj.headings[0]))
    scan_interval = max(1, round(1.0 / (config.sim.scan_rate_hz * dt)))
    n_max = int(math.ceil(config.sim.time_budget / dt)) + 1

    rec_t, rec_p, rec_v, rec_yaw = [], [], [], []
    rec_mode, rec_refp, rec_fmod, rec_ftmag = [], [], [], []
    rec_act, rec_nclus = [], []
    activations = []
    progress_hist = []
    clusters = []
    pending_activation = None
    goal_reached = False
    stopped_on_stuck = False

    wps = config.waypoints
    for k in range(n_max):
        t = k * dt
        if k % scan_interval == 0:
            cloud = raycast(config.scene,
                            {"position": state.position, "yaw": state.yaw}, config.lidar)
            clusters = euclidean_cluster(cloud, config.clustering.c_tolerance,
                                         config.clustering.min_cluster_size)

        step = supervisor_step(state, traj, clusters, t, sup, params, dt)
        if step.sup.mode is Mode.APF_ACTIVE and sup.mode is Mode.FOLLOW_TRAJECTORY:
            pending_activation = step.sup.t_activation
        if step.sup.mode is Mode.FOLLOW_TRAJECTORY and sup.mode is Mode.APF_ACTIVE:
            activations.append((pending_activation, sup.t_in_apf))
            pending_activation = None
        sup = step.sup

        rec_t.append(t)
        rec_p.append(state.position)
        rec_v.append(state.velocity)
        rec_yaw.append(state.yaw)
        rec_mode.append(1 if sup.mode is Mode.APF_ACTIVE else 0)
        rec_refp.append(step.reference.position)
        rec_fmod.append(step.field.f_total_modified)
        rec_ftmag.append(step.field.f_t_magnitude)
        rec_act.append(sum(1 for c in step.field.per_cluster if c.distance <= params.d_0))
        rec_nclus.append(len(clusters))
        progress_hist.append(float(path_progress(wps, state.position[None, :])[0]))

        if float(np.linalg.norm(state.position - goal)) <= config.sim.goal_tolerance:
            goal_reached = True
            break
        if t >= config.sim.time_budget:
            break
        if (config.sim.stop_on_stuck and k % 50 == 0 and t >= T_STUCK
                and detect_local_minimum(np.array(rec_t), np.array(progress_hist),
                                         np.array(rec_mode))):
            stopped_on_stuck = True
            break

        point = tracker.track_step(step.reference)
        if config.sim.plant == "ideal":
            state = UavState(point.position, point.velocity, point.yaw)
        else:
            alpha = dt / config.sim.lag_tau
            state = UavState(state.position + alpha * (point.position - state.position),
                             state.velocity + alpha * (point.velocity - state.velocity),
                             point.yaw)

    if pending_activation is not None:
        activations.append((pending_activation, sup.t_in_apf))

    return SimTrace(times=np.array(rec_t), positions=np.array(rec_p),
                    velocities=np.array(rec_v), yaws=np.array(rec_yaw),
                    modes=np.array(rec_mode, dtype=np.int8),
                    ref_positions=np.array(rec_refp),
                    f_modified=np.array(rec_fmod),
                    f_t_magnitude=np.array(rec_ftmag),
                    active_clusters=np.array(rec_act, dtype=int),
                    cluster_counts=np.array(rec_nclus, dtype=int),
                    apf_activations=activations,
                    goal_reached=goal_reached,
                    stopped_on_stuck=stopped_on_stuck)


def _oscillation_count(f_x: np.ndarray, modes: np.ndarray) -> int:
    """Sign transitions (including through zero) of the applied x-force.

    The force steers the vehicle only while avoidance is active, so the
    applied x-force is zero during trajectory following; repeated
    activate/retreat cycles at a wall then register as -/0/- transitions
    even though the repulsive force itself never points toward the wall.
    """
    applied = np.where(np.asarray(modes) == 1, f_x, 0.0)
    signs = np.zeros_like(applied, dtype=int)
    signs[applied > _FORCE_SIGN_EPS] = 1
    signs[applied < -_FORCE_SIGN_EPS] = -1
    changed = signs[1:] != signs[:-1]
    near_active = (modes[1:] == 1) | (modes[:-1] == 1)
    return int(np.sum(changed & near_active))


def compute_metrics(trace: SimTrace, config: ScenarioConfig) -> Metrics:
    """Derive all scenario metrics from the tick records and the config."""
    if trace.times.size == 0:
        raise ValueError("trace must be non-empty")
    goal = config.waypoints[-1]
    pos = trace.positions

    goal_reached = bool(np.linalg.norm(pos[-1] - goal) <= config.sim.goal_tolerance)
    time_to_goal = float(trace.times[-1]) if goal_reached else float("nan")
    path_length = float(np.sum(np.linalg.norm(np.diff(pos, axis=0), axis=1)))
    if config.scene.obstacles:
        min_clearance = float(min(config.scene.clearance(p) for p in pos))
    else:
        min_clearance = float("inf")

    # Deviation is measured to the planned path geometrically, not to the
    # time-aligned plan point: the tracker lags a moving reference by design
    # (its velocity bound equals the plan's), which is not a deviation.
    progress, deviation = _project_on_polyline(config.waypoints, pos)
    max_deviation = float(np.max(deviation))

    # Last tick of avoidance, if any; afterwards the plan must be rejoined.
    apf_ticks = np.flatnonzero(trace.modes == 1)
    first_ok = int(apf_ticks[-1]) + 1 if apf_ticks.size else 0
    last = len(trace.times) - 1 if goal_reached else len(trace.times)
    window = deviation[first_ok:last]
    returned_to_plan = bool(window.size and np.min(window) < config.sim.goal_tolerance)

    oscillations = _oscillation_count(trace.f_modified[:, 0], trace.modes)
    stuck = _any_window_stuck(trace.times, progress, trace.modes)

    return Metrics(goal_reached=goal_reached, time_to_goal=time_to_goal,
                   path_length=path_length, min_clearance=min_clearance,
                   max_deviation_from_plan=max_deviation,
                   returned_to_plan=returned_to_plan,
                   oscillation_count=oscillations, stuck=stuck)


def _any_window_stuck(times, progress, modes, t_stuck: float = T_STUCK) -> bool:
    times = np.asarray(times, dtype=float)
    if times.size == 0 or times[-1] - times[0] < t_stuck:
        return False
    active = np.concatenate([[0], np.cumsum(modes == 1)])
    starts = np.searchsorted(times, times - t_stuck)
    ends = np.arange(times.size)
    valid = times - times[0] >= t_stuck
    counts = ends + 1 - starts
    frac = (active[ends + 1] - active[starts]) / counts
    advanced = progress - progress[starts]
    return bool(np.any(valid & (advanced < STUCK_PROGRESS) & (frac > STUCK_ACTIVE_FRAC)))
