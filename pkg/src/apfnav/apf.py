"""Modified repulsive potential field and the follow/avoid supervisor.

The field has no attractive term. Each obstacle cluster contributes a
translational force (negative gradient of the inverse-distance repulsive
potential, full 3D) and a rotational force (perpendicular to the planar
obstacle offset, direction picked by the sign of the wrapped difference
between the trajectory heading and the obstacle bearing). The supervisor
switches between trajectory following and field-driven avoidance on a force
threshold; the trajectory clock keeps running during avoidance, so the plan
is rejoined at the time-shifted point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .clustering import Cluster
from .trajectory import PlannedTrajectory, UavState, heading, sample, wrap_angle

_PLANAR_EPS = 1e-12


@dataclass(frozen=True)
class ApfParams:
    k_rt: float
    k_rr: float
    d_0: float
    f_threshold: float
    step_gain: float = 1.0     # meters of reference offset per unit force
    d_min: float = 0.1         # distance clamp; the field diverges at d -> 0
    use_nearest_point: bool = False  # obstacle reference: nearest point instead of centroid

    def __post_init__(self):
        if self.k_rt < 0 or self.k_rr < 0:
            raise ValueError("gains must be >= 0")
        if self.d_0 <= 0 or self.f_threshold <= 0 or self.step_gain <= 0 or self.d_min <= 0:
            raise ValueError("d_0, f_threshold, step_gain, d_min must be positive")


@dataclass(frozen=True)
class ClusterForce:
    cluster_id: int
    f_rt: np.ndarray
    f_rr: np.ndarray
    f_r: np.ndarray
    distance: float
    theta: float
    clamped: bool = False
    degenerate: bool = False


@dataclass(frozen=True)
class ForceField:
    per_cluster: tuple
    f_total_translational: np.ndarray
    f_total_modified: np.ndarray
    f_t_magnitude: float

    @classmethod
    def empty(cls) -> "ForceField":
        return cls((), np.zeros(3), np.zeros(3), 0.0)


def _coefficient(d_eff: float, params: ApfParams, gain: float) -> float:
    return gain * (1.0 / d_eff - 1.0 / params.d_0) / d_eff ** 3


def _effective(q: np.ndarray, q_o: np.ndarray, params: ApfParams):
    """Distance with the d_min clamp applied; offset rescaled to match."""
    diff = q - q_o
    d = float(np.linalg.norm(diff))
    if d == 0.0:
        raise ValueError("q must differ from q_o")
    if d < params.d_min:
        return params.d_min, diff * (params.d_min / d), True
    return d, diff, False


def repulsive_potential(q, q_o, params: ApfParams) -> float:
    """Inverse-distance repulsive potential, zero beyond d_0."""
    q = np.asarray(q, dtype=float)
    q_o = np.asarray(q_o, dtype=float)
    d, _, _ = _effective(q, q_o, params)
    if d > params.d_0:
        return 0.0
    return 0.5 * params.k_rt * (1.0 / d - 1.0 / params.d_0) ** 2


def translational_force(q, q_o, params: ApfParams) -> np.ndarray:
    """Negative gradient of the repulsive potential; pushes away in 3D."""
    q = np.asarray(q, dtype=float)
    q_o = np.asarray(q_o, dtype=float)
    d, diff, _ = _effective(q, q_o, params)
    if d > params.d_0:
        return np.zeros(3)
    return _coefficient(d, params, params.k_rt) * diff


def rotation_direction(phi: float, rho: float) -> np.ndarray:
    """2x2 rotation-selection matrix from the wrapped heading/bearing gap."""
    theta = wrap_angle(phi - rho)
    if theta >= 0.0:
        return np.array([[0.0, 1.0], [-1.0, 0.0]])
    return np.array([[0.0, -1.0], [1.0, 0.0]])


def rotational_force(q, q_o, phi: float, params: ApfParams) -> np.ndarray:
    """Planar force perpendicular to the obstacle offset; z-component is 0."""
    f, _, _ = _rotational_force_info(np.asarray(q, dtype=float),
                                     np.asarray(q_o, dtype=float), phi, params)
    return f


def _rotational_force_info(q: np.ndarray, q_o: np.ndarray, phi: float, params: ApfParams):
    d, diff, clamped = _effective(q, q_o, params)
    planar = diff[:2]
    rho = math.atan2(q_o[1] - q[1], q_o[0] - q[0])
    theta = wrap_angle(phi - rho)
    if d > params.d_0:
        return np.zeros(3), theta, False
    if np.hypot(planar[0], planar[1]) < _PLANAR_EPS:
        # Obstacle directly above/below: the rotation axis is undefined.
        return np.zeros(3), theta, True
    rotated = rotation_direction(phi, rho) @ planar
    coef = _coefficient(d, params, params.k_rr)
    return np.array([coef * rotated[0], coef * rotated[1], 0.0]), theta, False


def total_force(q, clusters, phi: float, params: ApfParams,
                points: np.ndarray | None = None) -> ForceField:
    """Aggregate field over all clusters; obstacle reference is the centroid.

    With ``params.use_nearest_point`` the reference is the nearest cluster
    point instead (requires ``points``).
    """
    q = np.asarray(q, dtype=float)
    per_cluster = []
    f_trans = np.zeros(3)
    f_mod = np.zeros(3)
    for i, cluster in enumerate(clusters):
        q_o = _obstacle_reference(q, cluster, params, points)
        d_raw = float(np.linalg.norm(q - q_o))
        if d_raw == 0.0:
            per_cluster.append(ClusterForce(i, np.zeros(3), np.zeros(3), np.zeros(3),
                                            0.0, 0.0, clamped=True, degenerate=True))
            continue
        d, _, clamped = _effective(q, q_o, params)
        f_rt = translational_force(q, q_o, params)
        f_rr, theta, degen = _rotational_force_info(q, q_o, phi, params)
        per_cluster.append(ClusterForce(i, f_rt, f_rr, f_rt + f_rr, d_raw, theta,
                                        clamped=clamped, degenerate=degen))
        f_trans = f_trans + f_rt
        f_mod = f_mod + f_rt + f_rr
    return ForceField(tuple(per_cluster), f_trans, f_mod, float(np.linalg.norm(f_trans)))


def _obstacle_reference(q, cluster: Cluster, params: ApfParams, points):
    if not params.use_nearest_point:
        return cluster.centroid
    if points is None:
        raise ValueError("use_nearest_point requires the source cloud")
    member = np.asarray(points, dtype=float)[cluster.point_indices]
    return member[np.argmin(np.linalg.norm(member - q, axis=1))]


class Mode(Enum):
    FOLLOW_TRAJECTORY = "follow_trajectory"
    APF_ACTIVE = "apf_active"


@dataclass(frozen=True)
class SupervisorState:
    mode: Mode = Mode.FOLLOW_TRAJECTORY
    t_activation: float = 0.0
    t_in_apf: float = 0.0
    last_heading: float = 0.0


@dataclass(frozen=True)
class SupervisorStep:
    reference: UavState
    sup: SupervisorState
    field: ForceField


def supervisor_step(state: UavState, traj: PlannedTrajectory, clusters,
                    t_now: float, sup: SupervisorState, params: ApfParams,
                    dt: float) -> SupervisorStep:
    """One supervisor tick: pick follow-vs-avoid and build the reference.

    Avoidance is active whenever the summed translational force magnitude
    reaches the threshold. The reference during avoidance steps along the
    modified total force, per-axis clamped so it stays reachable within one
    tick at v_max. Following always samples the plan at the running clock,
    which realizes the time-shifted rejoin after avoidance.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    phi = heading(traj, t_now)
    field_now = total_force(state.position, clusters, phi, params)

    if field_now.f_t_magnitude < params.f_threshold:
        reference = sample(traj, t_now)
        new_sup = SupervisorState(Mode.FOLLOW_TRAJECTORY, sup.t_activation, 0.0, phi)
        return SupervisorStep(reference, new_sup, field_now)

    t_activation = sup.t_activation if sup.mode is Mode.APF_ACTIVE else t_now
    step = params.step_gain * field_now.f_total_modified
    max_step = traj.limits.v_max * dt
    step = np.clip(step, -max_step, max_step)
    reference = UavState(state.position + step, step / dt, state.yaw, 0.0)
    new_sup = SupervisorState(Mode.APF_ACTIVE, t_activation, sup.t_in_apf + dt, phi)
    return SupervisorStep(reference, new_sup, field_now)
