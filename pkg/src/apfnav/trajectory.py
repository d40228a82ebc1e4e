"""Global trajectory generation and time-indexed sampling.

The geometric path is the piecewise-linear interpolation of the waypoints.
Each segment gets a rest-to-rest trapezoidal (or triangular) speed profile
whose peak speed and acceleration are the tightest componentwise limits
projected onto the segment direction, so per-axis limits hold by
construction. Segment durations are rounded up to the knot grid by uniform
time scaling, which only slows the profile, so every waypoint lands exactly
on a knot.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .scene import _vec3

_SPEED_EPS = 1e-6


def wrap_angle(a: float) -> float:
    """Wrap an angle into [-pi, pi)."""
    return float((a + math.pi) % (2.0 * math.pi) - math.pi)


@dataclass(frozen=True)
class UavState:
    position: np.ndarray
    velocity: np.ndarray = field(default_factory=lambda: np.zeros(3))
    yaw: float = 0.0
    yaw_rate: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "position", _vec3(self.position))
        object.__setattr__(self, "velocity", _vec3(self.velocity))
        if not (-math.pi <= self.yaw < math.pi):
            object.__setattr__(self, "yaw", wrap_angle(self.yaw))
        if not (math.isfinite(self.yaw) and math.isfinite(self.yaw_rate)):
            raise ValueError("yaw and yaw_rate must be finite")


@dataclass(frozen=True)
class DynamicLimits:
    v_max: np.ndarray
    a_max: np.ndarray
    yaw_rate_max: float = 1.0
    yaw_acc_max: float = 2.0

    def __post_init__(self):
        object.__setattr__(self, "v_max", _vec3(self.v_max))
        object.__setattr__(self, "a_max", _vec3(self.a_max))
        if not (np.all(self.v_max > 0) and np.all(self.a_max > 0)
                and self.yaw_rate_max > 0 and self.yaw_acc_max > 0):
            raise ValueError("all dynamic limits must be strictly positive")


@dataclass(frozen=True)
class PlannedTrajectory:
    dt_knot: float
    times: np.ndarray            # (K,), uniform spacing dt_knot
    positions: np.ndarray        # (K, 3)
    velocities: np.ndarray       # (K, 3)
    accelerations: np.ndarray    # (K, 3)
    yaws: np.ndarray             # (K,)
    yaw_rates: np.ndarray        # (K,)
    headings: np.ndarray         # (K,) trajectory heading with fallback carry
    waypoints: np.ndarray
    limits: DynamicLimits

    @property
    def duration(self) -> float:
        return float(self.times[-1])

    def knot_state(self, k: int) -> UavState:
        return UavState(self.positions[k], self.velocities[k],
                        wrap_angle(float(self.yaws[k])), float(self.yaw_rates[k]))


def _segment_profile(length: float, v_lim: float, a_lim: float):
    """Rest-to-rest trapezoid; returns (duration, v_peak, t_acc)."""
    if length >= v_lim * v_lim / a_lim:
        t_acc = v_lim / a_lim
        duration = 2.0 * t_acc + (length - v_lim * v_lim / a_lim) / v_lim
        return duration, v_lim, t_acc
    v_peak = math.sqrt(length * a_lim)
    t_acc = v_peak / a_lim
    return 2.0 * t_acc, v_peak, t_acc


def _profile_eval(tau: np.ndarray, v_peak: float, a_lim: float, t_acc: float,
                  duration: float, length: float):
    """Distance, speed, and acceleration along the profile at local times tau."""
    tau = np.clip(tau, 0.0, duration)
    t_dec = duration - t_acc
    dist = np.empty_like(tau)
    speed = np.empty_like(tau)
    acc = np.empty_like(tau)

    m_acc = tau < t_acc
    m_dec = tau > t_dec
    m_cru = ~m_acc & ~m_dec

    dist[m_acc] = 0.5 * a_lim * tau[m_acc] ** 2
    speed[m_acc] = a_lim * tau[m_acc]
    acc[m_acc] = a_lim

    d_acc = 0.5 * a_lim * t_acc ** 2
    dist[m_cru] = d_acc + v_peak * (tau[m_cru] - t_acc)
    speed[m_cru] = v_peak
    acc[m_cru] = 0.0

    rem = duration - tau[m_dec]
    dist[m_dec] = length - 0.5 * a_lim * rem ** 2
    speed[m_dec] = a_lim * rem
    acc[m_dec] = -a_lim
    return dist, speed, acc


def _axis_limit(direction: np.ndarray, limit: np.ndarray) -> float:
    """Tightest scalar magnitude along `direction` honoring per-axis caps."""
    mask = np.abs(direction) > 1e-12
    return float(np.min(limit[mask] / np.abs(direction[mask])))


def plan(waypoints, limits: DynamicLimits, dt_knot: float = 0.01) -> PlannedTrajectory:
    """Plan a limit-respecting trajectory through the waypoints."""
    wps = np.asarray(waypoints, dtype=float)
    if wps.ndim != 2 or wps.shape[1] != 3 or wps.shape[0] < 2:
        raise ValueError("plan requires at least two 3D waypoints")
    if not np.all(np.isfinite(wps)):
        raise ValueError("waypoints must be finite")
    if dt_knot <= 0:
        raise ValueError("dt_knot must be positive")

    segs = []
    t_total = 0.0
    for a, b in zip(wps[:-1], wps[1:]):
        d = b - a
        length = float(np.linalg.norm(d))
        if length <= 0.0:
            raise ValueError("consecutive waypoints must be distinct")
        u = d / length
        v_lim = _axis_limit(u, limits.v_max)
        a_lim = _axis_limit(u, limits.a_max)
        duration, v_peak, t_acc = _segment_profile(length, v_lim, a_lim)
        # Round the duration up to the knot grid; the uniform time scale
        # s <= 1 shrinks speeds by s and accelerations by s^2.
        n_knots = max(1, math.ceil(duration / dt_knot - 1e-9))
        duration_grid = n_knots * dt_knot
        scale = duration / duration_grid
        segs.append(dict(start=a, u=u, length=length, v_peak=v_peak, a_lim=a_lim,
                         t_acc=t_acc, duration=duration, duration_grid=duration_grid,
                         scale=scale, t0=t_total))
        t_total += duration_grid

    k_total = round(t_total / dt_knot) + 1
    times = np.arange(k_total) * dt_knot
    positions = np.empty((k_total, 3))
    velocities = np.zeros((k_total, 3))
    accelerations = np.zeros((k_total, 3))

    for seg in segs:
        i0 = round(seg["t0"] / dt_knot)
        i1 = round((seg["t0"] + seg["duration_grid"]) / dt_knot)
        tau = (times[i0:i1 + 1] - seg["t0"]) * seg["scale"]
        dist, speed, acc = _profile_eval(tau, seg["v_peak"], seg["a_lim"],
                                         seg["t_acc"], seg["duration"], seg["length"])
        positions[i0:i1 + 1] = seg["start"] + dist[:, None] * seg["u"]
        velocities[i0:i1 + 1] = (speed * seg["scale"])[:, None] * seg["u"]
        accelerations[i0:i1 + 1] = (acc * seg["scale"] ** 2)[:, None] * seg["u"]
    # Segment endpoints are shared knots; the later segment's rest state wins.
    for seg in segs:
        i1 = round((seg["t0"] + seg["duration_grid"]) / dt_knot)
        velocities[i1] = 0.0
        accelerations[i1] = 0.0
    positions[-1] = wps[-1]

    # Trajectory heading with carry-over through zero-speed knots.
    headings = np.empty(k_total)
    first_u = segs[0]["u"]
    prev = math.atan2(first_u[1], first_u[0]) if np.hypot(first_u[0], first_u[1]) > 1e-12 else 0.0
    for k in range(k_total):
        vx, vy = velocities[k, 0], velocities[k, 1]
        if math.hypot(vx, vy) >= _SPEED_EPS:
            prev = math.atan2(vy, vx)
        headings[k] = prev

    # Yaw follows the trajectory heading, rate-limited.
    yaws = np.empty(k_total)
    yaw_rates = np.zeros(k_total)
    yaws[0] = headings[0]
    for k in range(1, k_total):
        err = wrap_angle(headings[k] - yaws[k - 1])
        step = float(np.clip(err, -limits.yaw_rate_max * dt_knot, limits.yaw_rate_max * dt_knot))
        yaws[k] = wrap_angle(yaws[k - 1] + step)
        yaw_rates[k] = step / dt_knot

    return PlannedTrajectory(dt_knot=dt_knot, times=times, positions=positions,
                             velocities=velocities, accelerations=accelerations,
                             yaws=yaws, yaw_rates=yaw_rates, headings=headings,
                             waypoints=wps, limits=limits)


def _bracket(traj: PlannedTrajectory, t: float):
    if t < 0:
        raise ValueError("sample time must be >= 0")
    k = int(t / traj.dt_knot)
    k = min(k, len(traj.times) - 1)
    if k == len(traj.times) - 1:
        return k, k, 0.0
    frac = (t - traj.times[k]) / traj.dt_knot
    return k, k + 1, min(max(frac, 0.0), 1.0)


def sample(traj: PlannedTrajectory, t: float) -> UavState:
    """Linear interpolation between bracketing knots; clamps past the end."""
    k0, k1, w = _bracket(traj, t)
    pos = (1 - w) * traj.positions[k0] + w * traj.positions[k1]
    vel = (1 - w) * traj.velocities[k0] + w * traj.velocities[k1]
    yaw = wrap_angle(traj.yaws[k0] + w * wrap_angle(traj.yaws[k1] - traj.yaws[k0]))
    rate = (1 - w) * traj.yaw_rates[k0] + w * traj.yaw_rates[k1]
    return UavState(pos, vel, yaw, float(rate))


def heading(traj: PlannedTrajectory, t: float) -> float:
    """Planar direction of trajectory motion at time t.

    Falls back to the most recent well-defined heading when the sampled
    planar speed is below threshold (e.g. at rest-to-rest waypoints).
    """
    k0, k1, w = _bracket(traj, t)
    vel = (1 - w) * traj.velocities[k0] + w * traj.velocities[k1]
    if math.hypot(vel[0], vel[1]) >= _SPEED_EPS:
        return math.atan2(vel[1], vel[0])
    return float(traj.headings[k0])
