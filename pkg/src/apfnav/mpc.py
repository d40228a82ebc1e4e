"""Constant-snap model predictive tracker.

A virtual UAV is modeled per axis as the integrator chain
position -> velocity -> acceleration -> jerk driven by a snap input. Each
tick the latest reference is held constant over the horizon, a small
box-constrained QP is solved per axis (the chain decouples), and the
propagated virtual state is emitted as the next 100 Hz trajectory point.
Yaw is tracked by a separate rate-limited follower.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import cho_factor, cho_solve, lu_factor, lu_solve

from .qp import solve_qp
from .trajectory import UavState, wrap_angle

_BOUND_TOL = 1e-6


def build_model(dt: float):
    """Exact zero-order-hold discretization of the snap chain."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    A = np.array([
        [1.0, dt, dt ** 2 / 2.0, dt ** 3 / 6.0],
        [0.0, 1.0, dt, dt ** 2 / 2.0],
        [0.0, 0.0, 1.0, dt],
        [0.0, 0.0, 0.0, 1.0],
    ])
    B = np.array([dt ** 4 / 24.0, dt ** 3 / 6.0, dt ** 2 / 2.0, dt])
    return A, B


def _arr3(v) -> np.ndarray:
    a = np.asarray(v, dtype=float) * np.ones(3)
    if a.shape != (3,):
        raise ValueError("expected scalar or 3-vector")
    return a


@dataclass(frozen=True)
class MpcConfig:
    horizon: int = 40
    dt: float = 0.01
    q_weights: tuple = (100.0, 20.0, 0.1, 0.01)
    p_weight: float = 0.001
    v_max: np.ndarray = field(default_factory=lambda: np.full(3, 2.0))
    a_max: np.ndarray = field(default_factory=lambda: np.full(3, 2.0))
    j_max: np.ndarray = field(default_factory=lambda: np.full(3, 20.0))
    u_max: float = 400.0
    yaw_rate_max: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "v_max", _arr3(self.v_max))
        object.__setattr__(self, "a_max", _arr3(self.a_max))
        object.__setattr__(self, "j_max", _arr3(self.j_max))
        if self.horizon < 1:
            raise ValueError("horizon must be >= 1")
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        if self.p_weight <= 0:
            raise ValueError("input weight must be positive")
        if len(self.q_weights) != 4 or any(w < 0 for w in self.q_weights):
            raise ValueError("q_weights must be 4 nonnegative values")
        if (np.any(self.v_max <= 0) or np.any(self.a_max <= 0)
                or np.any(self.j_max <= 0) or self.u_max <= 0):
            raise ValueError("state and input bounds must be positive")


@dataclass(frozen=True)
class TrajectoryPoint:
    position: np.ndarray
    velocity: np.ndarray
    acceleration: np.ndarray
    yaw: float
    stamp: float


@dataclass
class AxisSolve:
    u0: float
    u: np.ndarray
    predicted: np.ndarray      # (N, 4) states over the horizon
    kkt_residual: float
    soft_start: bool
    suboptimal: bool
    active: list = field(default_factory=list)


class CondensedModel:
    """Horizon-condensed prediction matrices, shared across axes."""

    def __init__(self, cfg: MpcConfig):
        self.cfg = cfg
        N = cfg.horizon
        A, B = build_model(cfg.dt)
        self.A, self.B = A, B
        powers = [np.eye(4)]
        for _ in range(N):
            powers.append(A @ powers[-1])
        self.Psi = np.vstack([powers[i] for i in range(1, N + 1)])          # (4N, 4)
        Phi = np.zeros((4 * N, N))
        for i in range(1, N + 1):
            for j in range(i):
                Phi[4 * (i - 1):4 * i, j] = powers[i - 1 - j] @ B
        self.Phi = Phi
        q = np.tile(np.asarray(cfg.q_weights, dtype=float), N)
        self.PhiT_Q = Phi.T * q                                             # (N, 4N)
        self.H = 2.0 * (self.PhiT_Q @ Phi + cfg.p_weight * np.eye(N))
        self.H_chol = cho_factor(self.H)
        # State rows selecting v, a, j of every predicted step.
        sel = np.zeros((3 * N, 4 * N))
        for i in range(N):
            for s in range(3):
                sel[3 * i + s, 4 * i + 1 + s] = 1.0
        self.sel = sel
        self.S_Phi = sel @ Phi
        self.S_Psi = sel @ self.Psi
        self.G = np.vstack([self.S_Phi, -self.S_Phi, np.eye(N), -np.eye(N)])
        # Terminal rest-rate rows (zero acceleration and jerk at the horizon
        # end). Holding them as equalities makes the shifted previous input
        # sequence feasible at the next tick, so the closed loop never runs
        # out of feasible QPs while riding a velocity bound.
        eq_rows = [4 * (N - 1) + 2, 4 * (N - 1) + 3]
        self.E_phi = Phi[eq_rows, :]
        self.E_psi = self.Psi[eq_rows, :]
        k = self.E_phi.shape[0]
        # A one-step horizon cannot pin both rates independently; the open-loop
        # solve path never needs these factors, so skip them.
        if np.linalg.matrix_rank(self.E_phi) == k:
            self.kkt_eq = lu_factor(np.block([
                [self.H, self.E_phi.T],
                [self.E_phi, np.zeros((k, k))]]))
            self.EEt_inv = np.linalg.inv(self.E_phi @ self.E_phi.T)
        else:
            self.kkt_eq = None
            self.EEt_inv = None

    def bounds_vector(self, axis: int) -> np.ndarray:
        cfg = self.cfg
        return np.tile([cfg.v_max[axis], cfg.a_max[axis], cfg.j_max[axis]], cfg.horizon)

    def h_vector(self, x0: np.ndarray, axis: int) -> np.ndarray:
        b = self.bounds_vector(axis)
        free = self.S_Psi @ x0
        u_cap = np.full(self.cfg.horizon, self.cfg.u_max)
        return np.concatenate([b - free, b + free, u_cap, u_cap])


def _phase1_start(model: CondensedModel, h: np.ndarray, A_eq, b_eq,
                  x_start: np.ndarray) -> np.ndarray | None:
    """Find a bound-feasible input sequence when the cheap start points fail.

    Minimizes the largest constraint violation t over (u, t); the slightly
    violating ``x_start`` paired with its own violation is always feasible
    for this relaxation, and t = 0 at the optimum recovers a start for the
    real problem. Returns None when no feasible sequence exists.
    """
    N = model.cfg.horizon
    t0 = float(np.max(model.G @ x_start - h)) + 1e-6
    Gz = np.hstack([model.G, -np.ones((model.G.shape[0], 1))])
    Gz = np.vstack([Gz, np.concatenate([np.zeros(N), [-1.0]])])
    hz = np.concatenate([h, [0.0]])
    Hz = 1e-6 * np.eye(N + 1)
    gz = np.zeros(N + 1)
    gz[-1] = 1.0
    Az = None if A_eq is None else np.hstack([A_eq, np.zeros((A_eq.shape[0], 1))])
    z0 = np.concatenate([x_start, [t0]])
    res = solve_qp(Hz, gz, Gz, hz, A_eq=Az, b_eq=b_eq, x0=z0)
    if res.converged and res.x[-1] <= 1e-9:
        u = res.x[:N]
        if np.all(model.G @ u <= h + 1e-8):
            return u
    return None


def solve_axis(model: CondensedModel, x0: np.ndarray, refs: np.ndarray, axis: int,
               warm_u: np.ndarray | None = None, warm_set=None,
               terminal_rest: bool = False) -> AxisSolve:
    """Solve one axis of the horizon QP.

    ``refs`` is (N, 4). With ``terminal_rest`` the acceleration and jerk at
    the horizon end are pinned to zero (used by the closed-loop tracker).
    If no feasible start exists (initial state outside bounds), the violated
    rows are relaxed just enough to admit a start and the result is flagged
    as a soft start.
    """
    N = model.cfg.horizon
    free = model.Psi @ x0
    g = 2.0 * model.PhiT_Q @ (free - refs.reshape(-1))
    h = model.h_vector(x0, axis)
    soft = False
    subopt = False
    result_kkt = 0.0
    active_out: list = []

    if terminal_rest:
        if model.kkt_eq is None:
            raise ValueError("terminal rest needs a horizon of at least 2 steps")
        A_eq, b_eq = model.E_phi, -(model.E_psi @ x0)
        sol = lu_solve(model.kkt_eq, np.concatenate([-g, b_eq]))
        u_fast = sol[:N]
    else:
        A_eq, b_eq = None, None
        u_fast = -cho_solve(model.H_chol, g)

    if np.all(model.G @ u_fast <= h + 1e-10):
        u = u_fast
    else:
        eq_ok = (warm_u is not None and (not terminal_rest or np.max(
            np.abs(model.E_phi @ warm_u - b_eq), initial=0.0) <= 1e-7))
        if eq_ok and np.all(model.G @ warm_u <= h + 1e-10):
            x_start, start_set = warm_u, warm_set
        else:
            # Minimum-norm input meeting the terminal equalities (zero when
            # there are none); relax any bound rows it still violates.
            x_start = (model.E_phi.T @ (model.EEt_inv @ b_eq)
                       if terminal_rest else np.zeros(N))
            start_set = None
            slack = model.G @ x_start - h
            if np.any(slack > 0.0):
                u_feas = _phase1_start(model, h, A_eq, b_eq, x_start)
                if u_feas is not None:
                    x_start = u_feas
                else:
                    h = np.maximum(h, model.G @ x_start)
                    soft = True
        res = solve_qp(model.H, g, model.G, h, A_eq=A_eq, b_eq=b_eq,
                       x0=x_start, working_set=start_set)
        u = res.x
        result_kkt, subopt = res.kkt_residual, not res.converged
        active_out = list(res.active)

    predicted = (free + model.Phi @ u).reshape(N, 4)
    return AxisSolve(float(u[0]), u, predicted, result_kkt, soft, subopt, active_out)


def solve(x0_axes: np.ndarray, refs_axes: np.ndarray, cfg: MpcConfig,
          model: CondensedModel | None = None):
    """Solve all three axes; returns (u_star_0[3], predicted (3, N, 4), solves)."""
    model = model or CondensedModel(cfg)
    refs_axes = np.asarray(refs_axes, dtype=float)
    if refs_axes.shape != (3, cfg.horizon, 4):
        raise ValueError("refs must have shape (3, N, 4)")
    solves = [solve_axis(model, np.asarray(x0_axes[ax], dtype=float), refs_axes[ax], ax)
              for ax in range(3)]
    u0 = np.array([s.u0 for s in solves])
    predicted = np.stack([s.predicted for s in solves])
    return u0, predicted, solves


class MpcTracker:
    """Stateful 100 Hz tracker around the per-axis horizon QPs."""

    def __init__(self, cfg: MpcConfig, initial: UavState):
        self.cfg = cfg
        self.model = CondensedModel(cfg)
        # Per-axis virtual state [p, v, a, j].
        self.x = np.zeros((3, 4))
        self.x[:, 0] = initial.position
        self.x[:, 1] = initial.velocity
        self.yaw = initial.yaw
        self.stamp = 0.0
        self._warm_u = [None, None, None]
        self._warm_set = [None, None, None]
        self.last_solves: list[AxisSolve] | None = None

    def _shift_active(self, active: list) -> list | None:
        """Map an active set one tick forward (rows for step i become i-1)."""
        if not active:
            return None
        N = self.cfg.horizon
        shifted = []
        for idx in active:
            if idx < 6 * N:                      # state rows, 3 per step
                if idx % (3 * N) >= 3:
                    shifted.append(idx - 3)
            else:                                # input rows, 1 per step
                if idx % N >= 1:
                    shifted.append(idx - 1)
        return shifted or None

    def track_step(self, reference: UavState) -> TrajectoryPoint:
        cfg = self.cfg
        N = cfg.horizon
        refs = np.zeros((3, N, 4))
        refs[:, :, 0] = reference.position[:, None]
        refs[:, :, 1] = reference.velocity[:, None]

        solves = []
        for ax in range(3):
            s = solve_axis(self.model, self.x[ax], refs[ax], ax,
                           warm_u=self._warm_u[ax], warm_set=self._warm_set[ax],
                           terminal_rest=True)
            self._warm_u[ax] = np.concatenate([s.u[1:], [0.0]])
            self._warm_set[ax] = self._shift_active(s.active)
            solves.append(s)
        self.last_solves = solves

        u0 = np.array([s.u0 for s in solves])
        u0 = np.clip(u0, -cfg.u_max, cfg.u_max)
        self.x = (self.model.A @ self.x.T).T + np.outer(u0, self.model.B)
        self.stamp += cfg.dt

        soft = any(s.soft_start for s in solves)
        if not soft:
            over_v = np.abs(self.x[:, 1]) - cfg.v_max
            over_a = np.abs(self.x[:, 2]) - cfg.a_max
            over_j = np.abs(self.x[:, 3]) - cfg.j_max
            if max(over_v.max(), over_a.max(), over_j.max()) > _BOUND_TOL:
                raise RuntimeError("tracker produced a state outside the configured bounds")

        dyaw = wrap_angle(reference.yaw - self.yaw)
        step = float(np.clip(dyaw, -cfg.yaw_rate_max * cfg.dt, cfg.yaw_rate_max * cfg.dt))
        self.yaw = wrap_angle(self.yaw + step)

        return TrajectoryPoint(self.x[:, 0].copy(), self.x[:, 1].copy(),
                               self.x[:, 2].copy(), self.yaw, self.stamp)
