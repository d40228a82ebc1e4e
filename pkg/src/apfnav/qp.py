"""Dense primal active-set solver for strictly convex QPs.

Solves  min 0.5 x'Hx + g'x  s.t.  A_eq x = b_eq,  Gx <= h  with H positive
definite. Inequalities in this package are box bounds on inputs or predicted
states, so the working set stays small and the method terminates in a finite
number of exchanges. Used by the MPC tracker in place of a generated solver.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


def _independent_subset(A_eq: np.ndarray, G: np.ndarray, candidates) -> list:
    """Greedily keep candidate rows of G that stay linearly independent of A_eq.

    Seeded working sets (all constraints tight at the start point) can be
    rank-deficient — e.g. every velocity bound tight plus terminal equalities —
    which makes the KKT system singular and the multiplier signs meaningless.
    Gram-Schmidt against the equality rows first keeps those intact and
    preserves seed order among the inequality rows.
    """
    if not candidates:
        return []
    n = G.shape[1]
    basis = []
    for row in A_eq:
        q = row.copy()
        for b in basis:
            q -= (q @ b) * b
        norm = np.linalg.norm(q)
        if norm > 1e-12:
            basis.append(q / norm)
    keep = []
    for idx in candidates:
        q = G[idx].astype(float, copy=True)
        scale = np.linalg.norm(q)
        for b in basis:
            q -= (q @ b) * b
        norm = np.linalg.norm(q)
        if norm > 1e-9 * max(scale, 1.0):
            basis.append(q / norm)
            keep.append(idx)
        if len(basis) >= n:
            break
    return keep


@dataclass
class QpResult:
    x: np.ndarray
    active: list
    lam: np.ndarray           # inequality multipliers, aligned with `active`
    lam_eq: np.ndarray
    iterations: int
    converged: bool
    kkt_residual: float


def kkt_residual(H, g, G, h, x, active, lam, A_eq=None, b_eq=None, lam_eq=None) -> float:
    """Infinity-norm stationarity + feasibility + complementarity residual."""
    grad = H @ x + g
    if A_eq is not None and A_eq.shape[0]:
        grad = grad + A_eq.T @ lam_eq
    if len(active):
        grad = grad + G[active].T @ lam
    res = float(np.max(np.abs(grad)))
    if A_eq is not None and A_eq.shape[0]:
        res = max(res, float(np.max(np.abs(A_eq @ x - b_eq))))
    if G.shape[0]:
        res = max(res, float(np.max(G @ x - h, initial=0.0)))
    if len(active):
        res = max(res, float(np.max(-lam, initial=0.0)))
        res = max(res, float(np.max(np.abs(lam * (G[active] @ x - h[active])), initial=0.0)))
    return res


def solve_qp(H: np.ndarray, g: np.ndarray, G: np.ndarray, h: np.ndarray,
             A_eq: np.ndarray | None = None, b_eq: np.ndarray | None = None,
             x0: np.ndarray | None = None, working_set=None,
             max_iter: int = 500, tol: float = 1e-10) -> QpResult:
    """Primal active-set iteration from a feasible start.

    ``x0`` must satisfy the equalities and Gx0 <= h (within tolerance);
    defaults to the origin. ``working_set`` seeds the inequality active set
    for warm starting.
    """
    n = H.shape[0]
    G = np.asarray(G, dtype=float).reshape(-1, n)
    h = np.asarray(h, dtype=float).reshape(-1)
    if A_eq is None:
        A_eq = np.zeros((0, n))
        b_eq = np.zeros(0)
    else:
        A_eq = np.asarray(A_eq, dtype=float).reshape(-1, n)
        b_eq = np.asarray(b_eq, dtype=float).reshape(-1)
    m_eq = A_eq.shape[0]

    x = np.zeros(n) if x0 is None else np.array(x0, dtype=float)
    if G.shape[0] and np.any(G @ x > h + 1e-8):
        raise ValueError("solve_qp requires a feasible starting point")
    if m_eq and np.max(np.abs(A_eq @ x - b_eq), initial=0.0) > 1e-7:
        raise ValueError("solve_qp starting point violates equality constraints")

    if working_set is None:
        active = [] if not G.shape[0] else list(np.flatnonzero(G @ x > h - 1e-12))
    else:
        active = [i for i in working_set if G[i] @ x > h[i] - 1e-9]
    active = _independent_subset(A_eq, G, active)

    lam = np.zeros(len(active))
    lam_eq = np.zeros(m_eq)
    for it in range(1, max_iter + 1):
        # Minimizer of the objective restricted to the current working set,
        # solved directly (not as a homogeneous step from x) so active
        # constraints are re-satisfied exactly; one round of iterative
        # refinement counters the conditioning of the condensed horizon.
        m = len(active)
        rows = np.vstack([A_eq, G[active]]) if (m_eq or m) else np.zeros((0, n))
        k = rows.shape[0]
        kkt = np.block([[H, rows.T], [rows, np.zeros((k, k))]])
        rhs = np.concatenate([-g, b_eq, h[active]])
        try:
            sol = np.linalg.solve(kkt, rhs)
            sol += np.linalg.solve(kkt, rhs - kkt @ sol)
        except np.linalg.LinAlgError:
            sol = np.linalg.lstsq(kkt, rhs, rcond=None)[0]
        x_star = sol[:n]
        lam_eq = sol[n:n + m_eq]
        lam = sol[n + m_eq:]
        p = x_star - x

        # Step length limited by the nearest blocking inactive constraint.
        alpha = 1.0
        blocker = -1
        if G.shape[0] and np.max(np.abs(p), initial=0.0) > tol:
            Gp = G @ p
            slack = h - G @ x
            mask = Gp > tol
            if active:
                mask[active] = False
            if np.any(mask):
                ratios = np.maximum(slack[mask], 0.0) / Gp[mask]
                j = int(np.argmin(ratios))
                if ratios[j] < alpha:
                    alpha = float(ratios[j])
                    blocker = int(np.flatnonzero(mask)[j])
        if blocker >= 0:
            x = x + alpha * p
            active.append(blocker)
            continue

        # Full step reaches the subspace minimizer: optimal iff no working
        # constraint wants to release.
        x = x_star
        if m == 0 or np.min(lam) >= -tol:
            return QpResult(x, active, lam, lam_eq, it, True,
                            kkt_residual(H, g, G, h, x, active, lam, A_eq, b_eq, lam_eq))
        active.pop(int(np.argmin(lam)))

    lam = lam if len(lam) == len(active) else np.zeros(len(active))
    return QpResult(x, active, lam, lam_eq, max_iter, False,
                    kkt_residual(H, g, G, h, x, active, lam, A_eq, b_eq, lam_eq))
