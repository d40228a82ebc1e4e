"""Independent reference implementations used to check the library.

Everything here is deliberately brute-force and written against the math,
not against the library's code paths.
"""

from itertools import combinations

import numpy as np


def union_find_clusters(points: np.ndarray, tolerance: float) -> list[frozenset]:
    """Connected components of the pairwise distance <= tolerance graph."""
    pts = np.asarray(points, dtype=float)
    n = pts.shape[0]
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    diff = pts[:, None, :] - pts[None, :, :]
    dist = np.sqrt(np.sum(diff * diff, axis=2))
    for i in range(n):
        for j in range(i + 1, n):
            if dist[i, j] <= tolerance:
                ri, rj = find(i), find(j)
                if ri != rj:
                    parent[ri] = rj
    groups = {}
    for i in range(n):
        groups.setdefault(find(i), set()).add(i)
    return [frozenset(g) for g in groups.values()]


def qp_cost(H, g, x) -> float:
    return float(0.5 * x @ H @ x + g @ x)


def enumerate_qp(H, g, G, h, tol: float = 1e-9):
    """Global minimizer of a strictly convex inequality-constrained QP.

    Enumerates every linearly independent active subset of at most n rows,
    solves the corresponding equality problem, keeps primal-feasible
    candidates, and returns the cheapest. Exponential — tiny instances only.
    """
    n = H.shape[0]
    G = np.asarray(G, dtype=float).reshape(-1, n)
    h = np.asarray(h, dtype=float).reshape(-1)
    m = G.shape[0]
    best_x, best_cost = None, np.inf
    for size in range(min(n, m) + 1):
        for rows in combinations(range(m), size):
            A = G[list(rows)]
            if size and np.linalg.matrix_rank(A) < size:
                continue
            k = size
            kkt = np.block([[H, A.T], [A, np.zeros((k, k))]]) if k else H
            rhs = np.concatenate([-g, h[list(rows)]]) if k else -g
            try:
                sol = np.linalg.solve(kkt, rhs)
            except np.linalg.LinAlgError:
                continue
            x = sol[:n]
            if np.all(G @ x <= h + tol):
                c = qp_cost(H, g, x)
                if c < best_cost - 1e-15:
                    best_cost, best_x = c, x
    return best_x, best_cost


def condense_horizon(A, B, N):
    """Prediction matrices by direct accumulation: X = Psi x0 + Phi U."""
    nx = A.shape[0]
    Psi = np.zeros((N * nx, nx))
    Phi = np.zeros((N * nx, N))
    Ak = np.eye(nx)
    for i in range(N):
        Ak = A @ Ak
        Psi[i * nx:(i + 1) * nx] = Ak
    for i in range(N):
        for j in range(i + 1):
            # Effect of input j on state i+1: A^(i-j) B.
            M = np.eye(nx)
            for _ in range(i - j):
                M = A @ M
            Phi[i * nx:(i + 1) * nx, j] = M @ B
    return Psi, Phi


def horizon_qp(A, B, N, q_weights, p_weight, x0, refs):
    """Dense (H, g, const) of the tracking objective over the input sequence."""
    Psi, Phi = condense_horizon(A, B, N)
    Qbar = np.diag(np.tile(np.asarray(q_weights, dtype=float), N))
    e0 = Psi @ x0 - np.asarray(refs, dtype=float).reshape(-1)
    H = 2.0 * (Phi.T @ Qbar @ Phi + p_weight * np.eye(N))
    g = 2.0 * Phi.T @ Qbar @ e0
    const = float(e0 @ Qbar @ e0)
    return H, g, const


def horizon_cost(A, B, N, q_weights, p_weight, x0, refs, u) -> float:
    """Objective value by explicit forward simulation."""
    q = np.asarray(q_weights, dtype=float)
    x = np.asarray(x0, dtype=float).copy()
    total = 0.0
    for k in range(N):
        x = A @ x + B * u[k]
        e = x - refs[k]
        total += float(e @ (q * e)) + p_weight * float(u[k] ** 2)
    return total


def state_bound_rows(A, B, N, v_max, a_max, j_max, u_max):
    """(G, h_of_x0) for |v|,|a|,|j| caps at every step plus input caps."""
    Psi, Phi = condense_horizon(A, B, N)
    sel = np.zeros((3 * N, 4 * N))
    for i in range(N):
        for s in range(3):
            sel[3 * i + s, 4 * i + 1 + s] = 1.0
    S_Phi = sel @ Phi
    S_Psi = sel @ Psi
    b = np.tile([v_max, a_max, j_max], N)
    G = np.vstack([S_Phi, -S_Phi, np.eye(N), -np.eye(N)])

    def h_of(x0):
        free = S_Psi @ np.asarray(x0, dtype=float)
        u_cap = np.full(N, u_max)
        return np.concatenate([b - free, b + free, u_cap, u_cap])

    return G, h_of
