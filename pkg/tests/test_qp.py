import numpy as np
import pytest

from apfnav.qp import solve_qp

from oracles import enumerate_qp, qp_cost


def random_instance(rng, n, m):
    M = rng.normal(size=(n, n))
    H = M @ M.T + n * np.eye(n)
    g = rng.normal(size=n)
    G = rng.normal(size=(m, n))
    h = rng.uniform(0.1, 2.0, size=m)  # origin strictly feasible
    return H, g, G, h


class TestSolveQp:
    def test_unconstrained_matches_linear_solve(self):
        rng = np.random.default_rng(0)
        H, g, _, _ = random_instance(rng, 4, 0)
        res = solve_qp(H, g, np.zeros((0, 4)), np.zeros(0))
        np.testing.assert_allclose(res.x, np.linalg.solve(H, -g), atol=1e-10)
        assert res.converged

    def test_inactive_constraints_do_not_bind(self):
        H = np.eye(2)
        g = np.array([-1.0, 0.0])
        res = solve_qp(H, g, np.array([[1.0, 0.0]]), np.array([5.0]))
        np.testing.assert_allclose(res.x, [1.0, 0.0], atol=1e-10)
        assert res.active == []

    def test_single_active_bound(self):
        H = np.eye(2)
        g = np.array([-3.0, 0.0])
        res = solve_qp(H, g, np.array([[1.0, 0.0]]), np.array([1.0]))
        np.testing.assert_allclose(res.x, [1.0, 0.0], atol=1e-10)
        assert res.active == [0]
        assert res.lam[0] > 0

    def test_equality_constraint(self):
        H = np.eye(2)
        g = np.zeros(2)
        A = np.array([[1.0, 1.0]])
        b = np.array([2.0])
        res = solve_qp(H, g, np.zeros((0, 2)), np.zeros(0), A_eq=A, b_eq=b,
                       x0=np.array([2.0, 0.0]))
        np.testing.assert_allclose(res.x, [1.0, 1.0], atol=1e-10)

    def test_equality_plus_inequality(self):
        # min x^2 + y^2 s.t. x + y = 2, x <= 0.5  ->  x = 0.5, y = 1.5.
        H = 2 * np.eye(2)
        res = solve_qp(H, np.zeros(2), np.array([[1.0, 0.0]]), np.array([0.5]),
                       A_eq=np.array([[1.0, 1.0]]), b_eq=np.array([2.0]),
                       x0=np.array([0.5, 1.5]))
        np.testing.assert_allclose(res.x, [0.5, 1.5], atol=1e-9)

    def test_infeasible_start_rejected(self):
        H = np.eye(2)
        with pytest.raises(ValueError):
            solve_qp(H, np.zeros(2), np.array([[1.0, 0.0]]), np.array([-1.0]))
        with pytest.raises(ValueError):
            solve_qp(H, np.zeros(2), np.zeros((0, 2)), np.zeros(0),
                     A_eq=np.array([[1.0, 0.0]]), b_eq=np.array([3.0]))

    def test_matches_enumeration_oracle(self):
        rng = np.random.default_rng(7)
        for _ in range(200):
            n = int(rng.integers(2, 6))
            m = int(rng.integers(1, 9))
            H, g, G, h = random_instance(rng, n, m)
            res = solve_qp(H, g, G, h)
            x_star, cost_star = enumerate_qp(H, g, G, h)
            assert res.converged
            assert np.all(G @ res.x <= h + 1e-8)
            assert qp_cost(H, g, res.x) <= cost_star + 1e-7

    def test_warm_start_reaches_same_solution(self):
        rng = np.random.default_rng(8)
        H, g, G, h = random_instance(rng, 5, 10)
        cold = solve_qp(H, g, G, h)
        warm = solve_qp(H, g, G, h, working_set=cold.active)
        np.testing.assert_allclose(warm.x, cold.x, atol=1e-8)

    def test_redundant_seed_rows_pruned(self):
        # Duplicate rows in the seeded working set must not make the KKT
        # system singular.
        H = np.eye(2)
        g = np.array([-3.0, -3.0])
        G = np.array([[1.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
        h = np.array([0.0, 0.0, 0.0])
        res = solve_qp(H, g, G, h, x0=np.zeros(2), working_set=[0, 1, 2])
        np.testing.assert_allclose(res.x, [0.0, 0.0], atol=1e-10)
        assert res.converged

    def test_kkt_residual_small(self):
        rng = np.random.default_rng(9)
        for _ in range(50):
            H, g, G, h = random_instance(rng, 5, 8)
            res = solve_qp(H, g, G, h)
            assert res.kkt_residual < 1e-8
