from __future__ import annotations

import numpy as np
import pytest

from argmaxlab.errors import InfeasibleError, IterationLimitError
from argmaxlab.qp import KKT_TOL, kkt_residuals, maximize_quadratic, maximize_quadratic_batch

from oracles import grid_argmax, random_qp


def test_unconstrained_optimum_returned_when_feasible():
    V = np.array([[2.0, 0.5], [0.5, 1.0]])
    Z = np.array([1.0, -1.0])
    res = maximize_quadratic(V, Z, [[1.0, 0.0]], [-10.0])
    assert np.allclose(res.h, np.linalg.solve(V, Z))
    assert res.active == ()


def test_projection_onto_orthant():
    res = maximize_quadratic(np.eye(2), [-1.0, -2.0], -np.eye(2), [0.0, 0.0])
    assert np.allclose(res.h, [0.0, 0.0], atol=1e-12)
    assert res.active == (0, 1)
    assert np.allclose(res.multipliers, [1.0, 2.0])


def test_kkt_certificate_on_random_instances():
    rng = np.random.default_rng(3)
    for _ in range(300):
        V, Z, G, b = random_qp(rng)
        res = maximize_quadratic(V, Z, G, b)
        assert res.stationarity <= KKT_TOL
        assert res.complementarity <= KKT_TOL
        assert res.primal_violation <= 1e-9
        assert np.all(res.multipliers >= 0)


def test_matches_grid_oracle():
    rng = np.random.default_rng(5)
    for _ in range(1000):
        V, Z, G, b = random_qp(rng)
        h = maximize_quadratic(V, Z, G, b).h
        assert np.max(np.abs(h - grid_argmax(V, Z, G, b))) <= 2e-3


def test_infeasible_polyhedron_raises():
    # x <= -1 and -x <= -1
    with pytest.raises(InfeasibleError):
        maximize_quadratic(np.eye(1), [0.0], [[1.0], [-1.0]], [1.0, 1.0])


def test_iteration_cap_raises_with_diagnostics():
    with pytest.raises(IterationLimitError) as exc:
        maximize_quadratic(np.eye(2), [-1.0, -2.0], -np.eye(2), [0.0, 0.0], x0=[1.0, 1.0], max_iter=1)
    assert "working_set" in exc.value.diagnostics


def test_deterministic_output():
    rng = np.random.default_rng(9)
    V, Z, G, b = random_qp(rng, 3, 4)
    r1, r2 = maximize_quadratic(V, Z, G, b), maximize_quadratic(V, Z, G, b)
    assert np.array_equal(r1.h, r2.h) and r1.active == r2.active


def test_batch_agrees_with_sequential():
    rng = np.random.default_rng(13)
    for _ in range(20):
        V, _, G, b = random_qp(rng, 3, 4)
        Zs = rng.normal(scale=2.0, size=(200, 3))
        H, act, mu = maximize_quadratic_batch(V, Zs, G, b)
        for i in range(0, 200, 17):
            ref = maximize_quadratic(V, Zs[i], G, b)
            assert np.allclose(H[i], ref.h, atol=1e-9)
            stat, comp, viol = kkt_residuals(V, Zs[i], G, b, H[i], mu[i])
            assert stat <= KKT_TOL and comp <= KKT_TOL and viol <= 1e-9


def test_constrained_value_never_exceeds_free_value():
    rng = np.random.default_rng(17)
    for _ in range(200):
        V, Z, G, b = random_qp(rng)
        h = maximize_quadratic(V, Z, G, b).h
        free = np.linalg.solve(V, Z)
        f = lambda x: x @ Z - 0.5 * x @ V @ x  # noqa: E731
        assert f(h) <= f(free) + 1e-12
