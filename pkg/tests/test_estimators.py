from __future__ import annotations

import json
import math

import numpy as np
import pytest
from scipy.optimize import lsq_linear

from argmaxlab.errors import DesignError, GridRangeError, SingularDesignError
from argmaxlab.estimators import (
    BreakDesign,
    ToyModelDesign,
    break_profile,
    design_hash,
    estimate_break,
    fit_boundary_model,
    fit_weakid_model,
    localized_break_objective,
    simulate_break_data,
    simulate_toy_data,
    v_t_objective,
    weakid_limit_sets,
)
from argmaxlab.seeding import derive_seed
from argmaxlab.sets import FEAS_TOL


def _step_design(T=200, tau=0.5):
    # x_t = 1, β = 0, δ_T = 1 and no noise: y_t = 1{t > k0}
    d = BreakDesign(T, beta=(0.0,), delta0=(1.0,), tau=tau, x_dist="constant", x_mean=(1.0,), sigma=0.0)
    return d.replace(delta0=(1.0 / d.vT,))


def _ssr_direct(data, k):
    X = data.X
    Z = X * (np.arange(1, data.T + 1) > k)[:, None]
    W = np.hstack([X, Z])
    r = data.y - W @ np.linalg.lstsq(W, data.y, rcond=None)[0]
    return float(r @ r)


# --- break design -----------------------------------------------------------------


def test_break_design_validation():
    with pytest.raises(DesignError):
        BreakDesign(500, delta0=(0.0, 0.0))
    with pytest.raises(DesignError, match="lambda1"):
        BreakDesign(500, lambda1=0.9, lambda2=0.1)
    with pytest.raises(DesignError):
        BreakDesign(500, kappa=0.5)
    with pytest.raises(DesignError):
        BreakDesign(500, tau=0.5, a=1.0)
    with pytest.raises(DesignError):
        BreakDesign(500, tau=0.9)


def test_break_design_quantities():
    d = BreakDesign(2000)
    assert d.vT == pytest.approx(2000**-0.25)
    assert d.k0 == 1000 and d.regime == "1a" and d.limit_constraint is None
    b = BreakDesign(2000, tau=None, a=-1.0)
    assert b.k0 == math.floor(0.85 * 2000 + 2000**0.5)
    assert b.k0 > b.Lambda_T[-1] and b.s_upper < 0
    assert b.limit_constraint == -1.0
    spec = d.limit_spec()
    assert np.allclose(spec.Q1, np.eye(2)) and np.allclose(spec.Omega2, np.eye(2))


def test_noiseless_step_data():
    d = _step_design()
    data = simulate_break_data(d)
    assert np.allclose(data.y, (np.arange(1, 201) > d.k0).astype(float))


def test_default_design_moments():
    d = BreakDesign(4000, tau=0.5)
    data = simulate_break_data(d, 3)
    n = data.T
    X = data.X
    assert np.all(np.abs(X.mean(axis=0)) <= 5 / math.sqrt(n))
    assert np.all(np.abs(X.var(axis=0) - 1) <= 5 * math.sqrt(2 / n))
    resid = data.y - X @ np.asarray(d.beta) - (np.arange(1, n + 1) > d.k0)[:, None] * X @ d.delta_T
    assert abs(resid.mean()) <= 5 / math.sqrt(n)
    assert abs(resid.var() - 1) <= 5 * math.sqrt(2 / n)


def test_break_data_reproducible_and_csv(tmp_path):
    d = BreakDesign(300)
    a, b = simulate_break_data(d, 9), simulate_break_data(d, 9)
    assert np.array_equal(a.y, b.y)
    a.to_csv(tmp_path / "d.csv")
    lines = (tmp_path / "d.csv").read_text().splitlines()
    assert lines[0] == "t,y,x1,x2" and len(lines) == 301


# --- V_T and the profile ------------------------------------------------------------


def test_v_t_nonnegative_and_matches_profile():
    d = BreakDesign(300)
    data = simulate_break_data(d, 1)
    ks = d.Lambda_T
    V, _ = break_profile(data, ks)
    assert np.all(V >= 0)
    direct = np.array([v_t_objective(int(k), data) for k in ks[::7]])
    assert np.allclose(direct, V[::7], rtol=1e-8, atol=1e-8)


def test_argmax_v_equals_argmin_ssr_on_random_datasets():
    for i in range(100):
        d = BreakDesign(150, seed=derive_seed(77, i))
        data = simulate_break_data(d)
        ks = d.Lambda_T
        V, SSR = break_profile(data, ks)
        ssr = np.array([_ssr_direct(data, int(k)) for k in ks])
        assert np.allclose(SSR, ssr, rtol=1e-9, atol=1e-8)
        assert int(np.argmax(V)) == int(np.argmin(ssr))


def test_noiseless_step_separates_true_date():
    d = _step_design()
    data = simulate_break_data(d)
    ks = d.Lambda_T
    V, _ = break_profile(data, ks)
    j0 = int(np.flatnonzero(ks == d.k0)[0])
    assert np.all(np.delete(V, j0) < V[j0])
    fit = estimate_break(data, d)
    assert fit.k_hat == d.k0 and fit.s_hat == 0.0 and not fit.tie_flag


def test_singular_design_names_k():
    d = BreakDesign(100, x_dist="constant", x_mean=(1.0, 1.0))
    data = simulate_break_data(d)
    with pytest.raises(SingularDesignError) as exc:
        v_t_objective(50, data)
    assert exc.value.k == 50
    with pytest.raises(SingularDesignError):
        break_profile(data, [50])


def test_estimate_break_respects_trimming():
    for a in (-1.0, 1.0):
        d = BreakDesign(500, tau=None, a=a)
        for i in range(20):
            fit = estimate_break(simulate_break_data(d, derive_seed(5, i)), d)
            assert d.Lambda_T[0] <= fit.k_hat <= d.Lambda_T[-1]
            assert fit.s_hat <= d.s_upper + 1e-12


def test_fit_record_is_json():
    d = BreakDesign(300)
    fit = estimate_break(simulate_break_data(d, 2), d)
    rec = json.loads(json.dumps(fit.to_record(d)))
    assert set(rec) == {"k_hat", "s_hat", "seed", "design_hash"}
    assert rec["design_hash"] == design_hash(d) != design_hash(d.replace(T=301))


def test_localized_objective_basics():
    d = _step_design(T=400)
    data = simulate_break_data(d)
    s = np.linspace(-2.0, 2.0, 41)
    M = localized_break_objective(data, d, s)
    assert M.values[M.grid == 0.0][0] == 0.0
    assert np.all(M.values[s != 0.0] < 0)
    with pytest.raises(GridRangeError) as exc:
        localized_break_objective(data, d, [-100.0, 0.0, 1.0])
    assert list(exc.value.clipped) == [-100.0]


def test_localized_objective_drift():
    # E M_T(s) = -|s| δ0'Q1δ0 = -2|s| on the left branch
    d = BreakDesign(5000)
    s = -1.0
    vals = np.array(
        [localized_break_objective(simulate_break_data(d, derive_seed(6, i)), d, [s]).values[0] for i in range(1000)]
    )
    se = vals.std(ddof=1) / math.sqrt(vals.size)
    assert abs(vals.mean() - (-2.0)) <= 5 * se


def test_localized_rate_is_stable_in_T():
    medians = []
    for T in (1000, 2000, 4000):
        d = BreakDesign(T)
        s = [abs(estimate_break(simulate_break_data(d, derive_seed(T, i)), d).s_hat) for i in range(300)]
        medians.append(float(np.median(s)))
    assert max(medians) <= 2 * min(medians)
    assert max(medians) <= 2.0


# --- boundary toy model ---------------------------------------------------------------


def test_boundary_design_validation():
    with pytest.raises(DesignError):
        ToyModelDesign("boundary", 100, A=[[-1.0]], theta0=(-1.0,))
    with pytest.raises(DesignError):
        ToyModelDesign("boundary", 100, A=[[-1.0]], drift=(-1.0,))
    with pytest.raises(DesignError):
        ToyModelDesign("boundary", 100)


def test_boundary_fit_matches_bounded_least_squares():
    d = ToyModelDesign("boundary", 300, A=[[-1.0, 0.0], [0.0, -1.0]], drift=(0.5, 0.0))
    for i in range(50):
        data = simulate_toy_data(d, derive_seed(8, i))
        fit = fit_boundary_model(d, data=data)
        ref = lsq_linear(data.X, data.y, bounds=(0.0, np.inf), tol=1e-12, method="bvls").x
        assert np.allclose(fit.theta_hat, ref, atol=1e-8)


def test_boundary_h_nonnegative_at_boundary():
    d = ToyModelDesign("boundary", 500, A=[[-1.0]])
    for i in range(200):
        fit = fit_boundary_model(d, derive_seed(9, i))
        assert fit.h[0] >= 0.0
        assert np.all(d.g_values(fit.theta_hat) <= FEAS_TOL)


def test_boundary_interior_matches_unconstrained():
    d = ToyModelDesign("boundary", 2000, A=[[-1.0, 0.0]], theta0=(1.0, 0.0))
    same = 0
    for i in range(200):
        data = simulate_toy_data(d, derive_seed(10, i))
        ols = np.linalg.lstsq(data.X, data.y, rcond=None)[0]
        same += np.allclose(fit_boundary_model(d, data=data).theta_hat, ols, atol=1e-10)
    assert same >= 0.99 * 200


def test_boundary_limit_set():
    d = ToyModelDesign("boundary", 100, A=[[1.0, 1.0], [-1.0, 0.0]], g0=(0.0, -5.0), drift=(-0.5, -0.5))
    P = d.boundary_limit_set()
    assert P.n_active == 1 and float(P.b_active[0]) == pytest.approx(-1.0)


# --- weak-id toy model --------------------------------------------------------------


def _oracle_weakid(data, betas):
    """Grid over β; for each β a bounded least-squares solve in (π1, π2 >= β)."""
    X, y = data.X, data.y
    best = (math.inf, None, None)
    for b in betas:
        A = np.column_stack([X[:, 0] + b * X[:, 1], X[:, 2]])
        res = lsq_linear(A, y, bounds=([-np.inf, b], [np.inf, np.inf]), method="bvls", tol=1e-12)
        ssr = float(np.sum(np.square(A @ res.x - y)))
        if ssr < best[0]:
            best = (ssr, b, res.x)
    return best


def test_weakid_fit_matches_bounded_ls_oracle():
    d = ToyModelDesign("weakid", 400, c=1.0, beta=0.5, pi2=1.0, regime="weak")
    betas = np.linspace(0.0, 6.0, 1201)
    for i in range(8):
        data = simulate_toy_data(d, derive_seed(12, i))
        fit = fit_weakid_model(d, data=data)
        ssr, b, _ = _oracle_weakid(data, betas[betas <= 6.0])
        assert fit.ssr <= ssr + 1e-9
        assert 0.0 <= fit.beta_hat <= fit.pi_hat[1] + 1e-12


def test_weakid_noiseless_strong_identification():
    d = ToyModelDesign("weakid", 500, sigma=0.0, c=2.0 * math.sqrt(500), beta=0.3, pi2=0.8, regime="weak")
    fit = fit_weakid_model(d)
    assert fit.beta_hat == pytest.approx(0.3, abs=1e-7)
    assert np.allclose(fit.pi_hat, d.pi_n, atol=1e-7)


def test_weakid_draws_feasible_and_reproducible():
    for regime in ("weak", "semistrong"):
        d = ToyModelDesign("weakid", 1000, regime=regime, beta=0.5 if regime == "weak" else 1.0, pi2=10.0)
        for i in range(50):
            fit = fit_weakid_model(d, derive_seed(13, i))
            assert 0.0 <= fit.beta_hat <= fit.pi_hat[1]
        a, b = fit_weakid_model(d, 3), fit_weakid_model(d, 3)
        assert np.array_equal(a.weak, b.weak) and np.array_equal(a.semistrong, b.semistrong)


def test_weakid_rescalings():
    d = ToyModelDesign("weakid", 1000, regime="semistrong", beta=1.0, pi2=0.5)
    fit = fit_weakid_model(d, 4)
    assert fit.semistrong[0] == pytest.approx(d.a_n * (fit.beta_hat - d.beta_n))
    assert np.allclose(fit.weak[1:], math.sqrt(1000) * (fit.pi_hat - d.pi_n))
    assert d.a_n == pytest.approx(10.0) and d.beta_n == pytest.approx(0.1)


def test_weakid_limit_sets_by_regime():
    weak = weakid_limit_sets(ToyModelDesign("weakid", 100, beta=0.5, pi2=10.0))
    assert weak.weak.contains([0.0]) and weak.weak.contains([10.0]) and not weak.weak.contains([10.5])
    ss = weakid_limit_sets(ToyModelDesign("weakid", 1000, regime="semistrong", beta=1.0, pi2=0.5))
    assert ss.semistrong.contains([-1.0]) and not ss.semistrong.contains([-1.01])
    assert ss.semistrong.contains([1e6])


def test_weakid_design_validation():
    with pytest.raises(DesignError):
        ToyModelDesign("weakid", 100, beta=2.0, pi2=1.0)
    with pytest.raises(DesignError):
        ToyModelDesign("weakid", 100, regime="strong")
    with pytest.raises(DesignError):
        ToyModelDesign("other", 100)
