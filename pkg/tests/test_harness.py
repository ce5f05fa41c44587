from __future__ import annotations

import json

import numpy as np
import pytest

from argmaxlab.errors import DesignError
from argmaxlab.estimators import BreakDesign, ToyModelDesign
from argmaxlab.harness import (
    REPORT_SCHEMA,
    MCReport,
    product_with_full_space,
    run_corollary1,
    run_corollary2,
    run_corollary3,
    run_limit_sample,
    run_pk_check,
    run_value_convergence,
    self_consistency,
    two_rate_contrast,
)
from argmaxlab.processes import GaussianSpec
from argmaxlab.sets import linearized_boundary_set

SMALL = dict(reps=150, limit_N=3000, seed=20261016)


# --- reports ----------------------------------------------------------------------


def test_report_rules_and_json(tmp_path):
    rep = MCReport("demo", 1, 10, 20)
    rep.check("small", 0.01, 0.05)
    rep.check("big", 0.5, 0.9, ">=")
    assert not rep.passed and rep.rule("small").passed
    ks = rep.compare("x", [0.0, 1.0], [0.5])
    assert ks == 0.5
    rep.diagnostics["flag"] = np.bool_(True)
    rep.diagnostics["inf"] = float("inf")
    d = json.loads(rep.to_json())
    assert d["schema"] == REPORT_SCHEMA and d["passed"] is False
    assert d["rules"]["big"]["passed"] is False and d["diagnostics"]["inf"] == "inf"
    paths = rep.write(tmp_path)
    assert sorted(p.name for p in paths) == sorted(
        ["report.json", "x_finite.csv", "x_finite_ecdf.csv", "x_limit.csv", "x_limit_ecdf.csv"]
    )
    assert any("FAIL" in line for line in rep.summary_lines())


def test_compare_quantizes_roundoff():
    rep = MCReport("demo", 1, 1, 1)
    assert rep.compare("x", [0.1 + 0.2], [0.3]) == 0.0


# --- break experiments --------------------------------------------------------------


def test_interior_break_small_run_has_expected_rules():
    rep = run_corollary1(BreakDesign(500), C=10.0, **SMALL)
    names = {r.name for r in rep.rules}
    assert {"ks_argmax", "saturation", "symmetry_finite", "symmetry_limit"} <= names
    assert rep.samples["argmax_finite"].size == 150 and rep.samples["argmax_limit"].size == 3000


def test_break_run_thread_count_does_not_change_output():
    d = BreakDesign(400)
    a = run_corollary1(d, C=10.0, threads=1, **SMALL)
    b = run_corollary1(d, C=10.0, threads=4, **SMALL)
    for k in a.samples:
        assert np.array_equal(a.samples[k], b.samples[k])
    assert a.ks == b.ks


def test_edge_break_hard_invariants():
    d = BreakDesign(500, tau=None, a=-1.0)
    rep = run_corollary1(d, C=10.0, **SMALL)
    assert rep.rule("limit_max_minus_a").passed
    assert rep.rule("finite_max_minus_upper").passed
    assert np.all(rep.samples["argmax_limit"] <= -1.0)
    assert np.all(rep.samples["argmax_finite"] <= d.s_upper + 1e-12)


def test_value_convergence_break_limit_sup_below_free():
    rep = run_value_convergence(BreakDesign(500, tau=None, a=1.0), C=10.0, **SMALL)
    assert "ks_sup" in rep.ks or "sup" in rep.ks
    assert rep.diagnostics["limit_sup_above_free"] == 0


def test_value_convergence_toy_families():
    b = ToyModelDesign("boundary", 500, A=[[-1.0]])
    w = ToyModelDesign("weakid", 500, beta=0.5, pi2=10.0)
    for d in (b, w):
        rep = run_value_convergence(d, **SMALL)
        assert rep.samples["sup_finite"].size == 150
    with pytest.raises(DesignError):
        run_value_convergence(object(), **SMALL)


# --- boundary and weak-id experiments --------------------------------------------------


def test_boundary_single_constraint_oracle_rules():
    rep = run_corollary2(ToyModelDesign("boundary", 500, A=[[-1.0]], drift=(1.0,)), **SMALL)
    assert rep.diagnostics["boundary_fraction_oracle"] == pytest.approx(0.158655, abs=1e-5)
    assert rep.rule("max_constraint_value").passed
    assert "boundary_fraction_limit_error" in {r.name for r in rep.rules}


def test_boundary_run_rejects_weakid_design():
    with pytest.raises(DesignError):
        run_corollary2(ToyModelDesign("weakid", 100), **SMALL)


@pytest.mark.parametrize("regime", ["weak", "semistrong"])
def test_weakid_run_invariants(regime):
    beta = 0.5 if regime == "weak" else 1.0
    pi2 = 10.0 if regime == "weak" else 0.5
    rep = run_corollary3(ToyModelDesign("weakid", 1000, regime=regime, beta=beta, pi2=pi2), **SMALL)
    assert rep.rule("min_beta_hat").passed and rep.rule("max_beta_minus_pi2").passed
    assert set(rep.ks) == {"beta", "h_pi1", "h_pi2"}


def test_product_with_full_space():
    B = linearized_boundary_set([-1.0, -np.inf], [[-1.0], [1.0]])
    P = product_with_full_space(B, 2)
    assert P.dim == 3 and P.contains([-1.0, 100.0, -100.0]) and not P.contains([-1.5, 0.0, 0.0])


def test_two_rate_contrast_semistrong_shrinks():
    d = ToyModelDesign("weakid", 1000, regime="semistrong", beta=1.0, pi2=0.5)
    rc = two_rate_contrast(d, (1000, 4000), 400, 5)
    assert rc.expected_ratio == pytest.approx(4 ** (1 / 3))
    assert rc.passed


def test_two_rate_contrast_weak_does_not_shrink():
    d = ToyModelDesign("weakid", 1000, regime="weak", beta=0.5, pi2=10.0)
    rc = two_rate_contrast(d, (1000, 4000), 400, 6)
    assert rc.passed and 0.8 <= rc.observed_ratio <= 1.25


# --- limit sampler and set checks ------------------------------------------------------


def test_run_limit_sample_and_self_consistency():
    spec = GaussianSpec.identity([1.0, 1.0])
    rep = run_limit_sample(spec, 1.0, 4000, 3)
    assert rep.rule("saturation").passed and rep.diagnostics["mode_count"] >= 1
    assert self_consistency(spec, None, 4000, (1, 2)) <= 1.63 * np.sqrt(2 / 4000)


@pytest.mark.parametrize("family", ["remark3", "lemma2a", "lemma2b", "constant"])
def test_pk_check_families_pass(family):
    rep = run_pk_check(family)
    assert rep.passed, rep.summary_lines()


def test_pk_check_two_point_family_reports_sets():
    rep = run_pk_check("remark3")
    assert rep.diagnostics["limit"] == "{0, 1}"
    assert rep.diagnostics["limit_F"] == "{0}"
    assert rep.diagnostics["limit_then_F"] == "{0, 1}"


def test_pk_check_unknown_family():
    with pytest.raises(DesignError):
        run_pk_check("nope")
