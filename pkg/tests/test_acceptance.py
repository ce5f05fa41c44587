"""Acceptance suite: one test per criterion, each logging a PASS/FAIL line.

Designs come from the shipped configs so the CLI and this suite run the
same experiments.  Verdict lines are printed in the terminal summary.
"""

from __future__ import annotations

import time
from pathlib import Path

import numpy as np
import pytest

from argmaxlab.cli import EXIT_CONFIG, build_design, main
from argmaxlab.config import load_config
from argmaxlab.empirical import EmpiricalDist, ks_distance, quantize
from argmaxlab.harness import (
    run_corollary1,
    run_corollary2,
    run_corollary3,
    run_pk_check,
    run_value_convergence,
    two_rate_contrast,
)
from argmaxlab.processes import PathSample, argmax_over, sample_limit_argmax
from argmaxlab.qp import maximize_quadratic
from argmaxlab.seeding import substream
from argmaxlab.sets import sup_difference_gap

from oracles import grid_argmax, random_qp
from verdicts import record

pytestmark = pytest.mark.acceptance

CONFIGS = Path(__file__).resolve().parents[1] / "configs"
_LIMITS: dict[str, object] = {}


def _cfg(name):
    return load_config(CONFIGS / f"{name}.json")


def _limit(name):
    """Limit argmax sample for a break config, shared across criteria."""
    if name not in _LIMITS:
        cfg = _cfg(name)
        d = build_design(cfg)
        p = cfg.params
        _LIMITS[name] = sample_limit_argmax(
            d.limit_spec(), d.limit_constraint, cfg.limit_draws, p["C"], p["step"], substream(cfg.seed, "limit")
        )
    return _LIMITS[name]


def _run_break(name):
    cfg = _cfg(name)
    d = build_design(cfg)
    return d, run_corollary1(d, cfg.reps, cfg.limit_draws, cfg.seed, limit=_limit(name))


# --- 1, 2: set limits -------------------------------------------------------------------


def test_criterion_01_two_point_counterexample():
    t0 = time.perf_counter()
    rep = run_pk_check("remark3")
    elapsed = time.perf_counter() - t0
    lim = rep.diagnostics["limit_diagnostics"]
    limF = rep.diagnostics["F_limit_diagnostics"]
    dist = max(lim["limit_to_sequence"][-1], lim["sequence_to_limit"][-1])
    distF = max(limF["limit_to_sequence"][-1], limF["sequence_to_limit"][-1])
    ok = record(
        1,
        f"two-point limit {rep.diagnostics['limit']}, F-limit {rep.diagnostics['limit_F']}",
        [
            ("limit is {0, 1}", float(rep.diagnostics["limit"] == "{0, 1}"), 1, ">="),
            ("F-limit is {0}", float(rep.diagnostics["limit_F"] == "{0}"), 1, ">="),
            ("directed distance", dist, 1e-3, "<="),
            ("F directed distance", distF, 1e-3, "<="),
            ("runtime s", elapsed, 1.0, "<="),
        ],
    )
    assert ok


def test_criterion_02_break_set_limits():
    t0 = time.perf_counter()
    reps = [run_pk_check("lemma2a")] + [run_pk_check("lemma2b", a=a) for a in (-0.5, 0.0, 1.0)]
    elapsed = time.perf_counter() - t0
    assert reps[0].diagnostics["expected"].startswith("grid on [-3, 3]")
    checks = [("1(a) full grid", float(reps[0].passed), 1, ">=")]
    for a, r in zip((-0.5, 0.0, 1.0), reps[1:]):
        checks.append((f"1(b) a={a:g} boundary error", r.rule("hausdorff_to_expected").value, 0.01, "<="))
        checks.append((f"1(b) a={a:g} converged", r.rule("converged").value, 1, ">="))
    checks.append(("runtime s", elapsed, 10.0, "<="))
    assert record(2, "rescaled break sets, T up to 1e6", checks)


# --- 3, 4: break-date argmax ---------------------------------------------------------------


def test_criterion_03_interior_break():
    t0 = time.perf_counter()
    _, rep = _run_break("corollary1a")
    elapsed = time.perf_counter() - t0
    ok = record(
        3,
        "interior break, T=2000",
        [
            ("KS argmax", rep.ks["argmax"], 0.08, "<="),
            ("symmetry finite", rep.rule("symmetry_finite").value, 0.05, "<="),
            ("symmetry limit", rep.rule("symmetry_limit").value, 0.05, "<="),
            ("runtime s", elapsed, 600.0, "<="),
        ],
    )
    assert ok, rep.summary_lines()


def test_criterion_04_edge_break():
    checks = []
    for name, a in (("corollary1b_a-1", -1.0), ("corollary1b_a1", 1.0)):
        d, rep = _run_break(name)
        fin, lim = rep.samples["argmax_finite"], rep.samples["argmax_limit"]
        checks.append((f"a={a:g} KS argmax", rep.ks["argmax"], 0.10, "<="))
        checks.append((f"a={a:g} limit share <= a", float(np.mean(lim <= a)), 1.0, ">="))
        checks.append((f"a={a:g} finite share <= upper", float(np.mean(fin <= d.s_upper)), 1.0, ">="))
        if a < 0:
            checks.append((f"a={a:g} finite share <= 0", float(np.mean(fin <= 0)), 0.99, ">="))
    assert record(4, "break at the trimming edge, T=2000", checks)


# --- 5, 6: boundary and weak identification ---------------------------------------------------


def test_criterion_05_boundary_designs():
    t0 = time.perf_counter()
    checks = []
    for name in ("corollary2_scalar_b0", "corollary2_scalar_b-1", "corollary2_2d_b0", "corollary2_2d_b-1"):
        cfg = _cfg(name)
        rep = run_corollary2(build_design(cfg), cfg.reps, cfg.limit_draws, cfg.seed)
        tag = name.removeprefix("corollary2_")
        for k, v in rep.ks.items():
            checks.append((f"{tag} KS {k}", v, 0.05, "<="))
        checks.append((f"{tag} max g", rep.rule("max_constraint_value").value, 1e-9, "<="))
        oracle = rep.diagnostics["boundary_fraction_oracle"]
        checks.append((f"{tag} boundary mass error", abs(rep.diagnostics["boundary_fraction_finite"] - oracle), 0.02, "<="))
    checks.append(("runtime s", time.perf_counter() - t0, 300.0, "<="))
    assert record(5, "boundary designs, n=2000", checks)


def test_criterion_06_weak_identification():
    checks = []
    for name in ("corollary3_weak", "corollary3_semistrong"):
        cfg = _cfg(name)
        d = build_design(cfg)
        rep = run_corollary3(d, None, cfg.reps, cfg.limit_draws, cfg.seed)
        reg = d.regime
        for k, v in rep.ks.items():
            checks.append((f"{reg} KS {k}", v, 0.10, "<="))
        checks.append((f"{reg} min beta", rep.rule("min_beta_hat").value, 0.0, ">="))
        checks.append((f"{reg} max beta - pi2", rep.rule("max_beta_minus_pi2").value, 0.0, "<="))
        rc = two_rate_contrast(d, tuple(cfg.params["rate_ns"]), cfg.params["rate_reps"], cfg.seed)
        checks.append((f"{reg} rate contrast holds", float(rc.passed), 1, ">="))
    assert record(6, "weak and semi-strong identification, n=4000", checks)


# --- 7: value convergence -------------------------------------------------------------------


def test_criterion_07_value_convergence():
    checks = []
    for name, lim_name in (
        ("value_break_1a", "corollary1a"),
        ("value_break_1b_a-1", "corollary1b_a-1"),
        ("value_break_1b_a1", "corollary1b_a1"),
    ):
        cfg = _cfg(name)
        rep = run_value_convergence(build_design(cfg), cfg.reps, cfg.limit_draws, cfg.seed, limit=_limit(lim_name))
        checks.append((f"{name.removeprefix('value_break_')} KS sup", rep.ks["sup"], 0.10, "<="))
    assert record(7, "centered sup vs limit sup, T=2000", checks)


# --- 8, 9: QP oracle and invariants ------------------------------------------------------------


def test_criterion_08_qp_oracle():
    rng = np.random.default_rng(20261016)
    t0 = time.perf_counter()
    worst_err = worst_kkt = 0.0
    for _ in range(1000):
        V, Z, G, b = random_qp(rng)
        res = maximize_quadratic(V, Z, G, b)
        worst_err = max(worst_err, float(np.max(np.abs(res.h - grid_argmax(V, Z, G, b)))))
        worst_kkt = max(worst_kkt, res.stationarity, res.complementarity)
    elapsed = time.perf_counter() - t0
    ok = record(
        8,
        "1000 random QPs vs grid brute force",
        [("max error", worst_err, 2e-3, "<="), ("max KKT residual", worst_kkt, 1e-8, "<="), ("runtime s", elapsed, 30.0, "<=")],
    )
    assert ok


def _csv_bytes(d: Path) -> dict[str, bytes]:
    return {p.name: p.read_bytes() for p in sorted(d.glob("*.csv"))}


def test_criterion_09_invariant_suites(tmp_path):
    rng = np.random.default_rng(20261016)
    sup_bad = 0
    for _ in range(1000):
        n = int(rng.integers(1, 200))
        f = rng.normal(scale=rng.uniform(0.1, 10), size=n)
        g = f + rng.normal(scale=rng.uniform(0.0, 2), size=n)
        gap, bound = sup_difference_gap(f, g)
        sup_bad += gap > bound
    inv_bad = 0
    for _ in range(1000):
        m = int(rng.integers(2, 400))
        grid = np.sort(rng.choice(np.arange(-2000, 2001), size=m, replace=False)) * 0.01
        v = np.cumsum(rng.normal(size=m))
        base = argmax_over(PathSample(grid, v)).s
        c, k, t = rng.uniform(0.01, 100), rng.normal(scale=1e3), float(rng.integers(-500, 500))
        inv_bad += argmax_over(PathSample(grid, c * v + k)).s != base
        inv_bad += argmax_over(PathSample(grid + t, v)).s != base + t
    differing = []
    for cfg in sorted(CONFIGS.glob("*.json")):
        runs = []
        for i, threads in enumerate(("1", "3")):
            out = tmp_path / f"{cfg.stem}_{i}"
            code = main(["run", "--config", str(cfg), "--reps", "40", "--limit-draws", "2000", "--threads", threads, "--out", str(out)])
            assert code != EXIT_CONFIG and (out / "report.json").exists()
            runs.append(_csv_bytes(out))
        if runs[0] != runs[1] or not runs[0]:
            differing.append(cfg.stem)
    ok = record(
        9,
        f"invariants, {len(list(CONFIGS.glob('*.json')))} configs rerun",
        [
            ("sup-difference violations", sup_bad, 0, "<="),
            ("argmax invariance violations", inv_bad, 0, "<="),
            ("configs with differing CSVs", len(differing), 0, "<="),
        ],
    )
    assert ok, differing


# --- 10: noise floor -------------------------------------------------------------------------


def test_criterion_10_self_consistency():
    cfg = _cfg("corollary1a")
    d = build_design(cfg)
    first = _limit("corollary1a")
    second = sample_limit_argmax(d.limit_spec(), None, cfg.limit_draws, first.C, first.step, seed=1)
    ks = ks_distance(EmpiricalDist(quantize(first.argmax_draws)), EmpiricalDist(quantize(second.argmax_draws)))
    assert first.argmax_draws.size == second.argmax_draws.size == 100_000
    assert record(10, "two independent 1e5-draw limit runs", [("KS", ks, 0.012, "<=")])
