"""Monte Carlo experiments comparing finite-sample estimators with limit laws.

Each ``run_*`` function draws ``reps`` finite-sample replications and
``limit_N`` limit draws, compares them with the two-sample KS distance and
returns an :class:`MCReport`.  Replication ``i`` of the finite-sample part
uses seed ``derive_seed(substream(base, "finite"), i)``; the limit sampler
uses base ``substream(base, "limit")``.
"""

from __future__ import annotations

import json
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .empirical import DEFAULT_QUANTILES, EmpiricalDist, ks_distance, quantize
from .errors import DesignError
from .estimators import (
    BreakDesign,
    ToyModelDesign,
    estimate_break,
    fit_boundary_model,
    fit_weakid_model,
    semistrong_limit,
    simulate_break_data,
    simulate_toy_data,
    weakid_limit_sets,
)
from .processes import (
    interval_of,
    mode_count,
    resolve_threads,
    sample_limit_argmax,
    sample_polyhedral_limit,
    sample_weakid_limit,
    single_constraint_active_probability,
)
from .seeding import derive_seed, substream
from .sets import (
    FEAS_TOL,
    Box,
    GridSet,
    PolyhedralSet,
    break_sequence,
    constant_sequence,
    directed_distance,
    pk_limit_estimate,
    remark3_closed_set,
    remark3_sequence,
)

REPORT_SCHEMA = "argmaxlab.report/1"
SYMMETRY_TOL = 0.05
KS_TOL = {
    "corollary1a": 0.08,
    "corollary1b": 0.10,
    "corollary2": 0.05,
    "corollary3": 0.10,
    "value": 0.10,
}


@dataclass
class Rule:
    name: str
    value: float
    threshold: float
    passed: bool
    kind: str = "<="

    def to_dict(self) -> dict:
        return {"value": _num(self.value), "threshold": _num(self.threshold), "kind": self.kind, "passed": self.passed}


def _num(x):
    x = float(x)
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return x


@dataclass
class MCReport:
    """Summary of one experiment; raw samples are kept for CSV export."""

    experiment: str
    base_seed: int
    reps: int
    limit_draws: int
    config: dict = field(default_factory=dict)
    ks: dict[str, float] = field(default_factory=dict)
    quantiles: dict[str, dict[str, float]] = field(default_factory=dict)
    ties: int = 0
    saturation: float = 0.0
    timings: dict[str, float] = field(default_factory=dict)
    rules: list[Rule] = field(default_factory=list)
    diagnostics: dict = field(default_factory=dict)
    notes: list[str] = field(default_factory=list)
    samples: dict[str, np.ndarray] = field(default_factory=dict, repr=False)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.rules)

    def rule(self, name: str) -> Rule:
        for r in self.rules:
            if r.name == name:
                return r
        raise KeyError(name)

    def check(self, name: str, value: float, threshold: float, kind: str = "<=") -> Rule:
        ok = {"<=": value <= threshold, ">=": value >= threshold}[kind]
        r = Rule(name, float(value), float(threshold), bool(ok), kind)
        self.rules.append(r)
        return r

    def compare(self, name: str, finite, limit) -> float:
        """Record KS and quantiles for one finite-vs-limit comparison."""
        A = EmpiricalDist(quantize(finite))
        B = EmpiricalDist(quantize(limit))
        ks = ks_distance(A, B)
        self.ks[name] = ks
        self.quantiles[name] = {"finite": A.quantiles(DEFAULT_QUANTILES), "limit": B.quantiles(DEFAULT_QUANTILES)}
        self.samples[f"{name}_finite"] = np.asarray(finite, dtype=float)
        self.samples[f"{name}_limit"] = np.asarray(limit, dtype=float)
        return ks

    def to_dict(self) -> dict:
        return {
            "schema": REPORT_SCHEMA,
            "experiment": self.experiment,
            "base_seed": self.base_seed,
            "reps": self.reps,
            "limit_draws": self.limit_draws,
            "config": self.config,
            "ks": self.ks,
            "quantiles": self.quantiles,
            "ties": self.ties,
            "saturation": self.saturation,
            "timings": self.timings,
            "rules": {r.name: r.to_dict() for r in self.rules},
            "passed": self.passed,
            "diagnostics": self.diagnostics,
            "notes": self.notes,
        }

    def to_json(self) -> str:
        return json.dumps(_clean(self.to_dict()), indent=2, sort_keys=True, allow_nan=False)

    def write(self, out_dir) -> list[Path]:
        """Write ``report.json``, one raw CSV and one ECDF CSV per sample."""
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        paths = [out / "report.json"]
        paths[0].write_text(self.to_json() + "\n")
        for name, x in self.samples.items():
            raw = out / f"{name}.csv"
            with open(raw, "w") as fh:
                for v in np.asarray(x, dtype=float).reshape(-1):
                    fh.write(repr(float(v)) + "\n")
            ecdf = out / f"{name}_ecdf.csv"
            EmpiricalDist(x).ecdf_to_csv(ecdf)
            paths += [raw, ecdf]
        return paths

    def summary_lines(self) -> list[str]:
        lines = [f"{self.experiment}: KS {k} = {v:.4f}" for k, v in self.ks.items()]
        for r in self.rules:
            verdict = "PASS" if r.passed else "FAIL"
            lines.append(f"{self.experiment}: {r.name} = {r.value:.6g} ({r.kind} {r.threshold:g}) {verdict}")
        return lines


def _clean(o):
    """JSON-safe copy: numpy scalars and arrays unwrapped, infinities as strings."""
    if isinstance(o, dict):
        return {str(k): _clean(v) for k, v in o.items()}
    if isinstance(o, (list, tuple)):
        return [_clean(v) for v in o]
    if isinstance(o, np.ndarray):
        return _clean(o.tolist())
    if isinstance(o, (bool, np.bool_)):
        return bool(o)
    if isinstance(o, (int, np.integer)):
        return int(o)
    if isinstance(o, (float, np.floating)):
        x = float(o)
        return "nan" if math.isnan(x) else _num(x)
    if o is None or isinstance(o, str):
        return o
    raise TypeError(f"cannot serialize {type(o).__name__}")


def _map_reps(fn, reps: int, base: int, threads: int | None):
    """``[fn(derive_seed(base, i)) for i in range(reps)]`` in rep order."""
    seeds = [derive_seed(base, i) for i in range(reps)]
    n = resolve_threads(threads)
    if n > 1:
        with ThreadPoolExecutor(n) as pool:
            return list(pool.map(fn, seeds, chunksize=max(1, reps // (4 * n))))
    return [fn(s) for s in seeds]


class _Timer:
    def __init__(self, report: MCReport, key: str):
        self.report, self.key = report, key

    def __enter__(self):
        self.t = time.perf_counter()

    def __exit__(self, *exc):
        self.report.timings[self.key] = time.perf_counter() - self.t


# --- break-date experiments ---------------------------------------------------


def break_replications(design: BreakDesign, reps: int, seed: int, threads=None):
    """Localized break dates and centered maximized objectives over replications."""
    base = substream(seed, "finite")

    def one(s):
        fit = estimate_break(simulate_break_data(design, s), design)
        return fit.s_hat, fit.sup_centered, fit.tie_flag

    out = _map_reps(one, reps, base, threads)
    s_hat = np.array([o[0] for o in out])
    sup = np.array([o[1] for o in out])
    ties = int(sum(o[2] for o in out))
    return s_hat, sup, ties


def run_corollary1(
    design: BreakDesign,
    reps: int = 2000,
    limit_N: int = 100_000,
    seed: int = 0,
    *,
    C: float | None = None,
    step: float = 0.01,
    threads: int | None = None,
    limit=None,
) -> MCReport:
    """Localized break date against the (constrained) limit argmax.

    ``limit`` may pass a precomputed :class:`LimitArgmaxSample` so that
    several sample sizes can share one limit run.
    """
    exp = "corollary1a" if design.regime == "1a" else "corollary1b"
    rep = MCReport(exp, seed, reps, limit_N, {"design": design.to_dict(), "C": C, "step": step})
    with _Timer(rep, "finite"):
        s_hat, _, ties = break_replications(design, reps, seed, threads)
    with _Timer(rep, "limit"):
        if limit is None:
            limit = sample_limit_argmax(
                design.limit_spec(), design.limit_constraint, limit_N, C, step, substream(seed, "limit"), threads=threads
            )
    rep.ties = ties + limit.ties
    rep.saturation = limit.saturation
    rep.notes += limit.warnings
    ks = rep.compare("argmax", s_hat, limit.argmax_draws)
    rep.check("ks_argmax", ks, KS_TOL[exp])
    rep.check("saturation", limit.saturation, 1e-3)
    rep.diagnostics["finite_ties"] = ties
    rep.diagnostics["limit_ties"] = limit.ties
    if design.regime == "1a":
        sym_f = ks_distance(EmpiricalDist(quantize(s_hat)), EmpiricalDist(quantize(-s_hat)))
        sym_l = ks_distance(EmpiricalDist(quantize(limit.argmax_draws)), EmpiricalDist(quantize(-limit.argmax_draws)))
        rep.check("symmetry_finite", sym_f, SYMMETRY_TOL)
        rep.check("symmetry_limit", sym_l, SYMMETRY_TOL)
    else:
        a = design.a
        rep.check("limit_max_minus_a", float(limit.argmax_draws.max() - a), 0.0)
        rep.check("finite_max_minus_upper", float(s_hat.max() - design.s_upper), 1e-12)
        rep.diagnostics["s_upper"] = design.s_upper
        rep.diagnostics["finite_mass_at_or_below_zero"] = float(np.mean(s_hat <= 0))
        rep.diagnostics["limit_mode_count"] = mode_count(limit.argmax_draws)
        if a < 0:
            rep.check("finite_mass_at_or_below_zero", float(np.mean(s_hat <= 0)), 0.99, ">=")
    return rep


def run_value_convergence(
    design,
    reps: int = 2000,
    limit_N: int = 100_000,
    seed: int = 0,
    *,
    C: float | None = None,
    step: float = 0.01,
    threads: int | None = None,
    limit=None,
) -> MCReport:
    """Centered finite-sample maximum against the limit supremum.

    For break designs the centering is ``V_T(k0)``; for the toy models it
    is the objective at the true parameter.  ``limit`` may pass a
    precomputed :class:`LimitArgmaxSample` for break designs.
    """
    if isinstance(design, BreakDesign):
        return _value_break(design, reps, limit_N, seed, C, step, threads, limit)
    if isinstance(design, ToyModelDesign):
        return _value_toy(design, reps, limit_N, seed, threads)
    raise DesignError(f"unsupported design type {type(design).__name__}")


def _value_break(design, reps, limit_N, seed, C, step, threads, lim=None):
    rep = MCReport("value-convergence", seed, reps, limit_N, {"design": design.to_dict(), "C": C, "step": step})
    with _Timer(rep, "finite"):
        _, sup, ties = break_replications(design, reps, seed, threads)
    with _Timer(rep, "limit"):
        if lim is None:
            lim = sample_limit_argmax(
                design.limit_spec(), design.limit_constraint, limit_N, C, step, substream(seed, "limit"), threads=threads
            )
    rep.ties = ties + lim.ties
    rep.saturation = lim.saturation
    ks = rep.compare("sup", sup, lim.sup_draws)
    rep.check("ks_sup", ks, KS_TOL["value"])
    strict = float(np.mean(lim.sup_draws < lim.free_sup_draws - 1e-12))
    rep.diagnostics["limit_sup_strictly_below_free"] = strict
    rep.diagnostics["limit_sup_above_free"] = int(np.sum(lim.sup_draws > lim.free_sup_draws))
    return rep


def _value_toy(design, reps, limit_N, seed, threads):
    rep = MCReport("value-convergence", seed, reps, limit_N, {"design": design.to_dict()})
    base = substream(seed, "finite")
    lim_seed = substream(seed, "limit")
    rn = math.sqrt(design.n)

    if design.variant == "boundary":

        def one(s):
            data = simulate_toy_data(design, s)
            fit = fit_boundary_model(design, data=data)
            V = data.X.T @ data.X / design.n
            Z = data.X.T @ (data.y - data.X @ design.theta_n) / rn
            return float(fit.h @ Z - 0.5 * fit.h @ V @ fit.h)

        with _Timer(rep, "finite"):
            sup = np.array(_map_reps(one, reps, base, threads))
        with _Timer(rep, "limit"):
            lim = sample_polyhedral_limit(design.boundary_limit(), design.boundary_limit_set(), limit_N, lim_seed)
        limit_sup = lim.sup_draws
    else:

        def one(s):
            data = simulate_toy_data(design, s)
            fit = fit_weakid_model(design, data=data)
            pi1, pi2 = design.pi_n
            resid = data.y - data.X @ np.array([pi1, design.beta_n * pi1, pi2])
            return 0.5 * (float(resid @ resid) - fit.ssr)

        with _Timer(rep, "finite"):
            sup = np.array(_map_reps(one, reps, base, threads))
        with _Timer(rep, "limit"):
            limit_sup = _weakid_limit(design, limit_N, lim_seed)[1]
    ks = rep.compare("sup", sup, limit_sup)
    rep.check("ks_sup", ks, KS_TOL["value"])
    return rep


# --- boundary experiments -----------------------------------------------------


def boundary_replications(design: ToyModelDesign, reps: int, seed: int, threads=None):
    base = substream(seed, "finite")

    def one(s):
        fit = fit_boundary_model(design, seed=s)
        return fit.h, fit.theta_hat, len(fit.active) > 0

    out = _map_reps(one, reps, base, threads)
    H = np.array([o[0] for o in out])
    theta = np.array([o[1] for o in out])
    on_bound = np.array([o[2] for o in out])
    return H, theta, on_bound


def run_corollary2(
    design: ToyModelDesign, reps: int = 2000, limit_N: int = 100_000, seed: int = 0, *, threads=None
) -> MCReport:
    """Localized constrained least squares against the projected Gaussian limit."""
    if design.variant != "boundary":
        raise DesignError("corollary2 needs a boundary design")
    rep = MCReport("corollary2", seed, reps, limit_N, {"design": design.to_dict()})
    P = design.boundary_limit_set()
    q = design.boundary_limit()
    with _Timer(rep, "finite"):
        H, theta, on_bound = boundary_replications(design, reps, seed, threads)
    with _Timer(rep, "limit"):
        lim = sample_polyhedral_limit(q, P, limit_N, substream(seed, "limit"))
    for j in range(design.dim):
        ks = rep.compare(f"h{j + 1}", H[:, j], lim.draws[:, j])
        rep.check(f"ks_h{j + 1}", ks, KS_TOL["corollary2"])
    viol = float(np.max(theta @ design.A_matrix.T + np.asarray(design.g0)))
    rep.check("max_constraint_value", viol, FEAS_TOL)
    frac_f = float(np.mean(on_bound))
    frac_l = lim.boundary_fraction
    rep.diagnostics["boundary_fraction_finite"] = frac_f
    rep.diagnostics["boundary_fraction_limit"] = frac_l
    if P.n_active == 1:
        oracle = single_constraint_active_probability(q, P)
        rep.diagnostics["boundary_fraction_oracle"] = oracle
        rep.check("boundary_fraction_finite_error", abs(frac_f - oracle), 0.02)
        rep.check("boundary_fraction_limit_error", abs(frac_l - oracle), 0.02)
    return rep


# --- weak identification experiments ------------------------------------------


def _weakid_limit(design: ToyModelDesign, N: int, seed: int):
    """Limit draws ``(N, 3)`` and suprema for the design's regime."""
    sets = weakid_limit_sets(design)
    if design.regime == "weak":
        lo, hi = interval_of(sets.weak)
        s = sample_weakid_limit(design.c, design.beta_n, (lo, hi), N, seed, design.sigma)
        return s.draws, s.sup_draws
    P = product_with_full_space(sets.semistrong, sets.d_pi)
    s = sample_polyhedral_limit(semistrong_limit(design), P, N, seed)
    return s.draws, s.sup_draws


def product_with_full_space(B: PolyhedralSet, d_extra: int) -> PolyhedralSet:
    """``B x R^d_extra`` as a polyhedron in the stacked coordinates."""
    G = np.hstack([B.G, np.zeros((B.G.shape[0], d_extra))])
    b = np.where(B.dropped, -np.inf, B.b)
    return PolyhedralSet(G, b, B.dim + d_extra)


def weakid_replications(design: ToyModelDesign, reps: int, seed: int, threads=None):
    base = substream(seed, "finite")

    def one(s):
        fit = fit_weakid_model(design, seed=s)
        return fit.localized(design.regime), fit.beta_hat, fit.pi_hat

    out = _map_reps(one, reps, base, threads)
    L = np.array([o[0] for o in out])
    beta = np.array([o[1] for o in out])
    pi = np.array([o[2] for o in out])
    return L, beta, pi


def run_corollary3(
    design: ToyModelDesign,
    regime: str | None = None,
    reps: int = 2000,
    limit_N: int = 100_000,
    seed: int = 0,
    *,
    threads=None,
) -> MCReport:
    if design.variant != "weakid":
        raise DesignError("corollary3 needs a weakid design")
    if regime is not None and regime != design.regime:
        design = design.replace(regime=regime)
    rep = MCReport(f"corollary3-{design.regime}", seed, reps, limit_N, {"design": design.to_dict()})
    sets = weakid_limit_sets(design)
    rep.notes += list(sets.warnings)
    rep.diagnostics["mfcq_semistrong"] = sets.mfcq.holds
    with _Timer(rep, "finite"):
        L, beta, pi = weakid_replications(design, reps, seed, threads)
    with _Timer(rep, "limit"):
        draws, _ = _weakid_limit(design, limit_N, substream(seed, "limit"))
    names = ("beta", "h_pi1", "h_pi2")
    for j, name in enumerate(names):
        ks = rep.compare(name, L[:, j], draws[:, j])
        rep.check(f"ks_{name}", ks, KS_TOL["corollary3"])
    rep.check("min_beta_hat", float(beta.min()), 0.0, ">=")
    rep.check("max_beta_minus_pi2", float(np.max(beta - pi[:, 1])), 0.0)
    if design.regime == "weak":
        lo, hi = interval_of(sets.weak)
        rep.diagnostics["limit_upper_atom"] = float(np.mean(draws[:, 0] >= hi - 1e-12))
        rep.diagnostics["limit_lower_atom"] = float(np.mean(draws[:, 0] <= lo + 1e-12))
    else:
        lo, _ = interval_of(sets.semistrong)
        rep.diagnostics["finite_fraction_in_BSS"] = float(np.mean(L[:, 0] >= lo - 1e-9))
    return rep


@dataclass
class RateContrast:
    regime: str
    ns: list[int]
    sds: list[float]
    observed_ratio: float
    expected_ratio: float
    passed: bool


def two_rate_contrast(
    design: ToyModelDesign, ns=(1000, 4000), reps: int = 2000, seed: int = 0, *, threads=None
) -> RateContrast:
    """Compare the spread of ``β̂ - β_n`` across two sample sizes.

    Semi-strong: ``sd(n1)/sd(n2)`` must be within 20% of ``a_n2/a_n1``.
    Weak: the ratio must stay in ``[0.8, 1.25]`` (no shrinkage).
    """
    n1, n2 = ns
    sds = []
    for n in ns:
        d = design.replace(n=n)
        _, beta, _ = weakid_replications(d, reps, substream(seed, f"n={n}"), threads)
        sds.append(float(np.std(beta - d.beta_n, ddof=1)))
    obs = sds[0] / sds[1]
    if design.regime == "semistrong":
        expected = (n2 / n1) ** (1.0 / 3.0)
        ok = abs(obs / expected - 1.0) <= 0.2
    else:
        expected = 1.0
        ok = 0.8 <= obs <= 1.25
    return RateContrast(design.regime, list(ns), sds, obs, expected, bool(ok))


def run_limit_sample(spec, constraint, N, seed, *, C=None, step=0.01, threads=None) -> MCReport:
    """Plain limit-sampler run with quantiles and diagnostics."""
    rep = MCReport("limit-sample", seed, 0, N, {"constraint": constraint, "C": C, "step": step})
    with _Timer(rep, "limit"):
        lim = sample_limit_argmax(spec, constraint, N, C, step, seed, threads=threads)
    rep.ties = lim.ties
    rep.saturation = lim.saturation
    rep.notes += lim.warnings
    rep.samples["argmax"] = lim.argmax_draws
    rep.samples["sup"] = lim.sup_draws
    rep.quantiles["argmax"] = {"limit": lim.argmax.quantiles()}
    rep.quantiles["sup"] = {"limit": lim.sup.quantiles()}
    rep.diagnostics["mode_count"] = mode_count(lim.argmax_draws)
    rep.check("saturation", lim.saturation, 1e-3)
    return rep


def self_consistency(spec, constraint=None, N: int = 100_000, seeds=(1, 2), **kw) -> float:
    """KS between two independent limit-sampler runs."""
    a = sample_limit_argmax(spec, constraint, N, seed=seeds[0], **kw)
    b = sample_limit_argmax(spec, constraint, N, seed=seeds[1], **kw)
    return ks_distance(EmpiricalDist(quantize(a.argmax_draws)), EmpiricalDist(quantize(b.argmax_draws)))


def env_threads() -> int | None:
    v = os.environ.get("ARGMAXLAB_THREADS")
    return int(v) if v else None


# --- set-limit checks -----------------------------------------------------------

PK_DEFAULTS = {
    "remark3": {"K": (0.0, 1.0), "grid_step": 1e-3, "n_schedule": (10, 100, 1000, 10_000)},
    "constant": {"K": (0.0, 1.0), "grid_step": 1e-3, "n_schedule": (1, 2, 3)},
    "lemma2a": {"K": (-3.0, 3.0), "grid_step": 0.01, "n_schedule": (10_000, 100_000, 1_000_000)},
    "lemma2b": {"K": (-3.0, 3.0), "grid_step": 0.01, "n_schedule": (10_000, 100_000, 1_000_000)},
}


def _fmt_set(S: GridSet) -> str:
    if len(S) <= 8:
        return "{" + ", ".join(f"{x:g}" for x in S.points[:, 0]) + "}"
    return f"grid on [{S.points[0, 0]:g}, {S.points[-1, 0]:g}] ({len(S)} points)"


def run_pk_check(
    family: str,
    *,
    K=None,
    grid_step: float | None = None,
    n_schedule=None,
    a: float = -0.5,
    tau: float = 0.5,
    kappa: float = 0.25,
    lambda1: float = 0.15,
    lambda2: float = 0.85,
    points=(0.25, 0.5, 0.75),
    conv_tol: float | None = None,
    seed: int = 0,
) -> MCReport:
    """Estimate a built-in set limit and check it against the known answer."""
    if family not in PK_DEFAULTS:
        raise DesignError(f"unknown family {family!r}")
    dflt = PK_DEFAULTS[family]
    K = Box(*(dflt["K"] if K is None else K))
    step = dflt["grid_step"] if grid_step is None else grid_step
    sched = dflt["n_schedule"] if n_schedule is None else n_schedule
    rep = MCReport("pk-check", seed, 0, 0, {"family": family, "grid_step": step, "n_schedule": list(sched)})
    t0 = time.perf_counter()
    if family == "remark3":
        seq = remark3_sequence()
        lim, diag = pk_limit_estimate(seq, K, sched, step, conv_tol=conv_tol)
        limF, diagF = pk_limit_estimate(seq.restrict(remark3_closed_set), K, sched, step, conv_tol=conv_tol)
        rep.samples["limit"] = lim.points[:, 0]
        rep.samples["limit_F"] = limF.points[:, 0]
        rep.diagnostics["limit"] = _fmt_set(lim)
        rep.diagnostics["limit_F"] = _fmt_set(limF)
        rep.diagnostics["limit_then_F"] = _fmt_set(lim.select(remark3_closed_set))
        rep.check("limit_is_0_1", float(lim == GridSet([0.0, 1.0], 1)), 1.0, ">=")
        rep.check("F_limit_is_0", float(limF == GridSet([0.0], 1)), 1.0, ">=")
        for name, d in (("limit", diag), ("F_limit", diagF)):
            rep.diagnostics[f"{name}_diagnostics"] = {
                "limit_to_sequence": d.limit_to_sequence,
                "sequence_to_limit": d.sequence_to_limit,
                "converged": d.converged,
            }
            rep.check(f"{name}_final_distance", max(d.limit_to_sequence[-1], d.sequence_to_limit[-1]), 1e-3)
            rep.check(f"{name}_converged", float(d.converged), 1.0, ">=")
    else:
        if family == "constant":
            S = GridSet(np.asarray(points, dtype=float), 1)
            seq, expected = constant_sequence(S), S.intersect_box(K)
        elif family == "lemma2a":
            seq = break_sequence(lambda1, lambda2, kappa, tau=tau)
            expected = K.grid(step)
        else:
            seq = break_sequence(lambda1, lambda2, kappa, a=a)
            g = K.grid(step)
            expected = g.select(lambda p: p[:, 0] <= a + 1e-9)
        lim, diag = pk_limit_estimate(seq, K, sched, step, conv_tol=conv_tol)
        rep.samples["limit"] = lim.points[:, 0]
        rep.diagnostics["limit"] = _fmt_set(lim)
        rep.diagnostics["expected"] = _fmt_set(expected)
        rep.diagnostics["limit_to_sequence"] = diag.limit_to_sequence
        rep.diagnostics["sequence_to_limit"] = diag.sequence_to_limit
        rep.diagnostics["converged"] = diag.converged
        err = max(directed_distance(lim, expected), directed_distance(expected, lim))
        if lim.is_empty != expected.is_empty:
            err = math.inf
        tol = step if family == "lemma2b" else 1e-9
        rep.check("hausdorff_to_expected", err, tol)
        if family != "lemma2b":
            rep.check("matches_expected_exactly", float(lim == expected), 1.0, ">=")
        rep.check("converged", float(diag.converged), 1.0, ">=")
    rep.timings["total"] = time.perf_counter() - t0
    return rep
