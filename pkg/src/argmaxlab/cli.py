"""Command-line front end.

    argmaxlab run --config configs/corollary1a.json
    argmaxlab run --kind pk-check --family remark3
    argmaxlab describe corollary1b

Exit codes: 0 when every acceptance rule of the run passes, 1 on a
failed rule or runtime error, 2 on an invalid configuration.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .config import KINDS, SCHEMA, ConfigError, ExperimentConfig, describe_kind, load_config, validate
from .errors import ArgmaxLabError, DesignError
from .estimators import BreakDesign, ToyModelDesign
from .harness import (
    run_corollary1,
    run_corollary2,
    run_corollary3,
    run_limit_sample,
    run_pk_check,
    run_value_convergence,
    two_rate_contrast,
)
from .processes import GaussianSpec

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2


def _break_design(cfg: ExperimentConfig, regime: str) -> BreakDesign:
    p = cfg.params
    kw = dict(
        T=p["T"],
        beta=p["beta"],
        delta0=p["delta0"],
        kappa=p["kappa"],
        lambda1=p["lambda1"],
        lambda2=p["lambda2"],
        sigma=p["sigma"],
        seed=cfg.seed,
    )
    if regime == "1a":
        return BreakDesign(**kw, tau=p["tau"], a=None)
    return BreakDesign(**kw, tau=None, a=p["a"])


def _boundary_design(cfg: ExperimentConfig) -> ToyModelDesign:
    p = cfg.params
    return ToyModelDesign(
        "boundary",
        n=p["n"],
        seed=cfg.seed,
        sigma=p.get("sigma", 1.0),
        A=p["A"],
        g0=p.get("g0"),
        theta0=p.get("theta0"),
        drift=p.get("drift"),
    )


def _weakid_design(cfg: ExperimentConfig, regime: str) -> ToyModelDesign:
    p = cfg.params
    weak = regime == "weak"
    return ToyModelDesign(
        "weakid",
        n=p.get("n") or 4000,
        seed=cfg.seed,
        sigma=cfg.get("sigma", 1.0),
        regime=regime,
        c=p["c"],
        beta=cfg.get("beta", 0.5 if weak else 1.0),
        pi2=cfg.get("pi2", 10.0 if weak else 0.5),
        grid_points=p["grid_points"],
    )


def build_design(cfg: ExperimentConfig):
    """Design object for a validated config (``None`` for kinds without one)."""
    k = cfg.kind
    if k == "corollary1a":
        return _break_design(cfg, "1a")
    if k == "corollary1b":
        return _break_design(cfg, "1b")
    if k == "corollary2":
        return _boundary_design(cfg)
    if k.startswith("corollary3"):
        return _weakid_design(cfg, k.split("-")[1])
    if k == "value-convergence":
        fam = cfg.params["family"]
        if fam == "break":
            return _break_design(cfg, "1a" if cfg.params.get("a") is None else "1b")
        if fam == "boundary":
            return _boundary_design(cfg)
        return _weakid_design(cfg, cfg.params["regime"])
    return None


def execute(cfg: ExperimentConfig, design=None):
    """Run a validated config; returns the list of reports."""
    p = cfg.params
    k = cfg.kind
    kw = dict(seed=cfg.seed)
    if k == "pk-check":
        K = p.get("K")
        return [
            run_pk_check(
                p["family"],
                K=tuple(K) if K else None,
                grid_step=p.get("grid_step"),
                n_schedule=p.get("n_schedule"),
                a=p["a"],
                tau=p["tau"],
                kappa=p["kappa"],
                lambda1=p["lambda1"],
                lambda2=p["lambda2"],
                points=p["points"],
                conv_tol=p.get("conv_tol"),
                **kw,
            )
        ]
    if k == "limit-sample":
        d = np.asarray(p["delta0"])
        eye = np.eye(d.size)
        mats = [np.asarray(p[m]) if p.get(m) is not None else eye for m in ("Omega1", "Omega2", "Q1", "Q2")]
        spec = GaussianSpec(*mats, d)
        return [run_limit_sample(spec, p["constraint"], cfg.limit_draws, cfg.seed, C=p["C"], step=p["step"], threads=cfg.threads)]
    if design is None:
        design = build_design(cfg)
    common = dict(reps=cfg.reps, limit_N=cfg.limit_draws, seed=cfg.seed, threads=cfg.threads)
    if k in ("corollary1a", "corollary1b"):
        return [run_corollary1(design, C=p["C"], step=p["step"], **common)]
    if k == "corollary2":
        return [run_corollary2(design, **common)]
    if k.startswith("corollary3"):
        rep = run_corollary3(design, **common)
        if p["rate_reps"] > 0:
            rc = two_rate_contrast(design, tuple(p["rate_ns"]), p["rate_reps"], cfg.seed, threads=cfg.threads)
            rep.diagnostics["rate_contrast"] = {
                "ns": rc.ns,
                "sds": rc.sds,
                "observed_ratio": rc.observed_ratio,
                "expected_ratio": rc.expected_ratio,
            }
            rep.check("rate_contrast", float(rc.passed), 1.0, ">=")
        return [rep]
    if k == "value-convergence":
        extra = dict(C=p["C"], step=p["step"]) if isinstance(design, BreakDesign) else {}
        return [run_value_convergence(design, **common, **extra)]
    raise ConfigError(f"unknown kind {k!r}", "kind")


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="argmaxlab",
        description="Monte Carlo laboratory for constrained argmax limit theorems.",
        epilog="experiment kinds: " + ", ".join(KINDS),
    )
    sub = ap.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run an experiment from a config file or a built-in kind")
    run.add_argument("--config", type=Path, help="JSON experiment config")
    run.add_argument("--kind", choices=KINDS, help="experiment kind (defaults for all other fields)")
    run.add_argument("--family", help="pk-check or value-convergence family")
    run.add_argument("--seed", type=int, help="base seed (unsigned 64-bit)")
    run.add_argument("--reps", type=int, help="finite-sample replications")
    run.add_argument("--limit-draws", type=int, help="limit-sampler draws")
    run.add_argument("--out", type=Path, help="output directory")
    run.add_argument("--threads", type=int, help="worker threads (overrides ARGMAXLAB_THREADS)")
    desc = sub.add_parser("describe", help="print the config schema of an experiment kind")
    desc.add_argument("kind")
    return ap


def _config_from_args(args) -> ExperimentConfig:
    if args.config is not None:
        if not args.config.exists():
            raise ConfigError(f"config file {args.config} not found")
        cfg = load_config(args.config)
        obj = json.loads(args.config.read_text())
        if args.kind and args.kind != cfg.kind:
            raise ConfigError(f"--kind {args.kind} contradicts the config's kind {cfg.kind}", "kind")
    elif args.kind:
        obj = {"schema": SCHEMA, "kind": args.kind}
    else:
        raise ConfigError("give --config or --kind")
    overrides = {
        "seed": args.seed,
        "reps": args.reps,
        "limit_draws": args.limit_draws,
        "threads": args.threads,
        "family": args.family,
        "out": str(args.out) if args.out is not None else None,
    }
    obj = dict(obj)
    for key, val in overrides.items():
        if val is not None:
            obj[key] = val
    return validate(obj)


def cmd_run(args) -> int:
    try:
        cfg = _config_from_args(args)
        design = build_design(cfg)
    except (ConfigError, DesignError) as exc:
        print(f"invalid config: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except json.JSONDecodeError as exc:
        print(f"invalid config: line {exc.lineno}: {exc.msg}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        reports = execute(cfg, design)
    except ArgmaxLabError as exc:
        print(f"error ({type(exc).__module__}.{type(exc).__name__}): {exc}", file=sys.stderr)
        return EXIT_FAIL
    out = Path(cfg.out) if cfg.out else Path("runs") / cfg.kind
    ok = True
    for rep in reports:
        rep.config["cli"] = cfg.raw
        rep.write(out)
        for key in ("limit", "limit_F", "limit_then_F"):
            if key in rep.diagnostics:
                label = {"limit": "limit", "limit_F": "F-intersection limit", "limit_then_F": "limit then ∩ F"}[key]
                print(f"{rep.experiment}: {label} = {rep.diagnostics[key]}")
        for line in rep.summary_lines():
            print(line)
        ok &= rep.passed
    print(f"{cfg.kind}: {'PASS' if ok else 'FAIL'} (outputs in {out})")
    return EXIT_OK if ok else EXIT_FAIL


def cmd_describe(args) -> int:
    try:
        print(describe_kind(args.kind))
    except ConfigError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_OK


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    if args.command == "run":
        return cmd_run(args)
    return cmd_describe(args)


if __name__ == "__main__":
    sys.exit(main())
