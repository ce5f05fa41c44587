"""Boundary and weak-identification estimators against their limits.

Runs the scalar boundary design with the parameter on the boundary and the
weak and semi-strong regimes of the toy weak-id model, then prints the KS
distances and the share of draws on the boundary.

Run with ``python3 demos/boundary_and_weakid.py``.
"""

from __future__ import annotations

from argmaxlab.estimators import ToyModelDesign
from argmaxlab.harness import run_corollary2, run_corollary3, two_rate_contrast

SEED = 20261016


def main(reps: int = 1000) -> None:
    rep = run_corollary2(ToyModelDesign("boundary", 2000, A=[[-1.0]], drift=(0.0,)), reps, 50_000, SEED)
    print(f"boundary: KS h = {rep.ks['h1']:.3f}, on boundary {rep.diagnostics['boundary_fraction_finite']:.3f}"
          f" vs {rep.diagnostics['boundary_fraction_oracle']:.3f}")
    for regime, beta, pi2 in (("weak", 0.5, 10.0), ("semistrong", 1.0, 0.5)):
        d = ToyModelDesign("weakid", 4000, regime=regime, beta=beta, pi2=pi2)
        rep = run_corollary3(d, None, reps, 50_000, SEED)
        ks = ", ".join(f"{k} {v:.3f}" for k, v in rep.ks.items())
        rc = two_rate_contrast(d, (1000, 4000), reps, SEED)
        print(f"{regime}: KS {ks}; sd ratio n=1000 vs 4000 {rc.observed_ratio:.3f} (expected {rc.expected_ratio:.3f})")


if __name__ == "__main__":
    main()
