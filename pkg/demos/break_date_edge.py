"""How the break-date estimator approaches its constrained limit law.

For a break placed beyond the trimming window (a = -1) the localized
estimator is compared with the limit argmax over (-inf, a] at several
sample sizes.  The KS distance shrinks slowly, which is why the T = 2000
acceptance check for this design does not pass.

Run with ``python3 demos/break_date_edge.py [reps]`` (default 500 reps).
"""

from __future__ import annotations

import sys

from argmaxlab.estimators import BreakDesign
from argmaxlab.harness import run_corollary1
from argmaxlab.processes import sample_limit_argmax
from argmaxlab.seeding import substream

SEED = 20261016


def main(reps: int = 500) -> None:
    a = -1.0
    first = BreakDesign(2025, tau=None, a=a)
    lim = sample_limit_argmax(first.limit_spec(), a, 50_000, None, 0.01, substream(SEED, "limit"))
    print(f"limit: median {lim.argmax.quantile(0.5):+.3f}, P(s <= -3) = {(lim.argmax_draws <= -3).mean():.3f}")
    for T in (2025, 8100, 32_400):
        d = BreakDesign(T, tau=None, a=a)
        rep = run_corollary1(d, reps, lim.argmax_draws.size, SEED, limit=lim)
        fin = rep.samples["argmax_finite"]
        print(f"T = {T:6d}: KS = {rep.ks['argmax']:.3f}, finite median {sorted(fin)[len(fin) // 2]:+.3f}")


if __name__ == "__main__":
    main(int(sys.argv[1]) if len(sys.argv) > 1 else 500)
