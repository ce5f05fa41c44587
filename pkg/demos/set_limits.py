"""Set limits that drive the argmax theorem.

Prints the numeric set limit of the two-point sequence {1/n, 1 - 1/n}, the
limit of its intersection with F = [0, 1/2] U {1}, and the rescaled
break-date sets for an interior break and for breaks at the trimming edge.

Run with ``python3 demos/set_limits.py``.
"""

from __future__ import annotations

from argmaxlab.harness import run_pk_check


def main() -> None:
    rep = run_pk_check("remark3")
    print("two-point sequence limit:     ", rep.diagnostics["limit"])
    print("limit of the F-intersection:  ", rep.diagnostics["limit_F"])
    print("F applied after the limit:    ", rep.diagnostics["limit_then_F"])
    print()
    print("interior break:", run_pk_check("lemma2a").diagnostics["limit"])
    for a in (-0.5, 0.0, 1.0):
        print(f"edge break, a = {a:+.1f}:", run_pk_check("lemma2b", a=a).diagnostics["limit"])


if __name__ == "__main__":
    main()
