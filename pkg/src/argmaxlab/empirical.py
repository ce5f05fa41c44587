"""Empirical distributions and the two-sample Kolmogorov-Smirnov distance."""

from __future__ import annotations

import numpy as np

from .errors import ArgmaxLabError

DEFAULT_QUANTILES = (0.01, 0.05, 0.25, 0.5, 0.75, 0.95, 0.99)


class EmpiricalDist:
    """Sorted sample with a right-continuous ECDF (``F(x_(k)) = k/n``)."""

    __slots__ = ("samples",)

    def __init__(self, samples):
        x = np.asarray(samples, dtype=float).reshape(-1)
        if x.size == 0:
            raise ArgmaxLabError("EmpiricalDist needs at least one sample")
        if np.any(np.isnan(x)):
            raise ArgmaxLabError("EmpiricalDist samples contain NaN")
        x = np.sort(x, kind="stable") + 0.0
        x.setflags(write=False)
        self.samples = x

    @property
    def n(self) -> int:
        return self.samples.size

    def __len__(self):
        return self.n

    def __repr__(self):
        return f"EmpiricalDist(n={self.n}, median={self.quantile(0.5):.4g})"

    def ecdf(self, x):
        """``#{samples <= x} / n``."""
        return np.searchsorted(self.samples, x, side="right") / self.n

    def quantile(self, q):
        """Generalized inverse ``inf{x : F(x) >= q}``."""
        q = np.asarray(q, dtype=float)
        idx = np.clip(np.ceil(q * self.n - 1e-12).astype(int) - 1, 0, self.n - 1)
        return self.samples[idx]

    def quantiles(self, qs=DEFAULT_QUANTILES) -> dict[str, float]:
        return {f"{q:g}": float(self.quantile(q)) for q in qs}

    def mean(self) -> float:
        return float(self.samples.mean())

    def std(self) -> float:
        return float(self.samples.std(ddof=1)) if self.n > 1 else 0.0

    def negated(self) -> EmpiricalDist:
        return EmpiricalDist(-self.samples)

    def scaled(self, c: float) -> EmpiricalDist:
        return EmpiricalDist(c * self.samples)

    def ecdf_points(self) -> np.ndarray:
        """Jump points and ECDF heights, shape (k, 2)."""
        xs, counts = np.unique(self.samples, return_counts=True)
        return np.column_stack([xs, np.cumsum(counts) / self.n])

    def to_csv(self, path) -> None:
        with open(path, "w") as fh:
            for v in self.samples:
                fh.write(repr(float(v)) + "\n")

    def ecdf_to_csv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write("x,F\n")
            for x, F in self.ecdf_points():
                fh.write(f"{float(x)!r},{float(F)!r}\n")

    @classmethod
    def from_csv(cls, path) -> EmpiricalDist:
        return cls(np.loadtxt(path, ndmin=1))


def ks_distance(A: EmpiricalDist, B: EmpiricalDist) -> float:
    """``sup_x |F_A(x) - F_B(x)|`` by a sweep over the merged order statistics.

    Both ECDFs are constant between consecutive merged sample values, so
    evaluating them at every sample value is exact.
    """
    if not isinstance(A, EmpiricalDist):
        A = EmpiricalDist(A)
    if not isinstance(B, EmpiricalDist):
        B = EmpiricalDist(B)
    merged = np.concatenate([A.samples, B.samples])
    gap = np.abs(A.ecdf(merged) - B.ecdf(merged))
    return float(min(max(gap.max(), 0.0), 1.0))


def quantize(x, decimals: int = 9) -> np.ndarray:
    """Round to a fixed absolute grid so numerically equal atoms coincide."""
    return np.round(np.asarray(x, dtype=float), decimals) + 0.0
