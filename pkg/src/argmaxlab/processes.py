"""Simulation of limit processes and their constrained maximizers.

Covers the two-sided drifted Gaussian process of the break-date problem,
Gaussian quadratic limit experiments over polyhedra, and the limit
objective of the weakly identified toy model.
"""

from __future__ import annotations

import math
import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.signal import find_peaks
from scipy.stats import norm

from .empirical import EmpiricalDist
from .errors import ArgmaxLabError, DesignError, EmptyConstraintError
from .qp import KKT_TOL, QPResult, maximize_quadratic, maximize_quadratic_batch
from .seeding import derive_seed, make_rng, rep_rng
from .sets import GridSet, PolyhedralSet

TIE_TOL = 1e-12
SATURATION_LIMIT = 1e-3
BLOCK = 512


def resolve_threads(threads: int | None = None) -> int:
    if threads is None:
        threads = int(os.environ.get("ARGMAXLAB_THREADS", "1") or 1)
    return max(1, int(threads))


def _check_pd(name, M):
    M = np.atleast_2d(np.asarray(M, dtype=float))
    if M.shape[0] != M.shape[1] or not np.allclose(M, M.T, atol=1e-12):
        raise DesignError(f"{name} must be a symmetric square matrix")
    try:
        np.linalg.cholesky(M)
    except np.linalg.LinAlgError:
        raise DesignError(f"{name} is not positive definite") from None
    return M


def _check_psd(name, M):
    M = np.atleast_2d(np.asarray(M, dtype=float))
    if M.shape[0] != M.shape[1] or not np.allclose(M, M.T, atol=1e-12):
        raise DesignError(f"{name} must be a symmetric square matrix")
    if np.min(np.linalg.eigvalsh(M)) < -1e-10:
        raise DesignError(f"{name} is not positive semidefinite")
    return M


@dataclass(frozen=True)
class PathSample:
    """A process realization on a strictly increasing grid."""

    grid: np.ndarray
    values: np.ndarray
    seed: int | None = None
    process: str = ""

    def __post_init__(self):
        grid = np.asarray(self.grid, dtype=float).reshape(-1)
        values = np.asarray(self.values, dtype=float)
        if values.shape[0] != grid.shape[0]:
            raise DesignError("grid and values must have equal length")
        if np.any(np.diff(grid) <= 0):
            raise DesignError("grid must be strictly increasing")
        if self.process.startswith("M"):
            zero = np.flatnonzero(grid == 0.0)
            if zero.size != 1 or np.any(values[zero[0]] != 0.0):
                raise DesignError("M-type paths must contain s=0 with value 0")
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", values)

    def to_csv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write("s,value\n")
            for s, v in zip(self.grid, self.values.reshape(len(self.grid), -1)[:, 0]):
                fh.write(f"{float(s)!r},{float(v)!r}\n")


class GaussianSpec:
    """Covariances Ω_i, second moments Q_i and the break direction δ0."""

    def __init__(self, Omega1, Omega2, Q1, Q2, delta0):
        self.Omega1 = _check_pd("Omega1", Omega1)
        self.Omega2 = _check_pd("Omega2", Omega2)
        self.Q1 = _check_pd("Q1", Q1)
        self.Q2 = _check_pd("Q2", Q2)
        p = self.Omega1.shape[0]
        if not all(M.shape == (p, p) for M in (self.Omega2, self.Q1, self.Q2)):
            raise DesignError("all matrices must be p x p with the same p")
        d = np.atleast_1d(np.asarray(delta0, dtype=float))
        if d.shape != (p,):
            raise DesignError(f"delta0 must have length {p}")
        if not np.any(d != 0):
            raise DesignError("delta0 must be nonzero")
        self.delta0 = d
        self.chol1 = np.linalg.cholesky(self.Omega1)
        self.chol2 = np.linalg.cholesky(self.Omega2)

    @classmethod
    def identity(cls, delta0) -> GaussianSpec:
        p = np.atleast_1d(delta0).size
        eye = np.eye(p)
        return cls(eye, eye, eye, eye, delta0)

    @property
    def p(self) -> int:
        return self.delta0.size

    @property
    def drift(self) -> tuple[float, float]:
        d = self.delta0
        return float(d @ self.Q1 @ d), float(d @ self.Q2 @ d)

    @property
    def noise_sd(self) -> tuple[float, float]:
        """Standard deviations of ``δ0'B_i(1)``."""
        d = self.delta0
        return math.sqrt(d @ self.Omega1 @ d), math.sqrt(d @ self.Omega2 @ d)

    def default_C(self) -> float:
        return 40.0 / min(self.drift)

    def scaled(self, c: float) -> GaussianSpec:
        return GaussianSpec(self.Omega1, self.Omega2, self.Q1, self.Q2, c * self.delta0)


class QuadraticLimit:
    """``M(h) = h'Z - 0.5 h'Vh`` with ``Z ~ Normal(Z_mean, Z_cov)``."""

    def __init__(self, V, Z_cov, Z_mean=None):
        self.V = _check_pd("V", V)
        self.Z_cov = _check_psd("Z_cov", Z_cov)
        d = self.V.shape[0]
        if self.Z_cov.shape != (d, d):
            raise DesignError("Z_cov must match V")
        self.Z_mean = np.zeros(d) if Z_mean is None else np.asarray(Z_mean, dtype=float).reshape(d)
        w, U = np.linalg.eigh(self.Z_cov)
        self._root = U * np.sqrt(np.clip(w, 0.0, None))

    @property
    def dim(self) -> int:
        return self.V.shape[0]

    def value(self, h, Z) -> float:
        h = np.asarray(h, dtype=float)
        return float(h @ Z - 0.5 * h @ self.V @ h)

    def draw_Z(self, rng: np.random.Generator) -> np.ndarray:
        return self.Z_mean + self._root @ rng.standard_normal(self.dim)


# --- Brownian paths and the break-date limit process --------------------------


def sample_scaled_bm(grid, Omega, seed: int) -> PathSample:
    """``B`` with ``E B(u)B(v)' = min(u, v) Ω`` on ``grid`` (which starts at 0).

    Values have shape ``(len(grid), p)``.
    """
    grid = np.asarray(grid, dtype=float).reshape(-1)
    if grid.size == 0 or grid[0] != 0.0:
        raise DesignError("grid must start at 0")
    if np.any(np.diff(grid) <= 0):
        raise DesignError("grid must be strictly increasing")
    L = np.linalg.cholesky(_check_pd("Omega", Omega))
    p = L.shape[0]
    rng = make_rng(seed)
    z = rng.standard_normal((grid.size - 1, p))
    inc = np.sqrt(np.diff(grid))[:, None] * (z @ L.T)
    values = np.vstack([np.zeros((1, p)), np.cumsum(inc, axis=0)])
    return PathSample(grid, values, seed, "B")


def symmetric_grid(C: float, step: float) -> np.ndarray:
    if step <= 0:
        raise DesignError("step must be positive")
    if C <= 0 or step >= C:
        raise DesignError("need C > 0 and 0 < step < C")
    m = int(math.floor(C / step + 1e-9))
    return step * np.arange(-m, m + 1)


def limit_process_M(spec: GaussianSpec, C: float, step: float, seed: int, *, B1=None, B2=None) -> PathSample:
    """One path of the two-sided limit process on ``{-C, ..., 0, ..., C}``.

    ``M(s) = -|s| δ0'Q1δ0 + 2 δ0'B1(|s|)`` for ``s <= 0`` and
    ``-s δ0'Q2δ0 + 2 δ0'B2(s)`` for ``s > 0``.  ``B1``/``B2`` may be passed
    as ``(m+1, p)`` arrays on the half grid to override the draws.
    """
    s = symmetric_grid(C, step)
    m = (s.size - 1) // 2
    half = s[m:]
    if B1 is None:
        B1 = sample_scaled_bm(half, spec.Omega1, derive_seed(seed, 1)).values
    if B2 is None:
        B2 = sample_scaled_bm(half, spec.Omega2, derive_seed(seed, 2)).values
    B1 = np.asarray(B1, dtype=float).reshape(m + 1, spec.p)
    B2 = np.asarray(B2, dtype=float).reshape(m + 1, spec.p)
    d1, d2 = spec.drift
    left = -half * d1 + 2.0 * B1 @ spec.delta0
    right = -half * d2 + 2.0 * B2 @ spec.delta0
    values = np.concatenate([left[:0:-1], [0.0], right[1:]])
    return PathSample(s, values, seed, "M")


@dataclass(frozen=True)
class ArgmaxResult:
    s: float
    value: float
    tie_flag: bool
    index: int


def _constraint_mask(grid, constraint):
    if constraint is None:
        return np.ones(grid.size, dtype=bool)
    if isinstance(constraint, GridSet):
        if constraint.dim != 1:
            raise DesignError("path constraints must be one-dimensional")
        return constraint.distances(grid.reshape(-1, 1)) <= 1e-9 * (1 + np.abs(grid))
    return grid <= float(constraint)


def argmax_over(path: PathSample, constraint=None, tie_tol: float = TIE_TOL) -> ArgmaxResult:
    """Maximizer of the path over the constrained grid.

    ``constraint`` is ``None`` (whole grid), a number ``a`` meaning
    ``(-inf, a]``, or a GridSet.  Ties within ``tie_tol`` go to the
    smallest grid point and are flagged.
    """
    mask = _constraint_mask(path.grid, constraint)
    if not mask.any():
        raise EmptyConstraintError("constraint does not meet the path grid")
    vals = path.values.reshape(path.grid.size, -1)[:, 0]
    idx = np.flatnonzero(mask)
    sub = vals[idx]
    j = int(np.argmax(sub))
    near = np.count_nonzero(sub >= sub[j] - tie_tol)
    return ArgmaxResult(float(path.grid[idx[j]]), float(sub[j]), near > 1, int(idx[j]))


@dataclass
class LimitArgmaxSample:
    """Draws from the constrained argmax law of the break-date limit process.

    Arrays are in replication order; ``argmax``/``sup`` give sorted views.
    """

    argmax_draws: np.ndarray
    sup_draws: np.ndarray
    free_sup_draws: np.ndarray
    ties: int
    saturation: float
    C: float
    step: float
    constraint: float | None
    warnings: list[str] = field(default_factory=list)

    @property
    def argmax(self) -> EmpiricalDist:
        return EmpiricalDist(self.argmax_draws)

    @property
    def sup(self) -> EmpiricalDist:
        return EmpiricalDist(self.sup_draws)


def _limit_block(spec_params, seed, start, stop, m, step, hi_idx, tie_tol):
    d1, d2, sd1, sd2 = spec_params
    nb = stop - start
    Z = np.empty((nb, 2 * m))
    for i in range(nb):
        rep_rng(seed, start + i).standard_normal(out=Z[i])
    r = step * np.arange(1, m + 1)
    root = math.sqrt(step)
    left = np.cumsum(Z[:, :m], axis=1)
    left *= 2.0 * sd1 * root
    left -= r * d1
    right = np.cumsum(Z[:, m:], axis=1)
    right *= 2.0 * sd2 * root
    right -= r * d2
    vals = np.concatenate([left[:, ::-1], np.zeros((nb, 1)), right], axis=1)
    free_sup = vals.max(axis=1)
    sub = vals[:, : hi_idx + 1]
    j = np.argmax(sub, axis=1)
    best = sub[np.arange(nb), j]
    ties = int(np.count_nonzero(np.sum(sub >= (best - tie_tol)[:, None], axis=1) > 1))
    return j, best, free_sup, ties


def sample_limit_argmax(
    spec: GaussianSpec,
    constraint: float | None = None,
    N: int = 100_000,
    C: float | None = None,
    step: float = 0.01,
    seed: int = 0,
    *,
    threads: int | None = None,
    tie_tol: float = TIE_TOL,
) -> LimitArgmaxSample:
    """``N`` independent draws of ``argmax_{s <= a} M(s)`` (``a = constraint``).

    Path ``i`` uses its own stream ``rep_rng(seed, i)``: the first ``m``
    normals drive the left branch and the next ``m`` the right branch.
    Only ``δ0'B_i`` enters ``M``, so each branch is simulated as a scalar
    Brownian motion with variance ``δ0'Ω_iδ0`` per unit time.
    """
    if N < 1:
        raise ValueError("N must be at least 1")
    C = spec.default_C() if C is None else float(C)
    s = symmetric_grid(C, step)
    m = (s.size - 1) // 2
    if constraint is None:
        hi_idx = s.size - 1
    else:
        a = float(constraint)
        ok = np.flatnonzero(s <= a)
        if ok.size == 0:
            raise EmptyConstraintError(f"(-inf, {a}] misses the grid [-{C}, {C}]")
        hi_idx = int(ok[-1])
    params = (*spec.drift, *spec.noise_sd)
    blocks = [(b, min(b + BLOCK, N)) for b in range(0, N, BLOCK)]
    work = lambda blk: _limit_block(params, seed, blk[0], blk[1], m, step, hi_idx, tie_tol)  # noqa: E731
    nthreads = resolve_threads(threads)
    if nthreads > 1:
        with ThreadPoolExecutor(nthreads) as pool:
            parts = list(pool.map(work, blocks))
    else:
        parts = [work(blk) for blk in blocks]
    j = np.concatenate([p[0] for p in parts])
    best = np.concatenate([p[1] for p in parts])
    free_sup = np.concatenate([p[2] for p in parts])
    ties = sum(p[3] for p in parts)
    argmax = s[j]
    edge = C - step * (1 - 1e-9)
    saturated = np.abs(argmax) >= edge
    if constraint is not None:
        saturated &= ~np.isclose(argmax, s[hi_idx])
        saturated |= argmax <= -edge
    saturation = float(np.mean(saturated))
    notes = []
    if saturation > SATURATION_LIMIT:
        msg = f"argmax within one step of ±C on {saturation:.3%} of draws; increase C"
        notes.append(msg)
        warnings.warn(msg, stacklevel=2)
    return LimitArgmaxSample(argmax, best, free_sup, ties, saturation, C, step, constraint, notes)


def mode_count(samples, bins: int = 80, smooth: int = 3, prominence: float = 0.1) -> int:
    """Number of modes of a lightly smoothed histogram.

    A peak counts when its prominence exceeds ``prominence`` times the
    tallest bin; the histogram is zero-padded so edge bins can be peaks.
    The range is clipped to the central 99% so stray tails do not
    flatten the bins.
    """
    x = np.asarray(samples, dtype=float)
    lo, hi = np.quantile(x, [0.005, 0.995])
    if hi <= lo:
        return 1
    hist, _ = np.histogram(x, bins=bins, range=(lo, hi))
    h = np.convolve(hist, np.ones(smooth) / smooth, mode="same")
    h = np.concatenate([[0.0], h, [0.0]])
    peaks, _ = find_peaks(h, prominence=prominence * h.max())
    return int(peaks.size)


# --- quadratic limit experiments ---------------------------------------------


def solve_polyhedral(q: QuadraticLimit, Z_draw, P: PolyhedralSet) -> QPResult:
    """Certified maximizer of ``h'Z - 0.5 h'Vh`` over ``P``."""
    if P.dim != q.dim:
        raise DesignError(f"set in R^{P.dim} vs quadratic in R^{q.dim}")
    res = maximize_quadratic(q.V, Z_draw, P.G_active, P.b_active)
    if res.stationarity > KKT_TOL or res.complementarity > KKT_TOL or res.primal_violation > 1e-9:
        raise ArgmaxLabError(
            f"KKT certificate failed: stationarity={res.stationarity:.3g}, "
            f"complementarity={res.complementarity:.3g}, violation={res.primal_violation:.3g}"
        )
    return res


def polyhedral_argmax(q: QuadraticLimit, Z_draw, P: PolyhedralSet) -> np.ndarray:
    return solve_polyhedral(q, Z_draw, P).h


@dataclass
class PolyhedralLimitSample:
    draws: np.ndarray  # (N, d) maximizers in replication order
    active: np.ndarray  # (N, n_active) working-set membership
    sup_draws: np.ndarray
    Z: np.ndarray

    def marginal(self, j: int) -> EmpiricalDist:
        return EmpiricalDist(self.draws[:, j])

    @property
    def marginals(self) -> list[EmpiricalDist]:
        return [self.marginal(j) for j in range(self.draws.shape[1])]

    @property
    def boundary_fraction(self) -> float:
        if self.active.shape[1] == 0:
            return 0.0
        return float(np.mean(self.active.any(axis=1)))


def draw_quadratic_Z(q: QuadraticLimit, N: int, seed: int) -> np.ndarray:
    Z = np.empty((N, q.dim))
    for i in range(N):
        Z[i] = q.draw_Z(rep_rng(seed, i))
    return Z


def sample_polyhedral_limit(q: QuadraticLimit, P: PolyhedralSet, N: int, seed: int) -> PolyhedralLimitSample:
    """``N`` draws of ``argmax_{h in P} h'Z - 0.5 h'Vh`` with fresh ``Z``."""
    if N < 1:
        raise ValueError("N must be at least 1")
    if P.dim != q.dim:
        raise DesignError(f"set in R^{P.dim} vs quadratic in R^{q.dim}")
    Z = draw_quadratic_Z(q, N, seed)
    G, b = P.G_active, P.b_active
    H, act, mu = maximize_quadratic_batch(q.V, Z, G, b)
    grad = Z - H @ q.V.T - mu @ G
    stat = np.linalg.norm(grad, axis=1)
    comp = np.max(np.abs(mu * (H @ G.T + b)), axis=1) if G.shape[0] else np.zeros(N)
    bad = np.flatnonzero((stat > KKT_TOL) | (comp > KKT_TOL))
    for i in bad:
        res = solve_polyhedral(q, Z[i], P)
        H[i] = res.h
        act[i] = False
        act[i, list(res.active)] = True
    sup = np.einsum("ij,ij->i", H, Z) - 0.5 * np.einsum("ij,jk,ik->i", H, q.V, H)
    return PolyhedralLimitSample(H, act, sup, Z)


def single_constraint_active_probability(q: QuadraticLimit, P: PolyhedralSet) -> float:
    """``P(constraint binds)`` for a one-row polyhedron.

    The row ``b + r'h <= 0`` binds iff ``b + r'V^{-1}Z > 0`` and
    ``r'V^{-1}Z`` is normal.
    """
    if P.n_active != 1:
        raise DesignError("closed form needs exactly one active row")
    r = P.G_active[0]
    b = float(P.b_active[0])
    w = np.linalg.solve(q.V, r)
    mean = float(w @ q.Z_mean)
    sd = math.sqrt(float(w @ q.Z_cov @ w))
    return float(norm.cdf((b + mean) / sd))


# --- weakly identified toy model ----------------------------------------------


def weakid_limit_objective(beta, h1, h2, Z, c: float, beta_n: float) -> np.ndarray:
    """``M^W(β, h) = u'Z - 0.5|u|^2`` with ``u = (h1, β(c+h1) - β_n c, h2)``."""
    beta = np.asarray(beta, dtype=float)
    u2 = beta * (c + np.asarray(h1, dtype=float)) - beta_n * c
    return h1 * Z[0] + u2 * Z[1] + h2 * Z[2] - 0.5 * (np.square(h1) + np.square(u2) + np.square(h2))


def angular_argmax(A, B, lo: float, hi: float) -> np.ndarray:
    """``argmax_{β in [lo, hi]} (A + βB)^2 / (1 + β^2)``, ties to the smaller β.

    The ratio equals ``|(A, B)|^2 cos^2(atan β - ψ)`` with ``ψ`` the
    direction of ``(A, B)`` modulo π, so the maximizer is ``tan ψ`` when
    it lies in the interval and otherwise the endpoint that is closer
    to ``ψ`` on the circle of directions.
    """
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        psi = np.arctan(np.where(A != 0, B / A, np.sign(B) * np.inf))
    f_lo, f_hi = math.atan(lo), math.atan(hi)
    inside = (psi >= f_lo) & (psi <= f_hi)
    val = lambda phi: np.square(np.cos(phi - psi))  # noqa: E731
    pick_hi = val(f_hi) > val(f_lo)
    out = np.where(pick_hi, hi, lo)
    return np.where(inside, np.tan(np.clip(psi, f_lo, f_hi)), out)


@dataclass
class WeakIdLimitSample:
    draws: np.ndarray  # (N, 3): β, h_π1, h_π2
    sup_draws: np.ndarray

    def marginal(self, j: int) -> EmpiricalDist:
        return EmpiricalDist(self.draws[:, j])


def weakid_limit_from_Z(Z, c: float, beta_n: float, lo: float, hi: float):
    Z = np.atleast_2d(np.asarray(Z, dtype=float))
    A = Z[:, 0] + c
    B = Z[:, 1] + beta_n * c
    beta = angular_argmax(A, B, lo, hi)
    w = (A + beta * B) / (1 + beta**2)
    draws = np.column_stack([beta, w - c, Z[:, 2]])
    resid2 = np.square(A - w) + np.square(B - beta * w)
    sup = 0.5 * np.sum(np.square(Z), axis=1) - 0.5 * resid2
    return draws, sup


def sample_weakid_limit(
    c: float, beta_n: float, beta_bounds: tuple[float, float], N: int, seed: int, sigma: float = 1.0
) -> WeakIdLimitSample:
    """Draws of ``argmax M^W`` over ``[lo, hi] x R^2``.

    ``Z ~ Normal(0, σ^2 I_3)``; the β coordinate has a closed-form
    angular solution and ``(h_π1, h_π2)`` follow by least squares.
    """
    lo, hi = beta_bounds
    if not lo <= hi:
        raise DesignError("empty β interval")
    Z = np.empty((N, 3))
    for i in range(N):
        Z[i] = sigma * rep_rng(seed, i).standard_normal(3)
    draws, sup = weakid_limit_from_Z(Z, c, beta_n, lo, hi)
    return WeakIdLimitSample(draws, sup)


def semistrong_quadratic(c: float, sigma: float = 1.0) -> QuadraticLimit:
    """Quadratic limit in ``(h_β, h_π1, h_π2)`` for the semi-strong regime."""
    V = np.diag([c * c, 1.0, 1.0])
    return QuadraticLimit(V, sigma**2 * V)


def interval_of(P: PolyhedralSet) -> tuple[float, float]:
    """Endpoints of a one-dimensional polyhedron (``±inf`` when unbounded)."""
    if P.dim != 1:
        raise DesignError("interval_of needs a one-dimensional set")
    lo, hi = -math.inf, math.inf
    for g, b in zip(P.G_active[:, 0], P.b_active):
        if g > 0:
            hi = min(hi, -b / g)
        elif g < 0:
            lo = max(lo, -b / g)
        elif b > 0:
            return math.inf, -math.inf
    return lo, hi
