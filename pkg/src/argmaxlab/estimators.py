"""Finite-sample estimators for the three synthetic applications.

* a single structural break in a linear regression, estimated by least
  squares over a trimmed set of candidate dates;
* a Gaussian linear model whose coefficients are restricted to a
  polyhedron, possibly with the truth drifting onto the boundary;
* a toy model with a weakly or semi-strongly identified parameter β,
  ``y = π1 x1 + β π1 x2 + π2 x3 + ε`` with ``0 <= β <= π2``.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import DesignError, GridRangeError, ProfileGridError, SingularDesignError
from .processes import GaussianSpec, PathSample, QuadraticLimit, semistrong_quadratic
from .qp import FEAS_TOL, maximize_quadratic
from .seeding import make_rng
from .sets import PolyhedralSet, WeakIdLimitSets, break_date_set, greatest_integer, weakid_sets_from


def design_hash(design) -> str:
    blob = json.dumps(design.to_dict(), sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


def _tuple(x) -> tuple[float, ...]:
    return tuple(float(v) for v in np.atleast_1d(np.asarray(x, dtype=float)))


# --- structural break ---------------------------------------------------------


@dataclass(frozen=True)
class BreakDesign:
    """Synthetic single-break regression.

    The break size is ``δ_T = δ0 v_T`` with ``v_T = T^-kappa``.  The break
    date is ``[tau T]`` when ``tau`` is given, or ``[λ2 T - a v_T^-2]``
    when the drift target ``a`` is given.  Regressors are i.i.d.
    ``Normal(x_mean, diag(x_sd^2))`` (``x_dist="normal"``) or the constant
    ``x_mean`` (``x_dist="constant"``); errors are ``Normal(0, sigma^2)``,
    and ``sigma = 0`` gives noiseless data.
    """

    T: int
    beta: tuple[float, ...] = (1.0, 1.0)
    delta0: tuple[float, ...] = (1.0, 1.0)
    kappa: float = 0.25
    lambda1: float = 0.15
    lambda2: float = 0.85
    tau: float | None = 0.5
    a: float | None = None
    x_dist: str = "normal"
    x_mean: tuple[float, ...] | None = None
    x_sd: tuple[float, ...] | None = None
    sigma: float = 1.0
    seed: int = 0

    def __post_init__(self):
        set_ = lambda k, v: object.__setattr__(self, k, v)  # noqa: E731
        set_("beta", _tuple(self.beta))
        set_("delta0", _tuple(self.delta0))
        p = len(self.beta)
        if len(self.delta0) != p:
            raise DesignError("beta and delta0 must have equal length")
        if not any(self.delta0):
            raise DesignError("delta0 must be nonzero")
        set_("x_mean", (0.0,) * p if self.x_mean is None else _tuple(self.x_mean))
        set_("x_sd", (1.0,) * p if self.x_sd is None else _tuple(self.x_sd))
        if len(self.x_mean) != p or len(self.x_sd) != p:
            raise DesignError("x_mean and x_sd must have length p")
        if self.x_dist not in ("normal", "constant"):
            raise DesignError(f"unknown regressor distribution {self.x_dist!r}")
        if not 0 < self.kappa < 0.5:
            raise DesignError("kappa must lie in (0, 1/2)")
        if not 0 < self.lambda1 < self.lambda2 < 1:
            raise DesignError(
                f"trimming requires 0 < lambda1 < lambda2 < 1, got lambda1={self.lambda1}, lambda2={self.lambda2}"
            )
        if (self.tau is None) == (self.a is None):
            raise DesignError("give exactly one of tau or a")
        if self.tau is not None and not self.lambda1 < self.tau < self.lambda2:
            raise DesignError("tau must lie strictly between lambda1 and lambda2")
        if self.sigma < 0:
            raise DesignError("sigma must be nonnegative")
        if not p + 1 <= self.k0 <= self.T - p - 1:
            raise DesignError(f"k0={self.k0} outside {{{p + 1}, ..., {self.T - p - 1}}}")
        lam = self.Lambda_T
        if lam[0] < p or lam[-1] > self.T - p:
            raise DesignError("trimmed candidate set leaves too few observations in a regime")

    @property
    def p(self) -> int:
        return len(self.beta)

    @property
    def vT(self) -> float:
        return self.T ** (-self.kappa)

    @property
    def k0(self) -> int:
        if self.tau is not None:
            return greatest_integer(self.tau * self.T)
        return greatest_integer(self.lambda2 * self.T - self.a * self.vT ** (-2))

    @property
    def delta_T(self) -> np.ndarray:
        return np.asarray(self.delta0) * self.vT

    @property
    def Lambda_T(self) -> np.ndarray:
        return break_date_set(self.T, self.lambda1, self.lambda2)

    @property
    def regime(self) -> str:
        return "1a" if self.tau is not None else "1b"

    @property
    def s_upper(self) -> float:
        """``v_T^2([λ2 T] - k0)``, the largest reachable localized date."""
        return self.vT**2 * (self.Lambda_T[-1] - self.k0)

    @property
    def limit_constraint(self) -> float | None:
        return None if self.tau is not None else float(self.a)

    def limit_spec(self) -> GaussianSpec:
        """Limit-process matrices implied by the generators.

        ``Q = E x x'`` and, for homoskedastic errors, ``Ω = σ^2 Q``; both
        are the same on either side of the break.
        """
        mean = np.asarray(self.x_mean)
        Q = np.diag(np.square(self.x_sd)) + np.outer(mean, mean)
        if self.x_dist == "constant":
            Q = np.outer(mean, mean)
        Omega = self.sigma**2 * Q
        return GaussianSpec(Omega, Omega, Q, Q, self.delta0)

    def replace(self, **changes) -> BreakDesign:
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


@dataclass(frozen=True)
class BreakData:
    y: np.ndarray
    X: np.ndarray
    k0: int

    @property
    def T(self) -> int:
        return self.y.size

    def to_csv(self, path) -> None:
        p = self.X.shape[1]
        with open(path, "w") as fh:
            fh.write("t,y," + ",".join(f"x{j + 1}" for j in range(p)) + "\n")
            for t in range(self.T):
                row = [repr(float(self.y[t]))] + [repr(float(v)) for v in self.X[t]]
                fh.write(f"{t + 1}," + ",".join(row) + "\n")


def simulate_break_data(design: BreakDesign, seed: int | None = None) -> BreakData:
    """``y_t = x_t'β + ε_t`` for ``t <= k0`` and ``x_t'(β + δ_T) + ε_t`` after."""
    rng = make_rng(design.seed if seed is None else seed)
    T, p = design.T, design.p
    if design.x_dist == "normal":
        X = np.asarray(design.x_mean) + rng.standard_normal((T, p)) * np.asarray(design.x_sd)
    else:
        X = np.tile(np.asarray(design.x_mean), (T, 1))
    eps = design.sigma * rng.standard_normal(T) if design.sigma > 0 else np.zeros(T)
    after = (np.arange(1, T + 1) > design.k0).astype(float)
    y = X @ np.asarray(design.beta) + after * (X @ design.delta_T) + eps
    return BreakData(y, X, design.k0)


def v_t_objective(k: int, data: BreakData) -> float:
    """``δ̂_k'(Z_k'M Z_k)δ̂_k`` from the regression of ``y`` on ``(x_t, x_t 1{t > k})``.

    Computed directly from the design matrix; :func:`break_profile` gives
    the same numbers for all ``k`` at once.
    """
    X, y = data.X, data.y
    T, p = X.shape
    if not p <= k <= T - p:
        raise SingularDesignError(k, f"k={k} outside {{{p}, ..., {T - p}}}")
    Zk = X * (np.arange(1, T + 1) > k)[:, None]
    W = np.hstack([X, Zk])
    if np.linalg.matrix_rank(W) < 2 * p:
        raise SingularDesignError(k)
    coef = np.linalg.lstsq(W, y, rcond=None)[0]
    delta = coef[p:]
    MZ = Zk - X @ np.linalg.solve(X.T @ X, X.T @ Zk)
    return float(max(delta @ (Zk.T @ MZ) @ delta, 0.0))


def _explained(S, c):
    """``c'S^{-1}c`` for stacks of (p, p) matrices and p-vectors."""
    sol = np.linalg.solve(S, c[..., None])[..., 0]
    return np.einsum("...i,...i->...", c, sol)


def break_profile(data: BreakData, ks) -> tuple[np.ndarray, np.ndarray]:
    """``(V_T(k), SSR(k))`` for each ``k`` in ``ks``.

    ``SSR(k)`` is the residual sum of squares with separate coefficients
    before and after ``k``; ``V_T(k) = SSR_0 - SSR(k)`` where ``SSR_0``
    has no break.  Uses cumulative sums of ``x x'`` and ``x y``.
    """
    X, y = data.X, data.y
    T, p = X.shape
    ks = np.asarray(ks, dtype=int)
    if ks.size and (ks.min() < p or ks.max() > T - p):
        bad = ks[(ks < p) | (ks > T - p)]
        raise SingularDesignError(int(bad[0]), f"k={int(bad[0])} outside {{{p}, ..., {T - p}}}")
    XX = np.cumsum(X[:, :, None] * X[:, None, :], axis=0)
    Xy = np.cumsum(X * y[:, None], axis=0)
    S, c = XX[-1], Xy[-1]
    S1, c1 = XX[ks - 1], Xy[ks - 1]
    S2, c2 = S - S1, c - c1
    if np.any(np.linalg.det(S1) <= 0) or np.any(np.linalg.det(S2) <= 0):
        det = np.minimum(np.linalg.det(S1), np.linalg.det(S2))
        raise SingularDesignError(int(ks[np.argmin(det)]))
    yy = float(y @ y)
    full = float(_explained(S, c))
    split = _explained(S1, c1) + _explained(S2, c2)
    V = np.maximum(split - full, 0.0)
    SSR = np.maximum(yy - split, 0.0)
    return V, SSR


@dataclass
class BreakFitResult:
    k_hat: int
    s_hat: float
    V_profile: np.ndarray
    SSR_profile: np.ndarray
    ks: np.ndarray
    V_k0: float
    tie_flag: bool = False
    seed: int | None = None

    @property
    def sup_centered(self) -> float:
        """``max_k V_T(k) - V_T(k0)``."""
        return float(self.V_profile.max() - self.V_k0)

    def to_record(self, design: BreakDesign) -> dict:
        return {"k_hat": self.k_hat, "s_hat": self.s_hat, "seed": self.seed, "design_hash": design_hash(design)}


def estimate_break(data: BreakData, design: BreakDesign, *, tie_tol: float = 1e-10) -> BreakFitResult:
    """Maximize ``V_T`` over the trimmed set; ties go to the smallest ``k``."""
    ks = design.Lambda_T
    if ks.size == 0:
        raise DesignError("empty candidate set")
    V, SSR = break_profile(data, ks)
    j = int(np.argmax(V))
    tie = bool(np.count_nonzero(V >= V[j] - tie_tol * (1 + abs(V[j]))) > 1)
    k0 = design.k0
    V_k0 = float(break_profile(data, [k0])[0][0])
    k_hat = int(ks[j])
    return BreakFitResult(k_hat, design.vT**2 * (k_hat - k0), V, SSR, ks, V_k0, tie, design.seed)


def localized_break_objective(data: BreakData, design: BreakDesign, s_grid) -> PathSample:
    """``M_T(s) = V_T([k0 + s v_T^-2]) - V_T(k0)`` on ``s_grid``."""
    s = np.asarray(s_grid, dtype=float).reshape(-1)
    k0, p, T = design.k0, design.p, data.T
    ks = np.floor(np.round(k0 + s * design.vT ** (-2), 9)).astype(int)
    bad = (ks < p) | (ks > T - p)
    if bad.any():
        raise GridRangeError(
            f"{int(bad.sum())} grid values map outside k in {{{p}, ..., {T - p}}}", clipped=s[bad].tolist()
        )
    V, _ = break_profile(data, np.append(ks, k0))
    return PathSample(s, V[:-1] - V[-1], design.seed, "localized break objective")


# --- toy models ---------------------------------------------------------------


@dataclass(frozen=True)
class ToyModelDesign:
    """Synthetic design for the boundary and weak-identification toy models.

    Boundary variant: ``y = x'θ_n + σε`` with ``x ~ Normal(0, I)``, the
    parameter space ``{θ : A θ + g0 <= 0}`` and ``θ_n = θ0 + drift / sqrt(n)``.

    Weak-id variant: ``y = π1 x1 + β π1 x2 + π2 x3 + σε`` on
    ``{0 <= β <= π2}``.  In the ``weak`` regime ``π1_n = c / sqrt(n)`` and
    ``β_n = beta``; in the ``semistrong`` regime ``π1_n = c n^{-1/6}``,
    ``a_n = n^{1/3}`` and ``β_n = beta / a_n``.  ``π2`` is held fixed.
    """

    variant: str
    n: int
    seed: int = 0
    sigma: float = 1.0
    A: tuple[tuple[float, ...], ...] | None = None
    g0: tuple[float, ...] | None = None
    theta0: tuple[float, ...] | None = None
    drift: tuple[float, ...] | None = None
    regime: str = "weak"
    c: float = 1.0
    beta: float = 0.5
    pi2: float = 0.5
    grid_points: int = 2001

    def __post_init__(self):
        set_ = lambda k, v: object.__setattr__(self, k, v)  # noqa: E731
        if self.n < 2:
            raise DesignError("n must be at least 2")
        if self.sigma < 0:
            raise DesignError("sigma must be nonnegative")
        if self.variant == "boundary":
            if self.A is None:
                raise DesignError("boundary designs need the constraint matrix A")
            A = np.atleast_2d(np.asarray(self.A, dtype=float))
            d = A.shape[1]
            set_("A", tuple(tuple(float(v) for v in row) for row in A))
            set_("g0", (0.0,) * A.shape[0] if self.g0 is None else _tuple(self.g0))
            set_("theta0", (0.0,) * d if self.theta0 is None else _tuple(self.theta0))
            set_("drift", (0.0,) * d if self.drift is None else _tuple(self.drift))
            if len(self.g0) != A.shape[0] or len(self.theta0) != d or len(self.drift) != d:
                raise DesignError("A, g0, theta0 and drift have inconsistent dimensions")
            if np.any(self.g_values(self.theta0) > FEAS_TOL):
                raise DesignError("theta0 violates the constraints")
            if np.any(self.g_values(self.theta_n) > FEAS_TOL):
                raise DesignError("theta_n leaves the parameter space")
        elif self.variant == "weakid":
            if self.regime not in ("weak", "semistrong"):
                raise DesignError(f"unknown regime {self.regime!r}")
            if self.c <= 0:
                raise DesignError("c must be positive")
            if not 0 <= self.beta_n <= self.pi2:
                raise DesignError("the true β must satisfy 0 <= β <= π2")
            if self.grid_points < 3:
                raise DesignError("profile grid needs at least 3 points")
        else:
            raise DesignError(f"unknown variant {self.variant!r}")

    # boundary helpers
    @property
    def A_matrix(self) -> np.ndarray:
        return np.asarray(self.A, dtype=float)

    @property
    def dim(self) -> int:
        return self.A_matrix.shape[1] if self.variant == "boundary" else 3

    def g_values(self, theta) -> np.ndarray:
        return self.A_matrix @ np.asarray(theta, dtype=float) + np.asarray(self.g0)

    @property
    def theta_n(self) -> np.ndarray:
        return np.asarray(self.theta0) + np.asarray(self.drift) / math.sqrt(self.n)

    def boundary_limit_set(self) -> PolyhedralSet:
        """``{h : b + A h <= 0}`` with ``b_j = (A drift)_j`` on rows binding at ``θ0``."""
        A = self.A_matrix
        binding = np.abs(self.g_values(self.theta0)) <= FEAS_TOL
        b = np.where(binding, A @ np.asarray(self.drift), -np.inf)
        return PolyhedralSet(A, b, A.shape[1])

    def boundary_limit(self) -> QuadraticLimit:
        d = self.dim
        return QuadraticLimit(np.eye(d), self.sigma**2 * np.eye(d))

    # weak-id helpers
    @property
    def a_n(self) -> float:
        return self.n ** (1.0 / 3.0)

    @property
    def pi1_n(self) -> float:
        if self.regime == "weak":
            return self.c / math.sqrt(self.n)
        return self.c * self.n ** (-1.0 / 6.0)

    @property
    def beta_n(self) -> float:
        return self.beta if self.regime == "weak" else self.beta / self.a_n

    @property
    def pi_n(self) -> np.ndarray:
        return np.array([self.pi1_n, self.pi2])

    def replace(self, **changes) -> ToyModelDesign:
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


def weakid_limit_sets(design: ToyModelDesign) -> WeakIdLimitSets:
    """Limit sets of the toy model with ``g(β, π) = (-β, β - π2)``.

    ``b`` is the limit of ``a_n g(β_n, π_n)``; a row whose value stays
    bounded away from zero contributes ``-inf``.
    """
    if design.variant != "weakid":
        raise DesignError("weakid_limit_sets needs a weakid design")
    G_beta = np.array([[-1.0], [1.0]])
    G_pi = np.array([[0.0, 0.0], [0.0, -1.0]])
    pi0 = np.array([0.0, design.pi2])
    if design.regime == "semistrong":
        b1 = -design.beta
        b2 = -math.inf if design.pi2 > 0 else design.beta
    else:
        b1 = -math.inf if design.beta > 0 else 0.0
        b2 = -math.inf if design.beta < design.pi2 else 0.0
    return weakid_sets_from(G_beta, G_pi, np.zeros(2), pi0, np.array([b1, b2]))


def semistrong_limit(design: ToyModelDesign) -> QuadraticLimit:
    return semistrong_quadratic(design.c, design.sigma)


@dataclass(frozen=True)
class ToyData:
    y: np.ndarray
    X: np.ndarray


def simulate_toy_data(design: ToyModelDesign, seed: int | None = None) -> ToyData:
    rng = make_rng(design.seed if seed is None else seed)
    X = rng.standard_normal((design.n, design.dim))
    eps = design.sigma * rng.standard_normal(design.n) if design.sigma > 0 else np.zeros(design.n)
    if design.variant == "boundary":
        coef = design.theta_n
    else:
        pi1 = design.pi1_n
        coef = np.array([pi1, design.beta_n * pi1, design.pi2])
    return ToyData(X @ coef + eps, X)


@dataclass
class BoundaryFit:
    theta_hat: np.ndarray
    h: np.ndarray
    active: tuple[int, ...]
    seed: int | None = None


def fit_boundary_model(design: ToyModelDesign, seed: int | None = None, data: ToyData | None = None) -> BoundaryFit:
    """Constrained least squares, solved exactly as a QP in ``h = sqrt(n)(θ - θ_n)``.

    ``max_h h'Z_n - 0.5 h'V_n h`` s.t. ``sqrt(n) g(θ_n) + A h <= 0`` with
    ``V_n = X'X/n`` and ``Z_n = X'(y - Xθ_n)/sqrt(n)``.
    """
    if design.variant != "boundary":
        raise DesignError("fit_boundary_model needs a boundary design")
    if data is None:
        data = simulate_toy_data(design, seed)
    n = design.n
    rn = math.sqrt(n)
    theta_n = design.theta_n
    V = data.X.T @ data.X / n
    Z = data.X.T @ (data.y - data.X @ theta_n) / rn
    b = rn * np.minimum(design.g_values(theta_n), 0.0)
    res = maximize_quadratic(V, Z, design.A_matrix, b)
    h = res.h
    theta_hat = theta_n + h / rn
    return BoundaryFit(theta_hat, h, res.active, design.seed if seed is None else seed)


@dataclass
class WeakIdFit:
    beta_hat: float
    pi_hat: np.ndarray
    weak: np.ndarray  # (β̂, sqrt(n)(π̂ - π_n))
    semistrong: np.ndarray  # (a_n(β̂ - β_n), sqrt(n)(π̂ - π_n))
    ssr: float
    seed: int | None = None

    def localized(self, regime: str) -> np.ndarray:
        return self.weak if regime == "weak" else self.semistrong


def _profile_ssr(beta, S, c, yy):
    """Least squares over ``(π1, π2)`` for each β, subject to ``π2 >= β``.

    Returns ``(ssr, π1, π2)`` arrays.
    """
    beta = np.asarray(beta, dtype=float)
    m11 = S[0, 0] + 2 * beta * S[0, 1] + beta**2 * S[1, 1]  # u'u with u = x1 + βx2
    m12 = S[0, 2] + beta * S[1, 2]  # u'x3
    m22 = S[2, 2]
    r1 = c[0] + beta * c[1]
    r2 = c[2]
    det = m11 * m22 - m12**2
    pi1 = (m22 * r1 - m12 * r2) / det
    pi2 = (m11 * r2 - m12 * r1) / det
    ssr = yy - (pi1 * r1 + pi2 * r2)
    bind = pi2 < beta
    # with π2 fixed at β: regress y - βx3 on u
    rt = r1 - beta * m12
    pi1_b = rt / m11
    ssr_b = yy - 2 * beta * r2 + beta**2 * m22 - rt**2 / m11
    return np.where(bind, ssr_b, ssr), np.where(bind, pi1_b, pi1), np.where(bind, beta, pi2)


def _golden(f, lo, hi, tol=1e-10):
    phi = (math.sqrt(5) - 1) / 2
    x1, x2 = hi - phi * (hi - lo), lo + phi * (hi - lo)
    f1, f2 = f(x1), f(x2)
    while hi - lo > tol:
        if f1 <= f2:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - phi * (hi - lo)
            f1 = f(x1)
        else:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + phi * (hi - lo)
            f2 = f(x2)
    return (x1, f1) if f1 <= f2 else (x2, f2)


def _refine(f, grid, vals, j):
    lo = grid[max(j - 1, 0)]
    hi = grid[min(j + 1, grid.size - 1)]
    x, fx = _golden(f, lo, hi)
    # endpoints of the bracket are legitimate candidates too
    for e in (lo, hi, grid[j]):
        fe = f(e)
        if fe < fx or (fe == fx and e < x):
            x, fx = e, fe
    return x, fx


def fit_weakid_model(design: ToyModelDesign, seed: int | None = None, data: ToyData | None = None) -> WeakIdFit:
    """Least squares over ``{0 <= β <= π2}`` by profiling out ``(π1, π2)``.

    The profile is tabulated on ``grid_points`` β values in ``[0, β_max]``,
    where beyond ``β_max`` the constraint ``π2 >= β`` provably costs more
    than the best value at ``β = 0``; the best grid point is refined by
    golden-section search to 1e-10.
    """
    if design.variant != "weakid":
        raise DesignError("fit_weakid_model needs a weakid design")
    if data is None:
        data = simulate_toy_data(design, seed)
    X, y = data.X, data.y
    S = X.T @ X
    c = X.T @ y
    yy = float(y @ y)
    Sinv = np.linalg.inv(S)
    full = Sinv @ c
    ssr_full = yy - float(c @ full)
    f = lambda b: float(_profile_ssr(b, S, c, yy)[0])  # noqa: E731
    ssr0 = f(0.0)
    reach = math.sqrt(max(ssr0 - ssr_full, 0.0) * Sinv[2, 2])
    beta_max = max(full[2] + reach, 0.0) * (1 + 1e-9) + 1e-12
    grid = np.linspace(0.0, beta_max, design.grid_points)
    vals = _profile_ssr(grid, S, c, yy)[0]
    order = np.argsort(vals, kind="stable")
    j = int(order[0])
    beta_hat, ssr_hat = _refine(f, grid, vals, j)
    # the best non-adjacent local minimum must not beat the refined optimum
    is_min = np.r_[True, vals[1:] <= vals[:-1]] & np.r_[vals[:-1] <= vals[1:], True]
    rivals = [i for i in np.flatnonzero(is_min) if abs(i - j) > 1]
    if rivals:
        i = min(rivals, key=lambda i: (vals[i], i))
        x2, f2 = _refine(f, grid, vals, i)
        if f2 < ssr_hat - 1e-10 * (1 + abs(ssr_hat)):
            raise ProfileGridError(
                f"refinement near β={x2:.6g} beats the grid optimum near β={beta_hat:.6g}; use a finer grid"
            )
    _, pi1, pi2 = _profile_ssr(beta_hat, S, c, yy)
    pi_hat = np.array([float(pi1), float(pi2)])
    rn = math.sqrt(design.n)
    h_pi = rn * (pi_hat - design.pi_n)
    weak = np.concatenate([[beta_hat], h_pi])
    semi = np.concatenate([[design.a_n * (beta_hat - design.beta_n)], h_pi])
    return WeakIdFit(beta_hat, pi_hat, weak, semi, ssr_hat, design.seed if seed is None else seed)

