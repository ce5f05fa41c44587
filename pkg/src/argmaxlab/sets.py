"""Concrete subsets of R^d, set distances and numeric Painleve-Kuratowski limits.

Two representations are supported: finite point clouds (:class:`GridSet`)
and polyhedra ``{x : b + G x <= 0}`` (:class:`PolyhedralSet`).  A
:class:`SetSequence` maps an index ``n`` to one of these, optionally
followed by an affine rescaling ``x -> s_n (x - c_n)``.

Empty-set conventions: ``d(h, {}) = inf`` and ``dist({}, B) = 0``.
"""

from __future__ import annotations

import json
import math
import warnings
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog
from scipy.spatial import cKDTree

from .errors import DesignError, DimensionError
from .qp import feasible_point, maximize_quadratic

FEAS_TOL = 1e-9
SIG_DIGITS = 12


def round_sig(a, digits: int = SIG_DIGITS) -> np.ndarray:
    """Round every entry of ``a`` to ``digits`` significant decimal digits."""
    a = np.asarray(a, dtype=float)
    out = a.copy()
    # subnormal-range values would overflow the scale factor; leave them as is
    nz = np.isfinite(a) & (np.abs(a) >= 1e-290)
    if np.any(nz):
        exp = np.floor(np.log10(np.abs(a[nz])))
        scale = 10.0 ** (digits - 1 - exp)
        out[nz] = np.round(a[nz] * scale) / scale
    return out + 0.0  # folds -0.0 into 0.0


def greatest_integer(x: float) -> int:
    # guards against 0.29 * 100 = 28.999999999999996
    return math.floor(round(x, 9))


class GridSet:
    """Finite subset of R^dim, stored sorted and duplicate-free.

    Coordinates are canonicalized to 12 significant digits before
    duplicates are merged, so set identities are bit-stable.
    """

    __slots__ = ("points", "dim", "_tree")

    def __init__(self, points, dim: int | None = None):
        pts = np.asarray(points, dtype=float)
        if pts.ndim == 1:
            if dim is None or dim == 1:
                pts = pts.reshape(-1, 1)
            else:
                pts = pts.reshape(-1, dim)
        if pts.ndim != 2:
            raise DimensionError("points must be a 2-D array of shape (m, dim)")
        if dim is None:
            dim = pts.shape[1]
        if pts.shape[1] != dim:
            raise DimensionError(f"points have dimension {pts.shape[1]}, expected {dim}")
        if dim < 1:
            raise DimensionError("dim must be positive")
        if pts.shape[0]:
            if not np.all(np.isfinite(pts)):
                raise DesignError("GridSet points must be finite")
            pts = np.unique(round_sig(pts), axis=0)
        else:
            pts = np.zeros((0, dim))
        pts.setflags(write=False)
        self.points = pts
        self.dim = int(dim)
        self._tree = None

    def __len__(self):
        return self.points.shape[0]

    def __repr__(self):
        if len(self) <= 6:
            return f"GridSet({self.points.squeeze(-1).tolist() if self.dim == 1 else self.points.tolist()})"
        return f"GridSet(<{len(self)} points in R^{self.dim}>)"

    def __eq__(self, other):
        return (
            isinstance(other, GridSet)
            and self.dim == other.dim
            and self.points.shape == other.points.shape
            and bool(np.all(self.points == other.points))
        )

    def __hash__(self):
        return hash((self.dim, self.points.tobytes()))

    @property
    def is_empty(self) -> bool:
        return len(self) == 0

    def tree(self) -> cKDTree:
        if self._tree is None:
            self._tree = cKDTree(self.points)
        return self._tree

    def distances(self, queries) -> np.ndarray:
        """Distance from each query point to the set (``inf`` if empty).

        Queries get the same canonical rounding as stored points, so any
        point used to build the set is at distance exactly 0.
        """
        q = round_sig(_as_points(queries, self.dim))
        if self.is_empty:
            return np.full(q.shape[0], np.inf)
        if self.dim == 1:
            xs = self.points[:, 0]
            pos = np.searchsorted(xs, q[:, 0])
            left = np.abs(q[:, 0] - xs[np.clip(pos - 1, 0, len(xs) - 1)])
            right = np.abs(xs[np.clip(pos, 0, len(xs) - 1)] - q[:, 0])
            return np.minimum(left, right)
        dist, _ = self.tree().query(q)
        return np.asarray(dist, dtype=float)

    def contains(self, h, tol: float = FEAS_TOL) -> bool:
        return bool(self.distances(h)[0] <= tol)

    def select(self, predicate: Callable[[np.ndarray], np.ndarray]) -> GridSet:
        """Subset of points where ``predicate(points)`` is true."""
        mask = np.asarray(predicate(self.points), dtype=bool).reshape(-1)
        return GridSet(self.points[mask], self.dim)

    def intersect_box(self, box: Box) -> GridSet:
        return self.select(box.contains)

    def affine(self, center, scale) -> GridSet:
        """Image under ``x -> scale * (x - center)``."""
        return GridSet(np.asarray(scale) * (self.points - np.asarray(center)), self.dim)

    def to_csv(self, path) -> None:
        with open(path, "w") as fh:
            for row in self.points:
                fh.write(",".join(repr(float(v)) for v in row) + "\n")

    @classmethod
    def from_csv(cls, path, dim: int | None = None) -> GridSet:
        rows = []
        with open(path) as fh:
            for line in fh:
                line = line.strip()
                if line:
                    rows.append([float(v) for v in line.split(",")])
        if not rows:
            return cls(np.zeros((0, dim or 1)), dim or 1)
        return cls(np.array(rows), dim)


def _as_points(h, dim: int) -> np.ndarray:
    q = np.asarray(h, dtype=float)
    if q.ndim == 0:
        q = q.reshape(1, 1)
    elif q.ndim == 1:
        q = q.reshape(1, -1) if q.shape[0] == dim else q.reshape(-1, 1)
    if q.shape[1] != dim:
        raise DimensionError(f"point of dimension {q.shape[1]} vs set of dimension {dim}")
    return q


@dataclass(frozen=True)
class Box:
    """Axis-aligned compact box ``[lower, upper]``."""

    lower: np.ndarray
    upper: np.ndarray

    def __init__(self, lower, upper):
        lo = np.atleast_1d(np.asarray(lower, dtype=float))
        hi = np.atleast_1d(np.asarray(upper, dtype=float))
        if lo.shape != hi.shape or np.any(hi < lo):
            raise DesignError("box needs matching bounds with lower <= upper")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @property
    def dim(self) -> int:
        return self.lower.shape[0]

    def contains(self, pts) -> np.ndarray:
        pts = _as_points(pts, self.dim)
        tol = 1e-12 * (1 + np.maximum(np.abs(self.lower), np.abs(self.upper)))
        return np.all((pts >= self.lower - tol) & (pts <= self.upper + tol), axis=1)

    def grid(self, step: float) -> GridSet:
        axes = []
        for lo, hi in zip(self.lower, self.upper):
            m = int(math.floor((hi - lo) / step + 1e-9))
            axes.append(lo + step * np.arange(m + 1))
        mesh = np.meshgrid(*axes, indexing="ij")
        return GridSet(np.column_stack([g.ravel() for g in mesh]), self.dim)


class PolyhedralSet:
    """``{x in R^dim : b + G x <= feas_tol}``; rows with ``b_j = -inf`` are absent.

    Dropped rows are kept only as a per-row flag; the stored ``b`` never
    holds an infinite value, so ``b + G x`` is always finite.
    """

    __slots__ = ("G", "b", "dropped", "dim")

    def __init__(self, G, b, dim: int | None = None):
        b_in = np.atleast_1d(np.asarray(b, dtype=float))
        G = np.asarray(G, dtype=float)
        if dim is None:
            dim = G.shape[1] if G.ndim == 2 else (G.size // max(b_in.size, 1) or 1)
        G = G.reshape(b_in.size, dim) if G.size or b_in.size else np.zeros((0, dim))
        if G.shape[0] != b_in.shape[0]:
            raise DimensionError(f"G has {G.shape[0]} rows but b has {b_in.shape[0]} entries")
        if np.any(np.isnan(b_in)) or np.any(b_in == np.inf):
            raise DesignError("b entries must be finite or -inf")
        dropped = np.isneginf(b_in)
        b_fin = np.where(dropped, 0.0, b_in)
        for arr in (G, b_fin, dropped):
            arr.setflags(write=False)
        self.G = G
        self.b = b_fin
        self.dropped = dropped
        self.dim = int(dim)

    @classmethod
    def full_space(cls, dim: int) -> PolyhedralSet:
        return cls(np.zeros((0, dim)), np.zeros(0), dim)

    def __repr__(self):
        return f"PolyhedralSet(G={self.G_active.tolist()}, b={self.b_active.tolist()}, dim={self.dim})"

    @property
    def G_active(self) -> np.ndarray:
        return self.G[~self.dropped]

    @property
    def b_active(self) -> np.ndarray:
        return self.b[~self.dropped]

    @property
    def n_active(self) -> int:
        return int(np.count_nonzero(~self.dropped))

    def slack(self, pts) -> np.ndarray:
        """``b + G x`` on active rows, shape (m, n_active)."""
        pts = _as_points(pts, self.dim)
        return pts @ self.G_active.T + self.b_active

    def contains(self, pts, tol: float = FEAS_TOL):
        pts_arr = _as_points(pts, self.dim)
        s = pts_arr @ self.G_active.T + self.b_active
        inside = np.all(s <= tol, axis=1)
        return bool(inside[0]) if inside.size == 1 else inside

    @property
    def is_empty(self) -> bool:
        return feasible_point(self.G_active, self.b_active, self.dim) is None

    def project(self, h) -> np.ndarray:
        """Euclidean projection of ``h`` onto the set."""
        h = np.asarray(h, dtype=float).reshape(self.dim)
        res = maximize_quadratic(np.eye(self.dim), h, self.G_active, self.b_active)
        return res.h

    def distances(self, queries) -> np.ndarray:
        q = _as_points(queries, self.dim)
        if self.n_active == 0:
            return np.zeros(q.shape[0])
        if self.is_empty:
            return np.full(q.shape[0], np.inf)
        out = np.empty(q.shape[0])
        inside = np.all(q @ self.G_active.T + self.b_active <= FEAS_TOL, axis=1)
        out[inside] = 0.0
        for i in np.flatnonzero(~inside):
            out[i] = float(np.linalg.norm(self.project(q[i]) - q[i]))
        return out

    def affine(self, center, scale) -> PolyhedralSet:
        """Image under ``x -> scale * (x - center)``."""
        center = np.broadcast_to(np.asarray(center, dtype=float), (self.dim,))
        scale = np.broadcast_to(np.asarray(scale, dtype=float), (self.dim,))
        b_new = np.where(self.dropped, -np.inf, self.b + self.G @ center)
        return PolyhedralSet(self.G / scale, b_new, self.dim)

    def to_json(self) -> str:
        b = ["-inf" if d else float(v) for v, d in zip(self.b, self.dropped)]
        return json.dumps({"G": self.G.tolist(), "b": b, "dim": self.dim})

    @classmethod
    def from_json(cls, text: str) -> PolyhedralSet:
        obj = json.loads(text)
        b = [-np.inf if v == "-inf" else float(v) for v in obj["b"]]
        G = np.asarray(obj["G"], dtype=float).reshape(len(b), obj["dim"])
        return cls(G, b, obj["dim"])


SetLike = GridSet | PolyhedralSet


def point_to_set_distance(h, S: SetLike) -> float:
    """Euclidean ``inf_{g in S} |h - g|``; ``inf`` for an empty set."""
    q = np.atleast_1d(np.asarray(h, dtype=float))
    if q.shape[0] != S.dim:
        raise DimensionError(f"point of dimension {q.shape[0]} vs set of dimension {S.dim}")
    return float(S.distances(q.reshape(1, -1))[0])


def directed_distance(A: GridSet, B: SetLike) -> float:
    """``sup_{a in A} d(a, B)``, zero when ``A`` is empty."""
    if A.dim != B.dim:
        raise DimensionError(f"dimension mismatch: {A.dim} vs {B.dim}")
    if A.is_empty:
        return 0.0
    return float(np.max(B.distances(A.points)))


@dataclass(frozen=True)
class SetSequence:
    """``n -> scale(n) * (family(n) - center(n))``."""

    family: Callable[[int], SetLike]
    center: Callable[[int], np.ndarray | float] | None = None
    scale: Callable[[int], np.ndarray | float] | None = None
    description: str = ""

    def raw(self, n: int) -> SetLike:
        return self.family(n)

    def __call__(self, n: int) -> SetLike:
        S = self.family(n)
        if self.center is None and self.scale is None:
            return S
        c = 0.0 if self.center is None else self.center(n)
        s = 1.0 if self.scale is None else self.scale(n)
        return S.affine(c, s)

    def restrict(self, predicate: Callable[[np.ndarray], np.ndarray], description: str = "") -> SetSequence:
        """Sequence ``n -> self(n) ∩ F`` for a closed set given by a point predicate."""

        def fam(n):
            S = self(n)
            if not isinstance(S, GridSet):
                raise TypeError("restriction by predicate needs GridSet members")
            return S.select(predicate)

        return SetSequence(fam, description=description or f"{self.description} ∩ F")


@dataclass
class PKDiagnostics:
    schedule: list[int]
    limit_to_sequence: list[float]  # dist(limit ∩ K, Λ_n)
    sequence_to_limit: list[float]  # dist(Λ_n ∩ K, limit)
    resolution: float
    converged: bool
    notes: list[str] = field(default_factory=list)


def _eventually_small(seq, floor, tol):
    excess = np.maximum(np.asarray(seq, dtype=float) - floor, 0.0)
    if not np.all(np.isfinite(excess)):
        return False
    nonincreasing = bool(np.all(np.diff(excess) <= 1e-12))
    return nonincreasing and excess[-1] <= tol


def pk_limit_estimate(
    seq: SetSequence,
    K: Box,
    n_schedule: Sequence[int],
    grid_step: float,
    *,
    conv_tol: float | None = None,
) -> tuple[GridSet, PKDiagnostics]:
    """Grid estimate of the Painleve-Kuratowski limit of ``seq`` inside ``K``.

    A grid point ``h`` of ``K`` is kept when ``max(d(h, Λ_m), d(h, Λ_n))``
    over the last two schedule entries ``m < n`` is below ``2 * grid_step``
    and ``d(h, Λ_n)`` is within the half-cell resolution radius
    ``sqrt(d) * grid_step / 2``.  The second test rejects neighbours of a
    limit point that are merely close, not approached.

    ``converged`` requires both directed-distance diagnostics to be
    non-increasing over the schedule once the grid resolution floor is
    subtracted, with final excess at most ``conv_tol`` (default
    ``grid_step``).
    """
    n_schedule = [int(n) for n in n_schedule]
    if not n_schedule:
        raise ValueError("n_schedule must not be empty")
    if len(n_schedule) < 3 or any(b <= a for a, b in zip(n_schedule, n_schedule[1:])):
        raise ValueError("n_schedule must be strictly increasing with at least 3 entries")
    if grid_step <= 0:
        raise ValueError("grid_step must be positive")
    conv_tol = grid_step if conv_tol is None else conv_tol

    grid = K.grid(grid_step)
    radius = math.sqrt(K.dim) * grid_step / 2 * (1 + 1e-9)
    sets = [seq(n) for n in n_schedule]
    for S in sets:
        if S.dim != K.dim:
            raise DimensionError(f"sequence lives in R^{S.dim}, box in R^{K.dim}")

    d_prev = sets[-2].distances(grid.points) if not grid.is_empty else np.zeros(0)
    d_last = sets[-1].distances(grid.points) if not grid.is_empty else np.zeros(0)
    keep = (np.maximum(d_prev, d_last) < 2 * grid_step) & (d_last <= radius)
    limit = GridSet(grid.points[keep], K.dim)

    in_K = []
    for S in sets:
        if isinstance(S, GridSet):
            in_K.append(S.intersect_box(K))
        else:
            # polyhedra are compared through their grid trace
            in_K.append(grid.select(lambda p, S=S: S.contains(p, tol=FEAS_TOL)))

    lim_to_seq = [directed_distance(limit, S) for S in sets]
    seq_to_lim = [directed_distance(S, limit) for S in in_K]
    notes = []
    if all(S.is_empty for S in in_K):
        converged = True
        notes.append("every Λ_n ∩ K is empty")
    else:
        converged = _eventually_small(lim_to_seq, radius, conv_tol) and _eventually_small(
            seq_to_lim, radius, conv_tol
        )
    return limit, PKDiagnostics(n_schedule, lim_to_seq, seq_to_lim, radius, converged, notes)


# --- rescaled constructions -------------------------------------------------


def break_date_set(T: int, lambda1: float, lambda2: float) -> np.ndarray:
    """Candidate break dates ``{[λ1 T], ..., [λ2 T]}``."""
    if not (0 < lambda1 < lambda2 < 1):
        raise DesignError(f"trimming requires 0 < lambda1 < lambda2 < 1, got {lambda1}, {lambda2}")
    return np.arange(greatest_integer(lambda1 * T), greatest_integer(lambda2 * T) + 1)


def rescaled_break_set(T: int, k0: int, vT: float, lambda1: float, lambda2: float) -> GridSet:
    """``v_T^2 (Λ_T - k0)`` as a one-dimensional GridSet."""
    if not (0 < lambda1 < lambda2 < 1):
        raise DesignError(f"trimming requires 0 < lambda1 < lambda2 < 1, got {lambda1}, {lambda2}")
    if not 1 <= k0 <= T:
        raise DesignError(f"k0={k0} outside 1..{T}")
    if vT <= 0:
        raise DesignError("vT must be positive")
    ks = break_date_set(T, lambda1, lambda2)
    return GridSet((vT**2) * (ks - k0).astype(float), 1)


def linearized_boundary_set(b, G) -> PolyhedralSet:
    """``{λ : b + G λ <= 0}`` with ``-inf`` rows of ``b`` dropped."""
    b = np.atleast_1d(np.asarray(b, dtype=float))
    G = np.asarray(G, dtype=float)
    if G.ndim == 1:
        G = G.reshape(b.size, -1)
    if G.shape[0] != b.size:
        raise DimensionError(f"G has {G.shape[0]} rows but b has {b.size}")
    if np.any(b > 0):
        raise DesignError("b must lie in [-inf, 0]")
    return PolyhedralSet(G, b, G.shape[1])


@dataclass(frozen=True)
class MFCQResult:
    holds: bool
    witness: np.ndarray | None
    min_slack: float  # max over the unit box of min_j -(b_j + G_j λ)


def mfcq_check(P: PolyhedralSet, tol: float = 1e-9) -> MFCQResult:
    """Is there a λ with ``b + G λ < 0`` strictly on every active row?

    Solved as ``max t  s.t.  b_j + G_j λ + t <= 0, t <= 1, λ in [-1, 1]^d``.
    Scaling a witness towards 0 keeps it a witness when ``b <= 0``, so
    the box loses nothing.
    """
    G, b = P.G_active, P.b_active
    d = P.dim
    if G.shape[0] == 0:
        return MFCQResult(True, np.zeros(d), math.inf)
    c = np.zeros(d + 1)
    c[-1] = -1.0
    A_ub = np.hstack([G, np.ones((G.shape[0], 1))])
    bounds = [(-1.0, 1.0)] * d + [(None, 1.0)]
    res = linprog(c, A_ub=A_ub, b_ub=-b, bounds=bounds, method="highs")
    if res.status != 0:
        return MFCQResult(False, None, -math.inf)
    t = float(res.x[-1])
    lam = np.asarray(res.x[:d], dtype=float)
    return MFCQResult(t > tol, lam if t > tol else None, t)


@dataclass(frozen=True)
class WeakIdLimitSets:
    """β-direction factors of the weak and semi-strong limit sets.

    Both limits are products with the full π space of dimension ``d_pi``.
    """

    weak: PolyhedralSet
    semistrong: PolyhedralSet
    d_pi: int
    mfcq: MFCQResult
    warnings: tuple[str, ...] = ()


def weakid_sets_from(G_beta, G_pi, offset, pi0, b) -> WeakIdLimitSets:
    """Limit sets for affine constraints ``G_beta β + G_pi π + offset <= 0``.

    ``b`` is the limit of ``a_n g(β_n, π_n)`` (entries in ``[-inf, 0]``).
    """
    G_beta = np.atleast_2d(np.asarray(G_beta, dtype=float))
    if G_beta.shape[0] == 1 and np.asarray(offset).size > 1:
        G_beta = G_beta.T
    G_pi = np.atleast_2d(np.asarray(G_pi, dtype=float))
    offset = np.atleast_1d(np.asarray(offset, dtype=float))
    pi0 = np.atleast_1d(np.asarray(pi0, dtype=float))
    d_pi = pi0.size
    weak = PolyhedralSet(G_beta, G_pi @ pi0 + offset, G_beta.shape[1])
    semi = linearized_boundary_set(b, G_beta)
    mf = mfcq_check(semi)
    notes = ()
    if not mf.holds:
        notes = ("MFCQ fails for the semi-strong limit set; the PK limit hypothesis is unmet",)
        warnings.warn(notes[0], stacklevel=2)
    return WeakIdLimitSets(weak, semi, d_pi, mf, notes)


def sup_difference_gap(f, g) -> tuple[float, float]:
    """``(|max f - max g|, max |f - g|)`` for two functions tabulated on a common set."""
    f = np.asarray(f, dtype=float)
    g = np.asarray(g, dtype=float)
    if f.shape != g.shape or f.size == 0:
        raise DimensionError("f and g must be tabulated on the same nonempty set")
    return float(abs(f.max() - g.max())), float(np.max(np.abs(f - g)))


# --- built-in sequence families ---------------------------------------------


def remark3_sequence() -> SetSequence:
    """``Λ_n = {1/n, 1 - 1/n}``."""
    return SetSequence(lambda n: GridSet([1.0 / n, 1.0 - 1.0 / n], 1), description="{1/n, 1-1/n}")


def remark3_closed_set(points: np.ndarray) -> np.ndarray:
    """Membership in ``F = [0, 1/2] ∪ {1}``."""
    x = np.asarray(points, dtype=float).reshape(-1)
    return ((x >= 0) & (x <= 0.5)) | (x == 1.0)


def break_sequence(
    lambda1: float,
    lambda2: float,
    kappa: float = 0.25,
    *,
    tau: float | None = None,
    a: float | None = None,
) -> SetSequence:
    """``T -> v_T^2 (Λ_T - k0)`` with ``v_T = T^-kappa``.

    With ``tau`` the break sits at ``k0 = [tau T]``; with ``a`` it sits at
    ``k0 = [λ2 T - a v_T^-2]`` so that ``v_T^2([λ2 T] - k0) -> a``.
    """
    if (tau is None) == (a is None):
        raise ValueError("give exactly one of tau or a")

    def fam(T):
        vT = T ** (-kappa)
        if tau is not None:
            k0 = greatest_integer(tau * T)
        else:
            k0 = greatest_integer(lambda2 * T - a * vT ** (-2))
        return rescaled_break_set(T, k0, vT, lambda1, lambda2)

    desc = f"v_T^2(Λ_T - k0), kappa={kappa}, " + (f"tau={tau}" if tau is not None else f"a={a}")
    return SetSequence(fam, description=desc)


def constant_sequence(S: SetLike) -> SetSequence:
    return SetSequence(lambda n: S, description="constant")

