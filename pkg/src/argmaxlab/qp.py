"""Strictly concave quadratic maximization over a polyhedron.

Solves ``max_h h'Z - 0.5 h'Vh  s.t.  b + G h <= 0`` with a primal
active-set method.  Working-set constraints are added and dropped in
lowest-index-first order so the iterates are deterministic.  Every
returned solution carries a KKT certificate.

A vectorized variant (:func:`maximize_quadratic_batch`) solves many
right-hand sides over the same polyhedron by enumerating candidate
active sets; it is exact for the small constraint counts used here.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve
from scipy.optimize import linprog

from .errors import DimensionError, InfeasibleError, IterationLimitError

KKT_TOL = 1e-8
FEAS_TOL = 1e-9


@dataclass(frozen=True)
class QPResult:
    h: np.ndarray
    multipliers: np.ndarray  # one per active (finite) row, zero when inactive
    active: tuple[int, ...]
    iterations: int
    stationarity: float
    complementarity: float
    primal_violation: float


def _as_problem(V, Z, G, b):
    V = np.atleast_2d(np.asarray(V, dtype=float))
    Z = np.atleast_1d(np.asarray(Z, dtype=float))
    d = V.shape[0]
    if V.shape != (d, d) or Z.shape != (d,):
        raise DimensionError(f"V is {V.shape}, Z is {Z.shape}")
    G = np.asarray(G, dtype=float).reshape(-1, d)
    b = np.asarray(b, dtype=float).reshape(-1)
    if G.shape[0] != b.shape[0]:
        raise DimensionError(f"G has {G.shape[0]} rows but b has {b.shape[0]}")
    return V, Z, G, b


def feasible_point(G, b, d):
    """A point with ``b + G h <= 0`` or ``None`` if the polyhedron is empty."""
    G = np.asarray(G, dtype=float).reshape(-1, d)
    b = np.asarray(b, dtype=float).reshape(-1)
    if G.shape[0] == 0 or np.all(b <= 0):
        return np.zeros(d)
    res = linprog(
        np.zeros(d), A_ub=G, b_ub=-b, bounds=[(None, None)] * d, method="highs"
    )
    if res.status != 0:
        return None
    x = np.asarray(res.x, dtype=float)
    if np.max(b + G @ x) > 1e-7:
        return None
    return x


def _independent_subset(rows, G):
    chosen = []
    for j in rows:
        cand = G[chosen + [j]]
        if np.linalg.matrix_rank(cand, tol=1e-10) == len(chosen) + 1:
            chosen.append(j)
    return chosen


def kkt_residuals(V, Z, G, b, h, mu):
    """(stationarity, complementarity, primal violation) for a candidate."""
    grad = Z - V @ h - G.T @ mu
    slack = b + G @ h
    stat = float(np.linalg.norm(grad)) if grad.size else 0.0
    comp = float(np.max(np.abs(mu * slack))) if slack.size else 0.0
    viol = float(max(np.max(slack), 0.0)) if slack.size else 0.0
    return stat, comp, viol


def maximize_quadratic(V, Z, G=None, b=None, *, x0=None, max_iter=None) -> QPResult:
    """Maximize ``h'Z - 0.5 h'Vh`` subject to ``b + G h <= 0``.

    ``V`` must be positive definite.  Rows of ``(G, b)`` are all treated
    as active constraints; callers drop ``-inf`` rows beforehand.

    Raises
    ------
    InfeasibleError
        The polyhedron is empty.
    IterationLimitError
        More than ``10 * d_g * d`` active-set iterations were needed.
    """
    d = np.atleast_2d(V).shape[0]
    if G is None:
        G, b = np.zeros((0, d)), np.zeros(0)
    V, Z, G, b = _as_problem(V, Z, G, b)
    m = G.shape[0]
    chol = cho_factor(V)
    x_free = cho_solve(chol, Z)
    if m == 0 or np.all(b + G @ x_free <= 0):
        mu = np.zeros(m)
        stat, comp, viol = kkt_residuals(V, Z, G, b, x_free, mu)
        return QPResult(x_free, mu, (), 0, stat, comp, viol)

    if max_iter is None:
        max_iter = max(10 * m * d, 10)
    x = feasible_point(G, b, d) if x0 is None else np.asarray(x0, dtype=float)
    if x is None:
        raise InfeasibleError("polyhedron {h : b + G h <= 0} is empty")
    if np.max(b + G @ x) > 1e-7:
        raise InfeasibleError("starting point is not feasible")

    c = -b
    Vinv_At = cho_solve(chol, G.T)  # d x m
    tight = [j for j in range(m) if abs(G[j] @ x - c[j]) <= 1e-10 * (1 + abs(c[j]))]
    W = _independent_subset(tight, G)

    def solve_eqp(W):
        if not W:
            return x_free.copy(), np.zeros(0)
        A = G[W]
        S = A @ Vinv_At[:, W]
        rhs = A @ x_free - c[W]
        lam = np.linalg.solve(S, rhs)
        return x_free - Vinv_At[:, W] @ lam, lam

    for it in range(1, max_iter + 1):
        x_eq, lam = solve_eqp(W)
        p = x_eq - x
        if np.max(np.abs(p)) <= 1e-12 * (1.0 + np.max(np.abs(x))):
            x = x_eq
            if not W or np.min(lam) >= -1e-12:
                mu = np.zeros(m)
                mu[W] = np.maximum(lam, 0.0)
                stat, comp, viol = kkt_residuals(V, Z, G, b, x, mu)
                return QPResult(x, mu, tuple(sorted(W)), it, stat, comp, viol)
            drop = int(np.argmin(lam))  # argmin returns the lowest index on ties
            W = W[:drop] + W[drop + 1 :]
            continue
        alpha, blocking = 1.0, None
        Ap = G @ p
        for j in range(m):
            if j in W or Ap[j] <= 1e-14:
                continue
            ratio = (c[j] - G[j] @ x) / Ap[j]
            if ratio < alpha:
                alpha, blocking = max(ratio, 0.0), j
        x = x + alpha * p
        if blocking is not None:
            W = sorted(W + [blocking])
    raise IterationLimitError(
        f"active-set iteration cap {max_iter} exceeded",
        diagnostics={"working_set": list(W), "x": x.tolist()},
    )


def maximize_quadratic_batch(V, Zs, G=None, b=None):
    """Solve many problems sharing ``(V, G, b)``; returns (H, active_mask, mu).

    Candidate active sets are visited in order of size then lexicographic
    index; the first one satisfying primal and dual feasibility is the
    unique KKT point of the strictly concave problem.
    """
    V = np.atleast_2d(np.asarray(V, dtype=float))
    d = V.shape[0]
    Zs = np.asarray(Zs, dtype=float).reshape(-1, d)
    if G is None:
        G, b = np.zeros((0, d)), np.zeros(0)
    G = np.asarray(G, dtype=float).reshape(-1, d)
    b = np.asarray(b, dtype=float).reshape(-1)
    m = G.shape[0]
    N = Zs.shape[0]
    chol = cho_factor(V)
    X_free = cho_solve(chol, Zs.T).T
    H = np.full((N, d), np.nan)
    MU = np.zeros((N, m))
    ACT = np.zeros((N, m), dtype=bool)
    if m == 0:
        return X_free, np.zeros((N, 0), dtype=bool), MU
    if feasible_point(G, b, d) is None:
        raise InfeasibleError("polyhedron {h : b + G h <= 0} is empty")
    c = -b
    Vinv_At = cho_solve(chol, G.T)
    todo = np.ones(N, dtype=bool)
    for size in range(0, min(m, d) + 1):
        for W in itertools.combinations(range(m), size):
            if not todo.any():
                break
            W = list(W)
            idx = np.flatnonzero(todo)
            if size == 0:
                X = X_free[idx]
                lam = np.zeros((idx.size, 0))
            else:
                A = G[W]
                if np.linalg.matrix_rank(A, tol=1e-10) < size:
                    continue
                S = A @ Vinv_At[:, W]
                rhs = X_free[idx] @ A.T - c[W]
                lam = np.linalg.solve(S, rhs.T).T
                X = X_free[idx] - lam @ Vinv_At[:, W].T
            ok = np.all(X @ G.T - c <= 1e-10 * (1 + np.abs(c)), axis=1)
            if size:
                ok &= np.all(lam >= -1e-12, axis=1)
            hit = idx[ok]
            H[hit] = X[ok]
            if size:
                MU[np.ix_(hit, W)] = np.maximum(lam[ok], 0.0)
                ACT[np.ix_(hit, W)] = True
            todo[hit] = False
    if todo.any():
        # fall back to the sequential solver for anything left unresolved
        for i in np.flatnonzero(todo):
            res = maximize_quadratic(V, Zs[i], G, b)
            H[i], MU[i] = res.h, res.multipliers
            ACT[i, list(res.active)] = True
    return H, ACT, MU
