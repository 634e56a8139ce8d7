"""Dense two-phase simplex solver and a brute-force vertex oracle.

Problems are stated as::

    maximize    c^T x
    subject to  A_ub x <= b_ub
                A_eq x == b_eq
                x >= 0

The solver uses Bland's rule throughout, so its output is a deterministic
function of the input and it cannot cycle.
"""
from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import Cycling, MalformedProblem, TooLarge

log = logging.getLogger(__name__)

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"

PIVOT_TOL = 1e-9
ORACLE_MAX_VARS = 8


def _as_matrix(M, n: int, name: str) -> np.ndarray:
    if M is None:
        return np.zeros((0, n))
    M = np.array(M, dtype=float)
    if M.ndim == 1 and M.size == 0:
        return np.zeros((0, n))
    if M.ndim != 2 or M.shape[1] != n:
        raise MalformedProblem(f"{name} must have shape (m, {n}), got {M.shape}")
    return M


def _as_vector(v, m: int, name: str) -> np.ndarray:
    if v is None:
        v = np.zeros(0)
    v = np.array(v, dtype=float).reshape(-1)
    if v.shape != (m,):
        raise MalformedProblem(f"{name} must have length {m}, got {v.size}")
    return v


@dataclass(frozen=True)
class LpProblem:
    c: np.ndarray
    A_ub: Optional[np.ndarray] = None
    b_ub: Optional[np.ndarray] = None
    A_eq: Optional[np.ndarray] = None
    b_eq: Optional[np.ndarray] = None

    def __post_init__(self):
        c = np.array(self.c, dtype=float).reshape(-1)
        n = c.size
        if n == 0:
            raise MalformedProblem("problem has no variables")
        A_ub = _as_matrix(self.A_ub, n, "A_ub")
        b_ub = _as_vector(self.b_ub, A_ub.shape[0], "b_ub")
        A_eq = _as_matrix(self.A_eq, n, "A_eq")
        b_eq = _as_vector(self.b_eq, A_eq.shape[0], "b_eq")
        for name, arr in (("c", c), ("A_ub", A_ub), ("b_ub", b_ub), ("A_eq", A_eq), ("b_eq", b_eq)):
            if not np.all(np.isfinite(arr)):
                raise MalformedProblem(f"{name} contains NaN or Inf")
            arr.setflags(write=False)
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "A_ub", A_ub)
        object.__setattr__(self, "b_ub", b_ub)
        object.__setattr__(self, "A_eq", A_eq)
        object.__setattr__(self, "b_eq", b_eq)

    @property
    def n_vars(self) -> int:
        return self.c.size

    @property
    def n_constraints(self) -> int:
        return self.A_ub.shape[0] + self.A_eq.shape[0]

    def is_feasible(self, x, tol: float = 1e-8) -> bool:
        x = np.asarray(x, dtype=float)
        return bool(
            np.all(x >= -tol)
            and np.all(self.A_ub @ x <= self.b_ub + tol)
            and np.all(np.abs(self.A_eq @ x - self.b_eq) <= tol)
        )


@dataclass(frozen=True)
class LpSolution:
    status: str
    x: Optional[np.ndarray] = None
    objective_value: Optional[float] = None
    iterations: int = 0


class _Tableau:
    """Dense tableau; the last row holds reduced costs, the last column the rhs."""

    def __init__(self, T: np.ndarray, basis: list[int], cap: int):
        self.T = T
        self.basis = basis
        self.cap = cap
        self.iterations = 0

    def pivot(self, r: int, s: int) -> None:
        T = self.T
        T[r] /= T[r, s]
        col = T[:, s].copy()
        col[r] = 0.0
        T -= np.outer(col, T[r])
        T[:, s] = 0.0
        T[r, s] = 1.0
        self.basis[r] = s

    def run(self, allowed: int) -> bool:
        """Pivot to optimality over the first ``allowed`` columns.

        Returns False if the objective is unbounded.
        """
        T = self.T
        m = T.shape[0] - 1
        while True:
            if log.isEnabledFor(logging.DEBUG):
                log.debug("iteration %d basis=%s\n%s", self.iterations, self.basis, format_tableau(T))
            costs = T[m, :allowed]
            candidates = np.flatnonzero(costs < -PIVOT_TOL)
            if candidates.size == 0:
                return True
            s = int(candidates[0])
            column = T[:m, s]
            rows = np.flatnonzero(column > PIVOT_TOL)
            if rows.size == 0:
                return False
            ratios = T[rows, -1] / column[rows]
            best = ratios.min()
            tied = rows[ratios <= best + 1e-12 * (1.0 + abs(best))]
            r = int(min(tied, key=lambda i: self.basis[i]))
            self.pivot(r, s)
            self.iterations += 1
            if self.iterations > self.cap:
                raise Cycling(f"simplex exceeded {self.cap} pivots")


def format_tableau(T: np.ndarray) -> str:
    return "\n".join(" ".join(f"{v: .4e}" for v in row) for row in T)


def _equilibrate(p: LpProblem):
    """Column then row scaling so that every nonzero row/column peaks at 1."""
    M = np.vstack([p.A_ub, p.A_eq])
    rhs = np.concatenate([p.b_ub, p.b_eq])
    cmax = np.abs(M).max(axis=0) if M.size else np.ones(p.n_vars)
    col = 1.0 / np.where(cmax > 0, cmax, 1.0)
    M = M * col
    rmax = np.abs(M).max(axis=1) if M.size else np.ones(0)
    row = 1.0 / np.where(rmax > 0, rmax, 1.0)
    return M * row[:, None], rhs * row, col


def solve_simplex(p: LpProblem) -> LpSolution:
    """Two-phase simplex with Bland's rule on a dense, equilibrated tableau."""
    n = p.n_vars
    m_ub = p.A_ub.shape[0]
    m = p.n_constraints
    M, rhs, col_scale = _equilibrate(p)
    c = p.c * col_scale
    cmax = np.abs(c).max()
    if cmax > 0:
        c = c / cmax

    needs_art = [i for i in range(m) if i >= m_ub or rhs[i] < 0]
    n_struct = n + m_ub
    n_cols = n_struct + len(needs_art)
    T = np.zeros((m + 1, n_cols + 1))
    T[:m, :n] = M
    T[:m, -1] = rhs
    for i in range(m_ub):
        T[i, n + i] = 1.0
    basis = [n + i if i < m_ub else -1 for i in range(m)]
    for k, i in enumerate(needs_art):
        if rhs[i] < 0:
            T[i, :-1] *= -1.0
            T[i, -1] *= -1.0
        T[i, n_struct + k] = 1.0
        basis[i] = n_struct + k

    cap = 2 ** (n + m)
    tab = _Tableau(T, basis, cap)

    if needs_art:
        # phase 1: maximize -sum(artificials)
        for i in needs_art:
            T[m, :n_struct] -= T[i, :n_struct]
            T[m, -1] -= T[i, -1]
        tab.run(n_struct)
        if T[m, -1] < -PIVOT_TOL * (1.0 + np.abs(rhs).max()):
            return LpSolution(INFEASIBLE, iterations=tab.iterations)
        redundant = []
        for r in range(m):
            if tab.basis[r] >= n_struct:
                nz = np.flatnonzero(np.abs(T[r, :n_struct]) > PIVOT_TOL)
                if nz.size:
                    tab.pivot(r, int(nz[0]))
                else:
                    redundant.append(r)
        keep = [r for r in range(m + 1) if r not in redundant]
        T = np.ascontiguousarray(np.delete(T[keep], np.s_[n_struct:n_cols], axis=1))
        phase1_iters = tab.iterations
        tab = _Tableau(T, [tab.basis[r] for r in keep[:-1]], cap)
        tab.iterations = phase1_iters

    m_eff = T.shape[0] - 1
    T[m_eff, :] = 0.0
    T[m_eff, :n] = -c
    for r, b in enumerate(tab.basis):
        if T[m_eff, b] != 0.0:
            T[m_eff] -= T[m_eff, b] * T[r]
    if not tab.run(n_struct):
        return LpSolution(UNBOUNDED, iterations=tab.iterations)

    xs = np.zeros(n_struct)
    for r, b in enumerate(tab.basis):
        xs[b] = T[r, -1]
    x = np.clip(xs[:n] * col_scale, 0.0, None)
    return LpSolution(OPTIMAL, x, float(p.c @ x), tab.iterations)


def _enumerate_vertices(A_ub, b_ub, A_eq, b_eq, tol):
    """Yield every vertex of {A_ub x <= b_ub, A_eq x = b_eq, x >= 0}."""
    n = A_ub.shape[1] if A_ub.size else A_eq.shape[1]
    ineq = np.vstack([A_ub, -np.eye(n)])
    ineq_rhs = np.concatenate([b_ub, np.zeros(n)])
    eq_rank = np.linalg.matrix_rank(A_eq) if A_eq.size else 0
    k = n - eq_rank
    scale = 1.0 + max(np.abs(b_ub).max(initial=0.0), np.abs(b_eq).max(initial=0.0))
    for active in itertools.combinations(range(ineq.shape[0]), k):
        S = list(active)
        M = np.vstack([A_eq, ineq[S]])
        rhs = np.concatenate([b_eq, ineq_rhs[S]])
        if np.linalg.matrix_rank(M) < n:
            continue
        x = np.linalg.lstsq(M, rhs, rcond=None)[0]
        if np.abs(M @ x - rhs).max(initial=0.0) > tol * scale:
            continue
        if np.all(ineq @ x <= ineq_rhs + tol * scale) and (
            A_eq.size == 0 or np.all(np.abs(A_eq @ x - b_eq) <= tol * scale)
        ):
            yield x


def vertex_oracle(p: LpProblem, tol: float = 1e-9) -> LpSolution:
    """Solve ``p`` by enumerating all basic solutions; exponential, test use only."""
    n = p.n_vars
    if n > ORACLE_MAX_VARS:
        raise TooLarge(f"vertex oracle handles at most {ORACLE_MAX_VARS} variables, got {n}")
    best_x, best_val = None, -np.inf
    for x in _enumerate_vertices(p.A_ub, p.b_ub, p.A_eq, p.b_eq, tol):
        val = float(p.c @ x)
        if val > best_val:
            best_x, best_val = x, val
    if best_x is None:
        return LpSolution(INFEASIBLE)
    # unbounded iff some normalized recession direction improves the objective
    ray_eq = np.vstack([p.A_eq, np.ones((1, n))])
    ray_rhs = np.concatenate([np.zeros(p.A_eq.shape[0]), [1.0]])
    for d in _enumerate_vertices(p.A_ub, np.zeros_like(p.b_ub), ray_eq, ray_rhs, tol):
        if p.c @ d > tol:
            return LpSolution(UNBOUNDED)
    best_x = np.clip(best_x, 0.0, None)
    return LpSolution(OPTIMAL, best_x, float(p.c @ best_x))
