"""Discrete-time Markov model of a sensor's energy-harvesting process.

Each chain state carries a recharge rate in watts; the chain moves once per
time slot.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import ReducibleChain, ValidationError

ROW_SUM_TOL = 1e-12


@dataclass(frozen=True)
class HarvestChain:
    """Harvest states, their row-stochastic transition matrix and recharge rates (W).

    ``rates`` must be sorted non-decreasing, so state 0 is the poorest
    harvesting state.
    """

    states: tuple[str, ...]
    transition: np.ndarray
    rates: np.ndarray

    def __post_init__(self):
        states = tuple(str(s) for s in self.states)
        P = np.array(self.transition, dtype=float)
        g = np.array(self.rates, dtype=float).reshape(-1)
        n = len(states)
        if n < 1:
            raise ValidationError("harvest chain needs at least one state")
        if P.shape != (n, n):
            raise ValidationError(f"transition matrix must be {n}x{n}, got {P.shape}")
        if g.shape != (n,):
            raise ValidationError(f"rates must have {n} entries, got {g.size}")
        if not (np.all(np.isfinite(P)) and np.all(np.isfinite(g))):
            raise ValidationError("transition matrix and rates must be finite")
        if np.any(P < 0) or np.any(P > 1):
            raise ValidationError("transition probabilities must lie in [0, 1]")
        bad = np.abs(P.sum(axis=1) - 1.0) > ROW_SUM_TOL
        if np.any(bad):
            raise ValidationError(
                f"transition rows {np.flatnonzero(bad).tolist()} do not sum to 1"
            )
        if np.any(g < 0):
            raise ValidationError("recharge rates must be non-negative")
        if np.any(np.diff(g) < 0):
            raise ValidationError("recharge rates must be sorted non-decreasing")
        cdf = np.cumsum(P, axis=1)
        for a in (P, g, cdf):
            a.setflags(write=False)
        object.__setattr__(self, "_cdf", cdf)
        object.__setattr__(self, "states", states)
        object.__setattr__(self, "transition", P)
        object.__setattr__(self, "rates", g)

    @property
    def n_states(self) -> int:
        return len(self.states)

    @classmethod
    def two_state(cls, p_up: float, p_down: float, rates: Sequence[float]) -> "HarvestChain":
        """Two-state chain with P(S1->S2) = p_up and P(S2->S1) = p_down."""
        P = [[1.0 - p_up, p_up], [p_down, 1.0 - p_down]]
        return cls(("S1", "S2"), np.array(P), np.asarray(rates, dtype=float))

    @classmethod
    def constant(cls, rate: float) -> "HarvestChain":
        return cls(("S1",), np.ones((1, 1)), np.array([rate], dtype=float))


@dataclass(frozen=True)
class SteadyState:
    pi: np.ndarray = field(repr=True)


def _reachable(P: np.ndarray) -> list[set[int]]:
    n = P.shape[0]
    out = []
    for start in range(n):
        seen = {start}
        queue = deque([start])
        while queue:
            i = queue.popleft()
            for j in np.flatnonzero(P[i] > 0):
                j = int(j)
                if j not in seen:
                    seen.add(j)
                    queue.append(j)
        out.append(seen)
    return out


def closed_classes(chain: HarvestChain) -> list[frozenset[int]]:
    """Closed communicating classes of the chain, found by BFS reachability."""
    reach = _reachable(chain.transition)
    classes = set()
    for i, r in enumerate(reach):
        # i is recurrent iff every state it reaches can reach it back
        if all(i in reach[j] for j in r):
            classes.add(frozenset(r))
    return sorted(classes, key=min)


def steady_state(chain: HarvestChain) -> SteadyState:
    """Stationary distribution pi with pi^T P = pi^T and sum(pi) = 1.

    Raises ReducibleChain when the chain has several closed classes, since
    the stationary vector is then not unique.
    """
    classes = closed_classes(chain)
    if len(classes) > 1:
        raise ReducibleChain(
            f"chain has {len(classes)} closed classes: "
            + ", ".join(str(sorted(c)) for c in classes)
        )
    return SteadyState(stationary_distribution(chain.transition))


def stationary_distribution(P) -> np.ndarray:
    """Solve pi^T P = pi^T, sum(pi) = 1 for a chain with a single closed class."""
    P = np.asarray(P, dtype=float)
    n = P.shape[0]
    # (P^T - I) pi = 0 has rank n-1 here; swap one balance row for normalization
    A = P.T - np.eye(n)
    A[-1, :] = 1.0
    rhs = np.zeros(n)
    rhs[-1] = 1.0
    pi = np.linalg.solve(A, rhs)
    pi = np.clip(pi, 0.0, None)
    pi /= pi.sum()
    pi.setflags(write=False)
    return pi


def average_rate(chain: HarvestChain) -> float:
    """Long-term average recharge rate in watts."""
    return float(steady_state(chain).pi @ chain.rates)


def step(chain: HarvestChain, current: int, rng: np.random.Generator) -> int:
    """Draw the next state index from row ``current`` using one uniform draw."""
    if not 0 <= current < chain.n_states:
        raise IndexError(f"state index {current} out of range")
    u = rng.random()
    nxt = int(np.searchsorted(chain._cdf[current], u, side="right"))
    if nxt >= chain.n_states:
        # cdf rounded to slightly below 1; fall back to the last reachable state
        nxt = int(np.flatnonzero(chain.transition[current] > 0)[-1])
    return nxt
