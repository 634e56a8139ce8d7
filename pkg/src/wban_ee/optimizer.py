"""Per-slot source-rate allocation maximizing network energy efficiency.

Four allocators share one slot description (:class:`SlotContext`):

* :func:`solve_optimal` - exact, via the Charnes-Cooper LP and the simplex solver;
* :func:`suboptimal_sweep` - sort by energy-per-bit and sweep the max/min split point;
* :func:`exhaustive_extremes` - every max/min corner, a test oracle;
* :func:`steady_rate_baseline` - spend the long-term harvest rate each slot.

Sensors whose battery cannot even cover the electronics this slot are
*inactive*: they sleep, with zero rate and zero power.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import DegenerateAlpha, InfeasibleSlot, NoActiveSensors, TooLarge, ValidationError
from .lp import INFEASIBLE, OPTIMAL, LpProblem, solve_simplex

METHODS = ("optimal", "sweep", "exhaustive", "baseline")
EXHAUSTIVE_MAX = 16
ALPHA_MIN = 1e-15
SNAP_RTOL = 1e-9


def _vec(x, n=None):
    a = np.array(x, dtype=float).reshape(-1)
    if n is not None and a.size == 1 and n != 1:
        a = np.full(n, a[0])
    return a


@dataclass(frozen=True)
class SlotContext:
    """Everything the allocators need for one slot, as per-sensor arrays.

    energy is the battery level at the start of the slot (J), phi the
    recharge rate (W), lam the energy per bit (J/bit), theta the electronics
    power (W). ``overflow`` is the battery overflow assumed when computing
    the rate bounds; it defaults to zero.
    """

    energy: np.ndarray
    phi: np.ndarray
    lam: np.ndarray
    theta: np.ndarray
    e_min: np.ndarray
    e_max: np.ndarray
    tau: float
    overflow: Optional[np.ndarray] = None

    def __post_init__(self):
        e = _vec(self.energy)
        n = e.size
        arrays = {"energy": e}
        for name in ("phi", "lam", "theta", "e_min", "e_max"):
            arrays[name] = _vec(getattr(self, name), n)
        arrays["overflow"] = np.zeros(n) if self.overflow is None else _vec(self.overflow, n)
        for name, a in arrays.items():
            if a.shape != (n,):
                raise ValidationError(f"{name} must have {n} entries, got {a.size}")
            if not np.all(np.isfinite(a)):
                raise ValidationError(f"{name} must be finite")
            a.setflags(write=False)
            object.__setattr__(self, name, a)
        if not self.tau > 0:
            raise ValidationError(f"slot length tau must be positive, got {self.tau}")
        if np.any(self.lam <= 0):
            raise ValidationError("lambda coefficients must be positive")
        if np.any(self.theta < 0):
            raise ValidationError("theta must be non-negative")
        if np.any(self.overflow < 0):
            raise ValidationError("assumed overflow must be non-negative")
        # the floor may be undershot by rounding after a slot spent at r_max
        if np.any(self.energy < self.e_min - 1e-12) or np.any(self.energy > self.e_max):
            raise ValidationError("battery energy outside [e_min, e_max]")

    @property
    def n(self) -> int:
        return self.energy.size


@dataclass(frozen=True)
class RateBounds:
    r_min: np.ndarray
    r_max: np.ndarray
    active: np.ndarray
    raw_min: np.ndarray
    raw_max: np.ndarray

    @property
    def n_active(self) -> int:
        return int(self.active.sum())


@dataclass(frozen=True)
class CcCoefficients:
    """Coefficients of the Charnes-Cooper LP over the active sensors."""

    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    e_vec: np.ndarray
    f_sum: float
    index: np.ndarray  # positions of the active sensors in the slot


@dataclass
class Allocation:
    rates: np.ndarray
    powers: np.ndarray
    ee: float
    method: str
    n_candidates: Optional[int] = None
    info: dict = field(default_factory=dict)


def energy_efficiency(rates, lambdas, thetas) -> float:
    """Network energy efficiency sum(r) / sum(lam * r + theta) in bit/J."""
    rates = np.asarray(rates, dtype=float)
    num = np.sum(rates)
    den = np.sum(lambdas * rates + thetas)
    if not den > 0:
        raise ValidationError("total power must be positive")
    return float(num / den)


def rate_bounds(ctx: SlotContext) -> RateBounds:
    """Per-sensor rate interval keeping the next battery level in [e_min, e_max]."""
    avail = ctx.energy + ctx.tau * ctx.phi - ctx.tau * ctx.theta - ctx.overflow
    denom = ctx.tau * ctx.lam
    raw_max = (avail - ctx.e_min) / denom
    raw_min = (avail - ctx.e_max) / denom
    active = raw_max >= 0
    r_max = np.where(active, raw_max, 0.0)
    r_min = np.where(active, np.maximum(raw_min, 0.0), 0.0)
    return RateBounds(r_min, r_max, active, raw_min, raw_max)


def _effective_theta(ctx: SlotContext, bounds: RateBounds) -> np.ndarray:
    # sleeping sensors draw no electronics power
    return np.where(bounds.active, ctx.theta, 0.0)


def _allocation(ctx, bounds, rates, method, **kw) -> Allocation:
    theta = _effective_theta(ctx, bounds)
    powers = ctx.lam * rates + theta
    return Allocation(rates, powers, energy_efficiency(rates, ctx.lam, theta), method, **kw)


def _require_active(bounds: RateBounds) -> None:
    if bounds.n_active == 0:
        raise NoActiveSensors("no sensor has enough energy to transmit this slot")


def build_cc_lp(ctx: SlotContext, bounds: Optional[RateBounds] = None):
    """Charnes-Cooper LP over variables (z_1..z_n, alpha) of the active sensors.

    Rows are n upper-bound rows ``a_i z_i + b_i alpha <= 0``, n lower-bound
    rows ``-a_i z_i + c_i alpha <= 0`` and the normalization
    ``e^T z + f alpha = 1``; the objective is ``sum(z)``.
    """
    bounds = rate_bounds(ctx) if bounds is None else bounds
    _require_active(bounds)
    idx = np.flatnonzero(bounds.active)
    n = idx.size
    tau = ctx.tau
    E, phi, th, F = ctx.energy[idx], ctx.phi[idx], ctx.theta[idx], ctx.overflow[idx]
    a = tau * ctx.lam[idx]
    b = ctx.e_min[idx] + F + tau * th - E - tau * phi
    c = E + tau * phi - tau * th - F - ctx.e_max[idx]
    e_vec = ctx.lam[idx].copy()
    f_sum = float(np.sum(th))

    A = np.zeros((2 * n, n + 1))
    A[np.arange(n), np.arange(n)] = a
    A[:n, n] = b
    A[n + np.arange(n), np.arange(n)] = -a
    A[n:, n] = c
    G = np.append(e_vec, f_sum)[None, :]
    obj = np.append(np.ones(n), 0.0)
    problem = LpProblem(obj, A, np.zeros(2 * n), G, [1.0])
    return problem, CcCoefficients(a, b, c, e_vec, f_sum, idx)


def solve_optimal(ctx: SlotContext) -> Allocation:
    """Exact EE-maximizing allocation through the Charnes-Cooper LP."""
    bounds = rate_bounds(ctx)
    problem, coeffs = build_cc_lp(ctx, bounds)
    sol = solve_simplex(problem)
    if sol.status == INFEASIBLE:
        raise InfeasibleSlot("Charnes-Cooper LP is infeasible: inconsistent battery bounds")
    if sol.status != OPTIMAL:
        raise InfeasibleSlot(f"Charnes-Cooper LP returned status {sol.status!r}")
    n = coeffs.index.size
    alpha = float(sol.x[n])
    if alpha < ALPHA_MIN:
        raise DegenerateAlpha(f"alpha = {alpha:.3e} below {ALPHA_MIN:g}")
    raw = np.zeros(ctx.n)
    raw[coeffs.index] = sol.x[:n] / alpha

    # an LP vertex has every sensor on a bound; remove the rounding noise
    tol = SNAP_RTOL * np.maximum(bounds.r_max, 1.0)
    rates = np.where(np.abs(raw - bounds.r_max) <= tol, bounds.r_max, raw)
    rates = np.where(np.abs(rates - bounds.r_min) <= tol, bounds.r_min, rates)
    rates = np.clip(rates, bounds.r_min, bounds.r_max)
    return _allocation(
        ctx, bounds, rates, "optimal",
        info={"alpha": alpha, "lp_objective": sol.objective_value,
              "raw_rates": raw, "iterations": sol.iterations},
    )


def sweep_order(ctx: SlotContext, bounds: RateBounds) -> np.ndarray:
    """Active sensor indices by ascending lambda, ties broken by index."""
    idx = np.flatnonzero(bounds.active)
    return idx[np.argsort(ctx.lam[idx], kind="stable")]


def suboptimal_sweep(ctx: SlotContext) -> Allocation:
    """Give r_max to the k cheapest-per-bit sensors and r_min to the rest; best k wins.

    Exactly n_active + 1 candidates are evaluated (k = 0..n_active); ties go
    to the smaller k.
    """
    bounds = rate_bounds(ctx)
    _require_active(bounds)
    order = sweep_order(ctx, bounds)
    theta = _effective_theta(ctx, bounds)
    use_max = np.zeros(ctx.n, dtype=bool)
    best_ee, best_k, best_rates = -np.inf, -1, None
    evaluated = 0
    for k in range(order.size + 1):
        if k > 0:
            use_max[order[k - 1]] = True
        rates = np.where(use_max, bounds.r_max, bounds.r_min)
        ee = energy_efficiency(rates, ctx.lam, theta)
        evaluated += 1
        if ee > best_ee:
            best_ee, best_k, best_rates = ee, k, rates
    return _allocation(ctx, bounds, best_rates, "sweep", n_candidates=evaluated, info={"k": best_k})


def exhaustive_extremes(ctx: SlotContext) -> Allocation:
    """Best of all 2^n assignments of r_min / r_max to the active sensors."""
    bounds = rate_bounds(ctx)
    _require_active(bounds)
    idx = np.flatnonzero(bounds.active)
    if idx.size > EXHAUSTIVE_MAX:
        raise TooLarge(f"exhaustive search capped at {EXHAUSTIVE_MAX} active sensors, got {idx.size}")
    theta = _effective_theta(ctx, bounds)
    use_max = np.zeros(ctx.n, dtype=bool)
    best_ee, best_rates = -np.inf, None
    evaluated = 0
    # lexicographic order with strict improvement keeps the smallest assignment on ties
    for corner in itertools.product((False, True), repeat=idx.size):
        use_max[idx] = corner
        rates = np.where(use_max, bounds.r_max, bounds.r_min)
        ee = energy_efficiency(rates, ctx.lam, theta)
        evaluated += 1
        if ee > best_ee:
            best_ee, best_rates = ee, rates
    return _allocation(ctx, bounds, best_rates, "exhaustive", n_candidates=evaluated)


def steady_rate_baseline(ctx: SlotContext, g_avg) -> Allocation:
    """Rate whose consumption matches the long-term recharge rate, clamped to the bounds.

    A stand-in for a steady-rate comparison scheme, not a reproduction of one.
    """
    g_avg = _vec(g_avg, ctx.n)
    if np.any(g_avg < 0):
        raise ValidationError("average recharge rates must be non-negative")
    bounds = rate_bounds(ctx)
    _require_active(bounds)
    target = (g_avg - ctx.theta) / ctx.lam
    rates = np.clip(target, bounds.r_min, bounds.r_max)
    return _allocation(ctx, bounds, rates, "baseline", info={"unclamped": target})


def allocate(ctx: SlotContext, method: str, g_avg=None) -> Allocation:
    if method == "optimal":
        return solve_optimal(ctx)
    if method == "sweep":
        return suboptimal_sweep(ctx)
    if method == "exhaustive":
        return exhaustive_extremes(ctx)
    if method == "baseline":
        if g_avg is None:
            raise ValidationError("baseline allocation needs per-sensor average recharge rates")
        return steady_rate_baseline(ctx, g_avg)
    raise ValidationError(f"unknown method {method!r}; expected one of {METHODS}")
