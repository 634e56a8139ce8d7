"""Energy-efficiency maximization for self-sustained wireless body area networks."""
from .channel import ActivityProfile, SensorParams, ShadowSample, lambda_coeff, path_loss_db, power, sample_shadowing
from .errors import (
    Cycling, DegenerateAlpha, EnergyViolation, InfeasibleSlot, MalformedProblem, NoActiveSensors,
    ParseError, ReducibleChain, TooLarge, ValidationError, WbanError,
)
from .harvest import HarvestChain, SteadyState, average_rate, steady_state, step
from .lp import LpProblem, LpSolution, solve_simplex, vertex_oracle
from .optimizer import (
    Allocation, RateBounds, SlotContext, build_cc_lp, energy_efficiency, exhaustive_extremes,
    rate_bounds, solve_optimal, steady_rate_baseline, suboptimal_sweep,
)
from .sim import Scenario, SimResult, SlotRecord, make_scenario, run_scenario, run_slot

__version__ = "0.1.0"
