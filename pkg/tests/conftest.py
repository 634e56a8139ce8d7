import numpy as np
import pytest

from wban_ee.lp import LpProblem
from wban_ee.optimizer import SlotContext

PSI, THETA, ZETA = 2e-8, 6e-8, 8e-8
E_MIN, E_MAX, TAU = 0.01, 0.11, 5.0


def random_lp(rng, max_vars=4, max_cons=6):
    """Small LP with a mix of feasible, infeasible and unbounded instances."""
    n = int(rng.integers(1, max_vars + 1))
    m_eq = int(rng.integers(0, min(2, max_cons) + 1))
    m_ub = int(rng.integers(0 if m_eq else 1, max_cons - m_eq + 1))
    if rng.random() < 0.5:
        draw = lambda *shape: rng.integers(-3, 4, size=shape).astype(float)
    else:
        draw = lambda *shape: rng.normal(size=shape)
    shift = 2.0 if rng.random() < 0.5 else 0.0
    return LpProblem(draw(n), draw(m_ub, n), draw(m_ub) + shift, draw(m_eq, n), draw(m_eq))


def random_slot(rng, n, sigma_db=3.49, phi_choices=(1e-3, 3e-3)):
    """Slot context with randomly drawn layout, shadowing, harvest and batteries."""
    d = rng.uniform(0.3, 0.7, n)
    mp = rng.uniform(1.4, 4.4, n)
    factor = 10 ** (rng.normal(0.0, sigma_db, n) / 10)
    lam = PSI + factor * ZETA * d**mp
    energy = rng.uniform(E_MIN, E_MAX, n)
    phi = rng.choice(phi_choices, n)
    return SlotContext(energy, phi, lam, THETA, E_MIN, E_MAX, TAU)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
