"""Body-channel path loss, shadowing and the per-sensor power model.

Shadowing is drawn in dB and enters the transmit cost as the linear factor
``10 ** (x_db / 10)``, so a 0 dB draw leaves the amplifier cost unchanged.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .harvest import HarvestChain

ACTIVITIES = ("relaxing", "walking", "running")


@dataclass(frozen=True)
class SensorParams:
    """Physical constants of one sensor node (SI units).

    psi: sensing energy per bit (J/bit); theta: transmit electronics power (W);
    zeta: amplifier energy coefficient (J/bit/m^mp); d: distance to the
    aggregator (m); mp: path-loss exponent; e_min, e_max, e_ini: battery
    floor, capacity and initial energy (J).
    """

    psi: float = 2e-8
    theta: float = 6e-8
    zeta: float = 8e-8
    d: float = 0.5
    mp: float = 2.0
    e_min: float = 0.01
    e_max: float = 0.11
    e_ini: float = 0.1

    def __post_init__(self):
        for name in ("psi", "theta", "zeta", "d"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise ValidationError(f"{name} must be positive and finite, got {v}")
        if not self.mp >= 1:
            raise ValidationError(f"path-loss exponent mp must be >= 1, got {self.mp}")
        if not 0 <= self.e_min < self.e_ini <= self.e_max:
            raise ValidationError(
                "battery bounds must satisfy 0 <= e_min < e_ini <= e_max, got "
                f"e_min={self.e_min}, e_ini={self.e_ini}, e_max={self.e_max}"
            )

    @property
    def amplifier_cost(self) -> float:
        """zeta * d**mp, the transmit cost per bit before shadowing."""
        return self.zeta * self.d**self.mp


@dataclass(frozen=True)
class ActivityProfile:
    name: str
    sigma_s: float
    chain: HarvestChain

    def __post_init__(self):
        if self.name not in ACTIVITIES:
            raise ValidationError(f"unknown activity {self.name!r}; expected one of {ACTIVITIES}")
        if not self.sigma_s >= 0:
            raise ValidationError(f"sigma_s must be >= 0, got {self.sigma_s}")
        if self.name == "relaxing" and self.sigma_s != 0:
            raise ValidationError("relaxing activity must have sigma_s = 0")


@dataclass(frozen=True)
class ShadowSample:
    x_db: float
    factor: float

    @classmethod
    def from_db(cls, x_db: float) -> "ShadowSample":
        if x_db == 0:
            return cls(0.0, 1.0)
        return cls(float(x_db), 10.0 ** (x_db / 10.0))


NO_SHADOW = ShadowSample(0.0, 1.0)


def path_loss_db(params: SensorParams, d0: float, pl0: float, shadow: ShadowSample) -> float:
    """Log-distance path loss in dB at the sensor's distance, shadowing included."""
    if d0 <= 0:
        raise ValidationError(f"reference distance must be positive, got {d0}")
    return pl0 + 10.0 * params.mp * math.log10(params.d / d0) + shadow.x_db


def sample_shadowing(profile: ActivityProfile, rng: np.random.Generator) -> ShadowSample:
    # relaxing consumes no draw: the factor is pinned to exactly 1
    if profile.sigma_s == 0:
        return NO_SHADOW
    return ShadowSample.from_db(rng.normal(0.0, profile.sigma_s))


def lambda_coeff(params: SensorParams, shadow: ShadowSample) -> float:
    """Energy per bit psi + factor * zeta * d**mp (J/bit)."""
    if not shadow.factor > 0:
        raise ValidationError(f"shadow factor must be positive, got {shadow.factor}")
    return params.psi + shadow.factor * params.amplifier_cost


def power(lam, rate, theta):
    """Power draw lam * rate + theta in watts; works elementwise on arrays."""
    if np.any(np.asarray(rate) < 0):
        raise ValidationError("source rate must be non-negative")
    return lam * rate + theta
