"""JSON scenario configuration.

Field names carry their units. Every field is optional; omitted ones take the
defaults of the reference experiment. A minimal file::

    {"activity": "walking", "run": {"methods": ["optimal", "sweep"], "seeds": [1, 2]}}
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .channel import ACTIVITIES
from .errors import ParseError, ValidationError
from .optimizer import EXHAUSTIVE_MAX, METHODS
from .sim import OVERFLOW_POLICIES, Scenario, make_scenario

TOP_KEYS = {
    "activity", "n_sensors", "slots", "tau_s", "layout_seed", "overflow_policy",
    "sigma_s_dB", "distances_m", "path_loss_exponents", "sensor", "harvest", "channel", "run",
}
SENSOR_KEYS = {
    "psi_J_per_bit": "psi",
    "theta_W": "theta",
    "zeta_J_per_bit_per_m_mp": "zeta",
    "e_ini_J": "e_ini",
    "e_max_J": "e_max",
    "e_min_J": "e_min",
}
HARVEST_KEYS = {"states", "transition", "rates_mW"}
CHANNEL_KEYS = {"d0_m", "pl0_dB"}
RUN_KEYS = {"methods", "seeds", "out_dir", "verbosity", "jobs"}


@dataclass
class RunConfig:
    config_path: Optional[Path]
    out_dir: Path = Path("out")
    methods: list[str] = field(default_factory=lambda: ["optimal", "sweep"])
    seeds: list[int] = field(default_factory=lambda: [1])
    verbosity: int = 0
    jobs: int = 1
    # keyword arguments for make_scenario, minus method and seed
    scenario_kw: dict = field(default_factory=dict, repr=False)
    channel: dict = field(default_factory=dict)
    overflow_policy: str = "idle"

    def scenario(self, method: str, seed: int) -> Scenario:
        sc = make_scenario(method=method, seed=seed, **self.scenario_kw)
        return sc.with_(overflow_policy=self.overflow_policy, **self.channel)


def _check_keys(section: dict, allowed, where: str) -> None:
    if not isinstance(section, dict):
        raise ValidationError(f"{where} must be an object")
    unknown = sorted(set(section) - set(allowed))
    if unknown:
        raise ValidationError(f"{where}: unknown field(s) {unknown}")


def _number(v, where: str) -> float:
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ValidationError(f"{where} must be a number, got {v!r}")
    return float(v)


def _int(v, where: str) -> int:
    if isinstance(v, bool) or not isinstance(v, int):
        raise ValidationError(f"{where} must be an integer, got {v!r}")
    return v


def parse_config(data: dict, path: Optional[Path] = None, **overrides) -> tuple[Scenario, RunConfig]:
    """Turn a parsed config mapping into a Scenario and RunConfig.

    ``overrides`` (activity, slots, methods, seeds, out_dir, verbosity, jobs)
    take precedence over the file, mirroring the command-line flags.
    """
    _check_keys(data, TOP_KEYS, "config")
    run = dict(data.get("run", {}))
    _check_keys(run, RUN_KEYS, "run")

    activity = overrides.get("activity") or data.get("activity", "relaxing")
    if activity not in ACTIVITIES:
        raise ValidationError(f"activity must be one of {ACTIVITIES}, got {activity!r}")
    kw: dict = {"activity": activity}
    kw["n_sensors"] = _int(data.get("n_sensors", 10), "n_sensors")
    if kw["n_sensors"] < 1:
        raise ValidationError("n_sensors must be >= 1")
    slots = overrides.get("slots")
    kw["slots"] = _int(data.get("slots", 50) if slots is None else slots, "slots")
    kw["tau"] = _number(data.get("tau_s", 5.0), "tau_s")
    if "layout_seed" in data and data["layout_seed"] is not None:
        kw["layout_seed"] = _int(data["layout_seed"], "layout_seed")
    if "sigma_s_dB" in data:
        kw["sigma_s"] = _number(data["sigma_s_dB"], "sigma_s_dB")
    for key, target in (("distances_m", "distances"), ("path_loss_exponents", "exponents")):
        if key in data:
            vals = data[key]
            if not isinstance(vals, list) or len(vals) != kw["n_sensors"]:
                raise ValidationError(f"{key} must be a list of {kw['n_sensors']} numbers")
            kw[target] = [_number(v, f"{key}[{i}]") for i, v in enumerate(vals)]

    sensor = data.get("sensor", {})
    _check_keys(sensor, SENSOR_KEYS, "sensor")
    kw["sensor_kw"] = {SENSOR_KEYS[k]: _number(v, f"sensor.{k}") for k, v in sensor.items()}

    harvest_cfg = data.get("harvest", {})
    _check_keys(harvest_cfg, HARVEST_KEYS, "harvest")
    if "rates_mW" in harvest_cfg:
        rates = harvest_cfg["rates_mW"]
        if not isinstance(rates, list) or not rates:
            raise ValidationError("harvest.rates_mW must be a non-empty list")
        kw["rates_mw"] = [_number(v, f"harvest.rates_mW[{i}]") for i, v in enumerate(rates)]
    if "transition" in harvest_cfg:
        kw["transition"] = harvest_cfg["transition"]
    if "states" in harvest_cfg:
        n_states = len(harvest_cfg["states"])
        n_rates = len(kw.get("rates_mw", ())) or 2
        if n_states != n_rates:
            raise ValidationError(f"harvest.states lists {n_states} states but {n_rates} rates")
        kw["states"] = [str(x) for x in harvest_cfg["states"]]

    channel = data.get("channel", {})
    _check_keys(channel, CHANNEL_KEYS, "channel")
    ch = {}
    if "d0_m" in channel:
        ch["d0"] = _number(channel["d0_m"], "channel.d0_m")
        if ch["d0"] <= 0:
            raise ValidationError("channel.d0_m must be positive")
    if "pl0_dB" in channel:
        ch["pl0"] = _number(channel["pl0_dB"], "channel.pl0_dB")

    policy = data.get("overflow_policy", "idle")
    if policy not in OVERFLOW_POLICIES:
        raise ValidationError(f"overflow_policy must be one of {OVERFLOW_POLICIES}, got {policy!r}")

    methods = overrides.get("methods") or run.get("methods", ["optimal", "sweep"])
    if not isinstance(methods, list) or not methods:
        raise ValidationError("run.methods must list at least one method")
    for m in methods:
        if m not in METHODS:
            raise ValidationError(f"run.methods: unknown method {m!r}; expected one of {METHODS}")
    if "exhaustive" in methods and kw["n_sensors"] > EXHAUSTIVE_MAX:
        raise ValidationError(
            f"method 'exhaustive' needs n_sensors <= {EXHAUSTIVE_MAX}, got {kw['n_sensors']}"
        )
    seeds = overrides.get("seeds") or run.get("seeds", [1])
    if not isinstance(seeds, list) or not seeds:
        raise ValidationError("run.seeds must list at least one seed")
    seeds = [_int(s, "run.seeds") for s in seeds]

    out_dir = overrides.get("out_dir") or run.get("out_dir", "out")
    verbosity = overrides.get("verbosity")
    cfg = RunConfig(
        config_path=path,
        out_dir=Path(out_dir),
        methods=list(methods),
        seeds=seeds,
        verbosity=_int(run.get("verbosity", 0) if verbosity is None else verbosity, "verbosity"),
        jobs=_int(overrides.get("jobs") or run.get("jobs", 1), "jobs"),
        scenario_kw=kw,
        channel=ch,
        overflow_policy=policy,
    )
    try:
        scenario = cfg.scenario(methods[0], seeds[0])
    except ValidationError as exc:
        raise ValidationError(f"invalid scenario: {exc}") from exc
    return scenario, cfg


def load_config(path, **overrides) -> tuple[Scenario, RunConfig]:
    """Read and validate a JSON scenario file; an empty file means all defaults."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ParseError(f"{path}: cannot read config: {exc.strerror}") from exc
    if not text.strip():
        data = {}
    else:
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ParseError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
    if not isinstance(data, dict):
        raise ParseError(f"{path}: top level must be a JSON object")
    return parse_config(data, path, **overrides)
