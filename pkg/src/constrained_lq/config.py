"""Scenario files: YAML parsing, validation, serialization.

Schema (all keys optional except ``agents`` and ``horizon``)::

    agents: 50                  # number of scalar battery agents
    seed: 2025                  # fleet sampling / noise seed
    horizon: 24                 # T, hourly steps
    weights: {q: 1.0, q_terminal: 1.0, r: 0.01}
    fleet:
      a_range: [0.96, 0.99]     # A_i ~ Uniform(a_range)
      b: 1.0                    # kWh per kW-hour
      noise_variance: 3.0       # (kWh)^2, independent across agents
      capacity_kwh: 80.0
      initial_soc_range: [0.4, 0.6]
    classes: {alpha: 0.8, beta: 0.4}   # SoC target fraction per class, in order
    schedule:
      strategy: switched        # hard | intermittent | switched | none | soft
      eta: 1.0                  # soft penalty weight (switched / soft)
    solar:
      source: synthetic         # or: csv
      peak_kw: 150.0
      daylight: [6, 18]
      # source: csv -> path: solar.csv (relative to this file), column: kw
    bounds: {u_min: -10.0, u_max: 10.0}  # per-agent kW; feasibility warning only
"""
from __future__ import annotations

import dataclasses
import os
from dataclasses import dataclass, field
from typing import Optional

import yaml

from .demand_response import DEFAULT_DAYLIGHT, DEFAULT_PEAK_KW, STRATEGIES, build_scenario
from .errors import ConfigParseError, ValidationError
from .model import FleetParams, load_solar_csv, synthetic_solar


@dataclass(frozen=True)
class WeightsConfig:
    q: float = 1.0
    q_terminal: float = 1.0
    r: float = 0.01


@dataclass(frozen=True)
class FleetConfig:
    a_range: tuple = (0.96, 0.99)
    b: float = 1.0
    noise_variance: float = 3.0
    capacity_kwh: float = 80.0
    initial_soc_range: tuple = (0.4, 0.6)


@dataclass(frozen=True)
class ScheduleConfig:
    strategy: str = "hard"
    eta: float = 1.0


@dataclass(frozen=True)
class SolarConfig:
    source: str = "synthetic"
    peak_kw: float = DEFAULT_PEAK_KW
    daylight: tuple = DEFAULT_DAYLIGHT
    path: Optional[str] = None
    column: Optional[str] = None


@dataclass(frozen=True)
class BoundsConfig:
    u_min: Optional[float] = None
    u_max: Optional[float] = None


@dataclass(frozen=True)
class ScenarioConfig:
    agents: int
    horizon: int
    seed: int = 0
    weights: WeightsConfig = field(default_factory=WeightsConfig)
    fleet: FleetConfig = field(default_factory=FleetConfig)
    classes: tuple = (("alpha", 0.8), ("beta", 0.4))
    schedule: ScheduleConfig = field(default_factory=ScheduleConfig)
    solar: SolarConfig = field(default_factory=SolarConfig)
    bounds: Optional[BoundsConfig] = None
    base_dir: str = field(default=".", compare=False)


def _number(value, fld, integer=False):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigParseError(f"expected a number, got {value!r}", field=fld)
    if integer:
        if isinstance(value, float) and not value.is_integer():
            raise ConfigParseError(f"expected an integer, got {value!r}", field=fld)
        return int(value)
    return float(value)


def _pair(value, fld, integer=False):
    if not isinstance(value, (list, tuple)) or len(value) != 2:
        raise ConfigParseError(f"expected a 2-element list, got {value!r}", field=fld)
    return tuple(_number(v, f"{fld}[{i}]", integer) for i, v in enumerate(value))


def _section(raw, key, cls, converters):
    data = raw.get(key)
    if data is None:
        return cls()
    if not isinstance(data, dict):
        raise ConfigParseError("expected a mapping", field=key)
    names = {f.name for f in dataclasses.fields(cls)}
    kwargs = {}
    for k, v in data.items():
        if k not in names:
            raise ConfigParseError("unknown key", field=f"{key}.{k}")
        kwargs[k] = converters[k](v, f"{key}.{k}") if v is not None else None
    return cls(**kwargs)


def _string(value, fld):
    if not isinstance(value, str):
        raise ConfigParseError(f"expected a string, got {value!r}", field=fld)
    return value


TOP_KEYS = {"agents", "horizon", "seed", "weights", "fleet", "classes", "schedule", "solar", "bounds"}


def parse_config(text, base_dir="."):
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        line = mark.line + 1 if mark is not None else None
        raise ConfigParseError(f"invalid YAML: {getattr(exc, 'problem', exc)}", line=line) from None
    if not isinstance(raw, dict):
        raise ConfigParseError("top level must be a mapping")
    for k in raw:
        if k not in TOP_KEYS:
            raise ConfigParseError("unknown key", field=str(k))
    for k in ("agents", "horizon"):
        if k not in raw:
            raise ConfigParseError("missing required key", field=k)

    num = _number
    weights = _section(raw, "weights", WeightsConfig, {k: num for k in ("q", "q_terminal", "r")})
    fleet = _section(raw, "fleet", FleetConfig, {
        "a_range": _pair, "b": num, "noise_variance": num, "capacity_kwh": num,
        "initial_soc_range": _pair,
    })
    schedule = _section(raw, "schedule", ScheduleConfig, {"strategy": _string, "eta": num})
    solar = _section(raw, "solar", SolarConfig, {
        "source": _string, "peak_kw": num, "daylight": lambda v, f: _pair(v, f, integer=True),
        "path": _string, "column": _string,
    })
    bounds = None
    if raw.get("bounds") is not None:
        bounds = _section(raw, "bounds", BoundsConfig, {"u_min": num, "u_max": num})

    classes = ScenarioConfig.__dataclass_fields__["classes"].default
    if raw.get("classes") is not None:
        if not isinstance(raw["classes"], dict) or not raw["classes"]:
            raise ConfigParseError("expected a non-empty mapping of class -> SoC fraction", field="classes")
        classes = tuple((str(k), num(v, f"classes.{k}")) for k, v in raw["classes"].items())

    cfg = ScenarioConfig(
        agents=num(raw["agents"], "agents", integer=True),
        horizon=num(raw["horizon"], "horizon", integer=True),
        seed=num(raw.get("seed", 0), "seed", integer=True),
        weights=weights, fleet=fleet, classes=classes, schedule=schedule,
        solar=solar, bounds=bounds, base_dir=str(base_dir),
    )
    validate_config(cfg)
    return cfg


def load_config(path):
    with open(path) as fh:
        text = fh.read()
    return parse_config(text, base_dir=os.path.dirname(os.path.abspath(path)))


def validate_config(cfg):
    if cfg.horizon < 1:
        raise ValidationError("horizon >= 1", f"empty horizon (T = {cfg.horizon})")
    if cfg.agents < 1:
        raise ValidationError("agents >= 1", f"need at least one agent, got {cfg.agents}")
    if cfg.seed < 0:
        raise ValidationError("seed >= 0", f"seed must be non-negative, got {cfg.seed}")
    w = cfg.weights
    if w.q < 0 or w.q_terminal < 0:
        raise ValidationError("Q, Q_T positive semidefinite", "state weights must be >= 0")
    if w.r <= 0:
        raise ValidationError("R positive definite", "input weight r must be > 0")
    f = cfg.fleet
    if f.a_range[0] > f.a_range[1]:
        raise ValidationError("fleet.a_range ordered", f"{f.a_range}")
    if f.noise_variance < 0:
        raise ValidationError("W positive semidefinite", "noise_variance must be >= 0")
    if f.capacity_kwh <= 0:
        raise ValidationError("fleet.capacity_kwh > 0", f"{f.capacity_kwh}")
    if f.initial_soc_range[0] > f.initial_soc_range[1]:
        raise ValidationError("fleet.initial_soc_range ordered", f"{f.initial_soc_range}")
    s = cfg.schedule
    if s.strategy not in STRATEGIES:
        raise ValidationError("schedule.strategy", f"{s.strategy!r} not in {STRATEGIES}")
    if s.eta < 0:
        raise ValidationError("eta >= 0", f"soft penalty weight {s.eta}")
    so = cfg.solar
    if so.source == "synthetic":
        start, end = so.daylight
        if not (0 <= start < end <= cfg.horizon):
            raise ValidationError("solar.daylight inside horizon", f"{so.daylight} vs T={cfg.horizon}")
        if so.peak_kw < 0:
            raise ValidationError("solar.peak_kw >= 0", f"{so.peak_kw}")
    elif so.source == "csv":
        if not so.path or not so.column:
            raise ValidationError("solar csv source", "needs both 'path' and 'column'")
    else:
        raise ValidationError("solar.source", f"{so.source!r} not in ('synthetic', 'csv')")
    b = cfg.bounds
    if b is not None and b.u_min is not None and b.u_max is not None and b.u_min > b.u_max:
        raise ValidationError("bounds ordered", f"u_min {b.u_min} > u_max {b.u_max}")


def config_to_dict(cfg):
    out = {
        "agents": cfg.agents,
        "seed": cfg.seed,
        "horizon": cfg.horizon,
        "weights": dataclasses.asdict(cfg.weights),
        "fleet": {k: list(v) if isinstance(v, tuple) else v
                  for k, v in dataclasses.asdict(cfg.fleet).items()},
        "classes": {k: v for k, v in cfg.classes},
        "schedule": dataclasses.asdict(cfg.schedule),
    }
    so = cfg.solar
    if so.source == "synthetic":
        out["solar"] = {"source": so.source, "peak_kw": so.peak_kw, "daylight": list(so.daylight)}
    else:
        out["solar"] = {"source": so.source, "path": so.path, "column": so.column}
    if cfg.bounds is not None:
        out["bounds"] = {k: v for k, v in dataclasses.asdict(cfg.bounds).items() if v is not None}
    return out


def dump_config(cfg):
    return yaml.safe_dump(config_to_dict(cfg), sort_keys=False)


def solar_profile(cfg):
    so = cfg.solar
    if so.source == "synthetic":
        return synthetic_solar(cfg.horizon, so.peak_kw, so.daylight)
    path = so.path if os.path.isabs(so.path) else os.path.join(cfg.base_dir, so.path)
    try:
        return load_solar_csv(path, so.column, horizon=cfg.horizon)
    except (OSError, ValueError) as exc:
        raise ConfigParseError(str(exc), field="solar.path") from None


def fleet_params(cfg):
    f, w = cfg.fleet, cfg.weights
    return FleetParams(
        a_range=f.a_range, b=f.b, noise_variance=f.noise_variance,
        capacity_kwh=f.capacity_kwh, initial_soc_range=f.initial_soc_range,
        class_targets=cfg.classes, q=w.q, q_terminal=w.q_terminal, r=w.r,
    )


def scenario_from_config(cfg):
    b = cfg.bounds or BoundsConfig()
    return build_scenario(
        cfg.schedule.strategy, solar_profile(cfg), cfg.agents, cfg.seed,
        cfg.schedule.eta, fleet_params(cfg), b.u_min, b.u_max,
    )
