"""Scenario configuration: presets, JSON configs, overrides, build and run.

A scenario is a JSON object

    {"example": "ex1" | "ex2",
     "params": {...},           # fields of the example's config
     "solver": {"dt": .., "max_t": .., "max_j": .., "guard_tol": ..},
     "disturbance": {"kind": "noise", "delta": .., "seed": .., "hold": ..},
     "inflate": 0.0}

``params`` for ``ex1`` are ``alpha_bar, eps0a, eps1a, tau_star, xi0, q0, z0,
z1, tau0``; for ``ex2`` any field of ``Example2Config``. ``disturbance`` may
instead give per-channel signals ``{"d1": {...}, ..., "d4": {...}}`` with the
keys of ``perturb.Signal``.
"""

from __future__ import annotations

import copy
import dataclasses
import json
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .core import HybridArc, SolverConfig, solve
from .errors import InvalidConfig, InvalidParams
from .examples.ex1 import Example1Config, ex1_build
from .examples.ex2 import Example2Config, ex2_build
from .perturb import DisturbanceProfile, Signal, inflate_system, perturb_plant
from .supervisor import (SupervisedLayout, SupervisedLoop, SupervisorParams, build_supervised_system,
                         switching_census)

PRESETS = {
    "ex1-figA": {
        "example": "ex1",
        "params": {"xi0": [3.0, -3.0], "q0": 1, "z0": 0.0, "z1": 1.0, "eps0a": 0.01, "eps1a": 0.01, "tau_star": 1.0},
        "solver": {"max_t": 15.0},
    },
    # with q0 = 0 and z0 = z1 = 0 the start lies in neither the flow nor the
    # jump set of the supervisor; z0 = 1 puts it in the 0 -> 1 jump set
    "ex1-figB": {
        "example": "ex1",
        "params": {"xi0": [30.0, -30.0], "q0": 0, "z0": 1.0, "z1": 0.0, "eps0a": 0.01, "eps1a": 0.01, "tau_star": 1.0},
        "solver": {"max_t": 40.0},
    },
    "ex1-figC": {
        "example": "ex1",
        "params": {"xi0": [3.0, -3.0], "q0": 1, "z0": 0.0, "z1": 1.0, "eps0a": 4.0 / 27.0, "eps1a": 5e-5,
                   "tau_star": 15.0},
        "solver": {"max_t": 40.0},
    },
    "ex2-below": {"example": "ex2", "params": {"zeta1_0": 1}, "solver": {"max_t": 30.0}},
    "ex2-above": {"example": "ex2", "params": {"zeta1_0": 2}, "solver": {"max_t": 30.0}},
}

_SOLVER_KEYS = {"dt", "max_t", "max_j", "guard_tol", "settle_time", "refine_iters"}
_EX1_KEYS = {"alpha_bar", "eps0a", "eps1a", "tau_star", "xi0", "q0", "z0", "z1", "tau0"}
_EX2_KEYS = {f.name for f in dataclasses.fields(Example2Config)}
_TOP_KEYS = {"example", "params", "solver", "disturbance", "inflate", "preset", "seed"}


@dataclass
class ScenarioConfig:
    example: str
    params: dict = field(default_factory=dict)
    solver: dict = field(default_factory=dict)
    disturbance: Optional[dict] = None
    inflate: float = 0.0
    seed: int = 0
    preset: Optional[str] = None

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


def preset_config(name: str) -> ScenarioConfig:
    if name not in PRESETS:
        raise InvalidConfig(f"unknown preset {name!r}; choose from {sorted(PRESETS)}", field="preset")
    d = copy.deepcopy(PRESETS[name])
    return ScenarioConfig(d["example"], d.get("params", {}), d.get("solver", {}), preset=name)


def config_from_dict(d) -> ScenarioConfig:
    if not isinstance(d, dict):
        raise InvalidConfig("scenario config must be a JSON object", field="<root>")
    for key in d:
        if key not in _TOP_KEYS:
            raise InvalidConfig(f"unknown config key {key!r}", field=key)
    if "preset" in d and d["preset"] is not None:
        base = preset_config(d["preset"])
        if "example" in d and d["example"] != base.example:
            raise InvalidConfig("example does not match the preset", field="example")
        base.params.update(d.get("params") or {})
        base.solver.update(d.get("solver") or {})
        cfg = base
    else:
        if "example" not in d:
            raise InvalidConfig("missing 'example' (or 'preset')", field="example")
        cfg = ScenarioConfig(d["example"], dict(d.get("params") or {}), dict(d.get("solver") or {}))
    cfg.disturbance = d.get("disturbance")
    cfg.inflate = d.get("inflate", 0.0)
    cfg.seed = d.get("seed", 0)
    validate(cfg)
    return cfg


def load_config(path) -> ScenarioConfig:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise InvalidConfig(f"config is not valid JSON: {exc}", field="<file>") from exc
    except OSError as exc:
        raise InvalidConfig(f"cannot read config: {exc}", field="<file>") from exc
    return config_from_dict(doc)


def _parse_value(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def apply_overrides(cfg: ScenarioConfig, overrides) -> ScenarioConfig:
    """Apply ``key=value`` strings; keys name a param, a solver field,
    ``inflate``, ``seed``, or ``disturbance.<field>``."""
    for item in overrides or ():
        if "=" not in item:
            raise InvalidConfig(f"override {item!r} is not key=value", field=item)
        key, raw = item.split("=", 1)
        key = key.strip()
        value = _parse_value(raw.strip())
        if key in _SOLVER_KEYS:
            cfg.solver[key] = value
        elif key in ("inflate", "seed"):
            setattr(cfg, key, value)
        elif key.startswith("disturbance."):
            cfg.disturbance = dict(cfg.disturbance or {"kind": "noise"})
            cfg.disturbance[key.split(".", 1)[1]] = value
        else:
            cfg.params[key] = value
    validate(cfg)
    return cfg


def validate(cfg: ScenarioConfig):
    if cfg.example not in ("ex1", "ex2"):
        raise InvalidConfig(f"example must be 'ex1' or 'ex2', got {cfg.example!r}", field="example")
    allowed = _EX1_KEYS if cfg.example == "ex1" else _EX2_KEYS
    for key in cfg.params:
        if key not in allowed:
            raise InvalidConfig(f"unknown parameter {key!r} for {cfg.example}", field=f"params.{key}")
    for key, value in cfg.solver.items():
        if key not in _SOLVER_KEYS:
            raise InvalidConfig(f"unknown solver field {key!r}", field=f"solver.{key}")
        if not isinstance(value, (int, float)) or isinstance(value, bool) or not value > 0:
            raise InvalidConfig(f"solver.{key} must be a positive number, got {value!r}", field=f"solver.{key}")
    if not isinstance(cfg.inflate, (int, float)) or cfg.inflate < 0:
        raise InvalidConfig(f"inflate must be a nonnegative number, got {cfg.inflate!r}", field="inflate")
    if not isinstance(cfg.seed, int) or cfg.seed < 0:
        raise InvalidConfig(f"seed must be a nonnegative integer, got {cfg.seed!r}", field="seed")
    for key, value in cfg.params.items():
        if key in ("xi0", "xi_star", "xi_circ", "xi_bar"):
            if not (isinstance(value, (list, tuple)) and len(value) == 2
                    and all(isinstance(v, (int, float)) and math.isfinite(v) for v in value)):
                raise InvalidConfig(f"{key} must be a list of two finite numbers", field=f"params.{key}")
        elif not isinstance(value, (int, float)) or isinstance(value, bool) or not math.isfinite(value):
            raise InvalidConfig(f"{key} must be a finite number, got {value!r}", field=f"params.{key}")
    _example_config(cfg)


def _example_config(cfg: ScenarioConfig):
    p = dict(cfg.params)
    try:
        if cfg.example == "ex1":
            sup = SupervisorParams(p.pop("eps0a", 0.01), p.pop("eps1a", 0.01), p.pop("tau_star", 1.0))
            if "xi0" in p:
                p["xi0"] = tuple(p["xi0"])
            return Example1Config(sup_params=sup, **p)
        for key in ("xi0", "xi_star", "xi_circ", "xi_bar"):
            if key in p:
                p[key] = tuple(p[key])
        ex = Example2Config(**p)
        SupervisorParams(ex.eps0a, ex.eps1a, ex.tau_star)
        return ex
    except InvalidParams as exc:
        raise InvalidConfig(str(exc), field=_guess_field(str(exc))) from exc
    except InvalidConfig as exc:
        if exc.field is not None and not exc.field.startswith("params."):
            exc.field = f"params.{exc.field}"
        raise


def _guess_field(msg: str) -> str:
    for key in ("eps0a", "eps1a", "tau_star", "z0", "z1", "tau", "q"):
        if msg.startswith(key):
            return f"params.{key}"
    return "params"


def solver_config(cfg: ScenarioConfig) -> SolverConfig:
    s = dict(cfg.solver)
    if "max_j" in s:
        s["max_j"] = int(s["max_j"])
    if "refine_iters" in s:
        s["refine_iters"] = int(s["refine_iters"])
    return SolverConfig(**s)


def _profile(cfg: ScenarioConfig, plant) -> Optional[DisturbanceProfile]:
    d = cfg.disturbance
    if not d:
        return None
    if any(k in d for k in ("d1", "d2", "d3", "d4")):
        sig = {}
        for k in ("d1", "d2", "d3", "d4"):
            if k in d and d[k] is not None:
                try:
                    sig[k] = Signal(**d[k])
                except TypeError as exc:
                    raise InvalidConfig(str(exc), field=f"disturbance.{k}") from exc
        return DisturbanceProfile(**sig)
    kind = d.get("kind", "noise")
    if kind == "zero":
        return DisturbanceProfile()
    if kind != "noise":
        raise InvalidConfig("shorthand disturbance supports kind 'noise' or 'zero'", field="disturbance.kind")
    delta = d.get("delta", 0.0)
    if not isinstance(delta, (int, float)) or delta < 0:
        raise InvalidConfig("disturbance.delta must be nonnegative", field="disturbance.delta")
    return DisturbanceProfile.noise(float(delta), plant, seed=int(d.get("seed", cfg.seed)), hold=float(d.get("hold", 0.05)))


def disturbed_loop(loop: SupervisedLoop, profile: DisturbanceProfile) -> SupervisedLoop:
    """Same supervised loop around the disturbed plant (time appended to the plant state)."""
    plant = perturb_plant(loop.plant, profile)
    system = build_supervised_system(plant, loop.K0, loop.K1, loop.obs0, loop.obs1, loop.params,
                                     name=f"{loop.name} (disturbed)")
    layout = SupervisedLayout(plant.n_p, loop.layout.n_c)
    n = loop.plant.n_p
    x0 = np.concatenate([loop.x0[:n], [0.0], loop.x0[n:]])
    return SupervisedLoop(loop.name, plant, loop.K0, loop.K1, loop.obs0, loop.obs1, loop.params, layout, system, x0)


def build(cfg: ScenarioConfig) -> SupervisedLoop:
    ex = _example_config(cfg)
    name = cfg.preset or cfg.example
    try:
        loop = ex1_build(ex, name) if cfg.example == "ex1" else ex2_build(ex, name)
    except InvalidParams as exc:
        raise InvalidConfig(str(exc), field=_guess_field(str(exc))) from exc
    prof = _profile(cfg, loop.plant)
    if prof is not None:
        loop = disturbed_loop(loop, prof)
    if cfg.inflate > 0:
        rng = np.random.default_rng(cfg.seed)
        pts = loop.x0 + rng.normal(size=(64, loop.layout.dim))
        system = inflate_system(loop.system, float(cfg.inflate), points=pts, rng=rng)
        loop = dataclasses.replace(loop, system=system)
    return loop


@dataclass
class RunResult:
    loop: SupervisedLoop
    arc: HybridArc
    summary: dict


def summarize(loop: SupervisedLoop, arc: HybridArc) -> dict:
    census = switching_census(arc, loop.layout)
    stamp = arc.final_stamp
    return {
        "termination": arc.termination.value,
        "final_distance_A0": loop.distance_A0(arc.final_state),
        "final_t": stamp.t,
        "final_j": stamp.j,
        "switch_times": [[e.t, e.j, e.q_from, e.q_to] for e in census.events],
        "min_dwell": census.min_dwell_t if math.isfinite(census.min_dwell_t) else None,
    }


def run(cfg: ScenarioConfig) -> RunResult:
    loop = build(cfg)
    arc = solve(loop.system, loop.x0, solver_config(cfg))
    return RunResult(loop, arc, summarize(loop, arc))


def columns(loop: SupervisedLoop) -> list:
    return loop.layout.columns()
