"""Scenario configuration: parsing, validation, hashing and seeding.

A scenario is a JSON document (validated against data/scenario.schema.json)
describing the swarm size, the domain script, the control law and the
integration settings. Two hashes identify a parsed scenario:

* config_hash covers every field.
* scenario_hash drops control.feedforward, so runs that differ only in
  the feedforward switch can be compared against each other.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from importlib import resources
from typing import Optional

import jsonschema
import numpy as np

from .control import ControlConfig
from .domain import CircularTranslationScript, KeyframeScript, StaticScript
from .errors import CoverageError, InvalidScenario
from .geometry import ConvexPolygon

CONTAINMENTS = ("project", "error")
INTEGRATORS = ("heun", "euler")

SEED_MARGIN = 1e-6
SEED_MIN_SEPARATION = 1e-8


def _schema():
    text = resources.files("swarmcover").joinpath("data/scenario.schema.json").read_text()
    return json.loads(text)


@dataclass
class ScenarioConfig:
    n_agents: int
    domain: object  # StaticScript | CircularTranslationScript | KeyframeScript
    control: ControlConfig = field(default_factory=ControlConfig)
    dt: float = 0.05
    duration: float = 10.0
    rng_seed: int = 0
    initial_positions: Optional[tuple] = None
    record_every: int = 1
    containment: str = "project"
    integrator: str = "heun"

    def __post_init__(self):
        if self.n_agents < 1:
            raise InvalidScenario("n_agents must be at least 1")
        if not (self.dt > 0 and math.isfinite(self.dt)):
            raise InvalidScenario(f"dt must be positive and finite, got {self.dt}")
        if not (self.duration >= 0 and math.isfinite(self.duration)):
            raise InvalidScenario(f"duration must be nonnegative, got {self.duration}")
        if self.record_every < 1:
            raise InvalidScenario("record_every must be at least 1")
        if self.containment not in CONTAINMENTS:
            raise InvalidScenario(f"unknown containment policy {self.containment!r}")
        if self.integrator not in INTEGRATORS:
            raise InvalidScenario(f"unknown integrator {self.integrator!r}")
        horizon = getattr(self.domain, "horizon", math.inf)
        if self.duration > horizon + 1e-9:
            raise InvalidScenario(
                f"duration {self.duration} exceeds the domain script horizon {horizon}"
            )
        if self.initial_positions is not None:
            pts = tuple(
                (float(p[0]), float(p[1])) for p in self.initial_positions
            )
            if len(pts) != self.n_agents:
                raise InvalidScenario(
                    f"{len(pts)} initial positions for {self.n_agents} agents"
                )
            object.__setattr__(self, "initial_positions", pts)

    @classmethod
    def from_dict(cls, data: dict) -> "ScenarioConfig":
        try:
            jsonschema.validate(data, _schema())
        except jsonschema.ValidationError as err:
            raise InvalidScenario(f"schema: {err.message}") from err
        try:
            domain = _script_from_dict(data["domain"])
            control = ControlConfig(**data.get("control", {}))
        except InvalidScenario:
            raise
        except (CoverageError, ValueError) as err:
            raise InvalidScenario(str(err)) from err
        return cls(
            n_agents=data["n_agents"],
            domain=domain,
            control=control,
            dt=float(data["dt"]),
            duration=float(data["duration"]),
            rng_seed=data.get("rng_seed", 0),
            initial_positions=data.get("initial_positions"),
            record_every=data.get("record_every", 1),
            containment=data.get("containment", "project"),
            integrator=data.get("integrator", "heun"),
        )

    def to_dict(self) -> dict:
        return {
            "n_agents": self.n_agents,
            "rng_seed": self.rng_seed,
            "initial_positions": (
                None
                if self.initial_positions is None
                else [list(p) for p in self.initial_positions]
            ),
            "domain": _script_to_dict(self.domain),
            "control": {
                "kappa": self.control.kappa,
                "law": self.control.law,
                "feedforward": self.control.feedforward,
                "neumann_order": self.control.neumann_order,
            },
            "dt": self.dt,
            "duration": self.duration,
            "record_every": self.record_every,
            "containment": self.containment,
            "integrator": self.integrator,
        }

    def config_hash(self) -> str:
        return _digest(self.to_dict())

    def scenario_hash(self) -> str:
        data = self.to_dict()
        del data["control"]["feedforward"]
        return _digest(data)


def _digest(data: dict) -> str:
    canon = json.dumps(data, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()


def _script_from_dict(d: dict):
    kind = d["type"]
    if kind == "static":
        return StaticScript(ConvexPolygon.from_points(d["vertices"]))
    if kind == "circular_translation":
        poly = ConvexPolygon.from_points(d["vertices"])
        omega = d["omega"] if "omega" in d else 2.0 * math.pi / d["period"]
        return CircularTranslationScript(poly, float(d["radius"]), float(omega))
    if kind == "keyframes":
        return KeyframeScript(d["times"], d["polygons"])
    raise InvalidScenario(f"unknown domain type {kind!r}")


def _script_to_dict(script) -> dict:
    if isinstance(script, StaticScript):
        return {
            "type": "static",
            "vertices": [list(v) for v in script.polygon.vertices],
        }
    if isinstance(script, CircularTranslationScript):
        return {
            "type": "circular_translation",
            "vertices": [list(v) for v in script.polygon.vertices],
            "radius": script.radius,
            "omega": script.omega,
        }
    if isinstance(script, KeyframeScript):
        return {
            "type": "keyframes",
            "times": list(script.times),
            "polygons": [[list(v) for v in p] for p in script.polygons],
        }
    raise TypeError(f"cannot serialize domain script {type(script).__name__}")


def load(path) -> ScenarioConfig:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as err:
        raise InvalidScenario(f"{path}: {err}") from err
    return ScenarioConfig.from_dict(data)


def seed_positions(cfg: ScenarioConfig) -> np.ndarray:
    """Initial agent positions inside S(0).

    Explicit positions are validated to be strictly interior; otherwise
    agents are drawn uniformly (rejection sampling, margin 1e-6 from the
    boundary, pairwise separation above 1e-8) from the seeded generator.
    """
    poly = cfg.domain.at(0.0).polygon
    if cfg.initial_positions is not None:
        pos = np.asarray(cfg.initial_positions, dtype=float)
        for i, q in enumerate(pos):
            if not poly.contains(q, tol=-1e-12):
                raise InvalidScenario(f"initial position {i} is outside the domain")
        return pos
    rng = np.random.default_rng(cfg.rng_seed)
    arr = poly.as_array()
    lo = arr.min(axis=0)
    hi = arr.max(axis=0)
    out = np.empty((cfg.n_agents, 2))
    count = 0
    attempts = 0
    while count < cfg.n_agents:
        attempts += 1
        if attempts > 200000:
            raise InvalidScenario("could not place agents inside the domain")
        q = lo + rng.random(2) * (hi - lo)
        if not poly.contains(q, tol=-SEED_MARGIN):
            continue
        if count and np.min(np.hypot(*(out[:count] - q).T)) <= SEED_MIN_SEPARATION:
            continue
        out[count] = q
        count += 1
    return out
