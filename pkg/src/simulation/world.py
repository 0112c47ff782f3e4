"""
Driving World Simulation
--------------------------
Deterministic fixed-step 2D world: ego kinematic bicycle model,
scripted NPC actors, traffic lights and stop signs along a route.

Features:
    - Kinematic bicycle model with throttle/brake/drag
    - Scripted actor behaviors
    - Traffic light phase cycling and stop-sign bookkeeping
    - Monotone route progress tracking

Author: Mehmet Demir
"""

import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Optional, Tuple

from src.config import WorldConfig
from src.hierarchy.types import ControlSignal
from src.simulation.route import Route, wrap_angle


DEFAULT_WORLD = WorldConfig()


class ActorKind(Enum):
    VEHICLE = "Vehicle"
    PEDESTRIAN = "Pedestrian"
    BIKE = "Bike"


class Behavior(Enum):
    STATIONARY = "Stationary"
    CONSTANT_VELOCITY = "ConstantVelocity"
    SIGNAL_COMPLIANT = "SignalCompliant"
    SCRIPTED_CROSSING = "ScriptedCrossing"


class SignalKind(Enum):
    TRAFFIC_LIGHT = "TrafficLight"
    STOP_SIGN = "StopSign"


class Phase(Enum):
    RED = "Red"
    GREEN = "Green"


@dataclass(frozen=True)
class EgoState:
    x: float
    y: float
    heading: float = 0.0
    speed: float = 0.0
    wheelbase: float = 2.8

    def __post_init__(self):
        if self.speed < 0:
            raise ValueError(f"ego speed must be >= 0, got {self.speed}")
        object.__setattr__(self, "heading", wrap_angle(self.heading))

    @property
    def position(self) -> Tuple[float, float]:
        return (self.x, self.y)

    def to_dict(self) -> dict:
        return {"x_m": self.x, "y_m": self.y, "heading_rad": self.heading,
                "speed_mps": self.speed}


@dataclass(frozen=True)
class Actor:
    id: int
    kind: ActorKind
    x: float
    y: float
    heading: float = 0.0
    speed: float = 0.0
    behavior: Behavior = Behavior.STATIONARY
    span_m: float = 0.0         # crossing width for ScriptedCrossing
    travelled_m: float = 0.0

    @property
    def position(self) -> Tuple[float, float]:
        return (self.x, self.y)

    def to_dict(self) -> dict:
        return {
            "id": self.id, "kind": self.kind.value, "x_m": self.x, "y_m": self.y,
            "heading_rad": self.heading, "speed_mps": self.speed,
            "behavior": self.behavior.value, "span_m": self.span_m,
            "travelled_m": self.travelled_m,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Actor":
        return cls(
            id=data["id"], kind=ActorKind(data["kind"]), x=data["x_m"], y=data["y_m"],
            heading=data.get("heading_rad", 0.0), speed=data.get("speed_mps", 0.0),
            behavior=Behavior(data.get("behavior", "Stationary")),
            span_m=data.get("span_m", 0.0), travelled_m=data.get("travelled_m", 0.0),
        )


@dataclass(frozen=True)
class SignalState:
    id: int
    kind: SignalKind
    x: float
    y: float
    cycle_s: float = 16.0
    offset_s: float = 0.0
    phase: Optional[Phase] = None
    route_s: Optional[float] = None     # stop line arclength along the route
    on_route: bool = True

    def __post_init__(self):
        if self.kind is SignalKind.STOP_SIGN and self.phase is not None:
            raise ValueError("stop signs have no phase")
        if self.kind is SignalKind.TRAFFIC_LIGHT and self.phase is None:
            object.__setattr__(self, "phase", phase_at(self, 0.0))

    @property
    def position(self) -> Tuple[float, float]:
        return (self.x, self.y)

    @property
    def is_red(self) -> bool:
        return self.kind is SignalKind.TRAFFIC_LIGHT and self.phase is Phase.RED

    def to_dict(self) -> dict:
        return {
            "id": self.id, "kind": self.kind.value, "x_m": self.x, "y_m": self.y,
            "cycle_s": self.cycle_s, "offset_s": self.offset_s,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "SignalState":
        return cls(
            id=data["id"], kind=SignalKind(data["kind"]), x=data["x_m"], y=data["y_m"],
            cycle_s=data.get("cycle_s", 16.0), offset_s=data.get("offset_s", 0.0),
        )


@dataclass(frozen=True)
class StaticProp:
    """Street furniture; hitting it is a layout collision."""
    id: int
    x: float
    y: float
    radius: float = 0.3

    @property
    def position(self) -> Tuple[float, float]:
        return (self.x, self.y)

    def to_dict(self) -> dict:
        return {"id": self.id, "x_m": self.x, "y_m": self.y, "radius_m": self.radius}

    @classmethod
    def from_dict(cls, data: dict) -> "StaticProp":
        return cls(id=data["id"], x=data["x_m"], y=data["y_m"],
                   radius=data.get("radius_m", 0.3))


def phase_at(signal: SignalState, time_s: float) -> Optional[Phase]:
    """Red for the first half of each cycle, green for the second."""
    if signal.kind is not SignalKind.TRAFFIC_LIGHT:
        return None
    t = (time_s + signal.offset_s) % signal.cycle_s
    return Phase.RED if t < 0.5 * signal.cycle_s else Phase.GREEN


@dataclass(frozen=True)
class WorldState:
    """Full simulation state. Stepping never mutates it."""
    ego: EgoState
    route: Route
    actors: Tuple[Actor, ...] = ()
    signals: Tuple[SignalState, ...] = ()
    props: Tuple[StaticProp, ...] = ()
    tick: int = 0
    time_s: float = 0.0
    rng_seed: int = 0
    progress_s: float = 0.0
    blocked_s: float = 0.0
    cleared_stop_signs: Tuple[int, ...] = ()
    last_control: ControlSignal = field(default_factory=ControlSignal)
    config: WorldConfig = field(default=DEFAULT_WORLD, repr=False, compare=False)

    def __post_init__(self):
        ids = [a.id for a in self.actors]
        if len(ids) != len(set(ids)):
            raise ValueError("actor ids must be unique")
        object.__setattr__(self, "actors", tuple(self.actors))
        object.__setattr__(self, "props", tuple(self.props))
        object.__setattr__(self, "signals", tuple(
            self._locate(s) if s.route_s is None else s for s in self.signals
        ))

    def _locate(self, signal: SignalState) -> SignalState:
        proj = self.route.project(signal.position)
        tol = self.config.signal_lateral_tolerance
        return replace(signal, route_s=proj.s, on_route=abs(proj.offset) <= tol)


def initial_state(
    route: Route,
    actors=(),
    signals=(),
    props=(),
    speed: float = 0.0,
    rng_seed: int = 0,
    config: WorldConfig = DEFAULT_WORLD
) -> WorldState:
    """Ego at the start of the route, aligned with its first segment."""
    x, y, heading = route.point_at(0.0)
    ego = EgoState(x=x, y=y, heading=heading, speed=speed, wheelbase=config.wheelbase)
    return WorldState(ego=ego, route=route, actors=tuple(actors), signals=tuple(signals),
                      props=tuple(props), rng_seed=rng_seed, config=config)


def step_ego(ego: EgoState, control: ControlSignal, dt: float,
             config: WorldConfig = DEFAULT_WORLD) -> EgoState:
    """One kinematic bicycle step. Positive steer turns right."""
    v = ego.speed
    accel = config.a_max * control.throttle - config.b_max * control.brake - config.c_drag * v
    v_new = min(max(v + accel * dt, 0.0), config.v_max)

    yaw_rate = -(v / ego.wheelbase) * math.tan(config.delta_max * control.steer)
    heading = wrap_angle(ego.heading + yaw_rate * dt)

    return EgoState(
        x=ego.x + v_new * math.cos(heading) * dt,
        y=ego.y + v_new * math.sin(heading) * dt,
        heading=heading,
        speed=v_new,
        wheelbase=ego.wheelbase,
    )


def _red_light_held(actor: Actor, signals, hold_m: float = 8.0) -> bool:
    """True when a red light sits just ahead of the actor's heading."""
    c, s = math.cos(actor.heading), math.sin(actor.heading)
    for sig in signals:
        if not sig.is_red:
            continue
        dx, dy = sig.x - actor.x, sig.y - actor.y
        forward = dx * c + dy * s
        lateral = -dx * s + dy * c
        if 0.0 <= forward <= hold_m and abs(lateral) <= 4.0:
            return True
    return False


def step_actor(actor: Actor, signals, dt: float) -> Actor:
    if actor.behavior is Behavior.STATIONARY or actor.speed == 0.0:
        return actor

    if actor.behavior is Behavior.SIGNAL_COMPLIANT and _red_light_held(actor, signals):
        return actor

    dist = actor.speed * dt
    x = actor.x + dist * math.cos(actor.heading)
    y = actor.y + dist * math.sin(actor.heading)

    if actor.behavior is Behavior.SCRIPTED_CROSSING:
        travelled = actor.travelled_m + dist
        if travelled >= actor.span_m:
            return replace(actor, x=x, y=y, heading=wrap_angle(actor.heading + math.pi),
                           travelled_m=0.0)
        return replace(actor, x=x, y=y, travelled_m=travelled)

    return replace(actor, x=x, y=y)


def signal_distance_ahead(state: WorldState, kind: SignalKind, ego_s: float,
                          max_range: float, red_only: bool = False,
                          skip_cleared: bool = False) -> Optional[float]:
    """Arclength to the nearest matching signal ahead on the route."""
    best = None
    for sig in state.signals:
        if sig.kind is not kind or not sig.on_route:
            continue
        if red_only and not sig.is_red:
            continue
        if skip_cleared and sig.id in state.cleared_stop_signs:
            continue
        ahead = sig.route_s - ego_s
        if 0.0 <= ahead <= max_range and (best is None or ahead < best):
            best = ahead
    return best


def step(state: WorldState, control: ControlSignal, dt: Optional[float] = None) -> WorldState:
    """
    Advance the world by one fixed step.

    Pure function: identical inputs give bit-identical outputs.
    """
    cfg = state.config
    dt = cfg.dt if dt is None else dt
    if dt <= 0:
        raise ValueError(f"dt must be > 0, got {dt}")

    ego = step_ego(state.ego, control, dt, cfg)
    tick = state.tick + 1
    time_s = tick * dt

    signals = tuple(
        replace(s, phase=phase_at(s, time_s)) if s.kind is SignalKind.TRAFFIC_LIGHT else s
        for s in state.signals
    )
    actors = tuple(step_actor(a, state.signals, dt) for a in state.actors)

    proj = state.route.project(ego.position, state.progress_s,
                               cfg.projection_back_m, cfg.projection_ahead_m)
    progress = max(state.progress_s, min(proj.s, state.route.length_m))

    nxt = replace(state, ego=ego, tick=tick, time_s=time_s, signals=signals,
                  actors=actors, progress_s=progress, last_control=control)

    stopped = ego.speed < 0.1
    cleared = set(state.cleared_stop_signs)
    if stopped:
        for sig in signals:
            if sig.kind is SignalKind.STOP_SIGN and sig.on_route:
                ahead = sig.route_s - proj.s
                if 0.0 <= ahead <= cfg.stop_clear_distance:
                    cleared.add(sig.id)

    red_ahead = signal_distance_ahead(nxt, SignalKind.TRAFFIC_LIGHT, proj.s,
                                      cfg.signal_range, red_only=True)
    blocked = state.blocked_s + dt if stopped and red_ahead is None else 0.0

    return replace(nxt, cleared_stop_signs=tuple(sorted(cleared)), blocked_s=blocked)
