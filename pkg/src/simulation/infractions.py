"""
Infraction Detection
----------------------
Compares two consecutive world states and reports traffic infractions.

Continuing conditions (an overlap, an off-road stretch) are reported
once, at onset.
"""

from dataclasses import dataclass
from enum import Enum
from typing import List, Optional, Tuple

import numpy as np
from scipy.spatial.distance import cdist

from src.simulation.sensing import actor_radius
from src.simulation.world import SignalKind, WorldState


class InfractionKind(Enum):
    VEHICLE_COLLISION = "VehicleCollision"
    PEDESTRIAN_COLLISION = "PedestrianCollision"
    LAYOUT_COLLISION = "LayoutCollision"
    RED_LIGHT_VIOLATION = "RedLightViolation"
    OFFROAD_INFRACTION = "OffroadInfraction"
    STOP_SIGN_VIOLATION = "StopSignViolation"
    ROUTE_DEVIATION = "RouteDeviation"
    BLOCKED = "Blocked"


_KIND_ORDER = {kind: i for i, kind in enumerate(InfractionKind)}

_COLLISION_KIND = {
    "Vehicle": InfractionKind.VEHICLE_COLLISION,
    "Bike": InfractionKind.VEHICLE_COLLISION,
    "Pedestrian": InfractionKind.PEDESTRIAN_COLLISION,
}


@dataclass(frozen=True)
class InfractionEvent:
    tick: int
    kind: InfractionKind
    x: float
    y: float
    source_id: Optional[int] = None     # actor, prop or signal involved

    def to_dict(self) -> dict:
        return {"tick": self.tick, "kind": self.kind.value, "x_m": self.x,
                "y_m": self.y, "source_id": self.source_id}

    @classmethod
    def from_dict(cls, data: dict) -> "InfractionEvent":
        return cls(tick=data["tick"], kind=InfractionKind(data["kind"]),
                   x=data["x_m"], y=data["y_m"], source_id=data.get("source_id"))


def _project(state: WorldState):
    cfg = state.config
    return state.route.project(state.ego.position, state.progress_s,
                               cfg.projection_back_m, cfg.projection_ahead_m)


def _offset(state: WorldState) -> float:
    return _project(state).offset


def route_progress(state: WorldState) -> Tuple[float, float]:
    """(completion fraction, unsigned lateral offset) of the ego."""
    proj = _project(state)
    s = max(state.progress_s, proj.s)
    fraction = min(max(s / state.route.length_m, 0.0), 1.0)
    return fraction, abs(proj.offset)


def _overlapping(state: WorldState, objects, radius_of) -> dict:
    """Map object id -> True when its circle overlaps the ego circle."""
    if not objects:
        return {}
    cfg = state.config
    positions = np.array([o.position for o in objects], dtype=float)
    dist = cdist(np.array([state.ego.position]), positions)[0]
    return {
        o.id: bool(dist[i] < cfg.ego_radius + radius_of(o))
        for i, o in enumerate(objects)
    }


def detect_infractions(prev: WorldState, nxt: WorldState) -> List[InfractionEvent]:
    """
    Infractions that begin on the transition prev -> nxt.

    The result is sorted by kind then source id, so it does not depend on
    actor list order.
    """
    cfg = nxt.config
    x, y = nxt.ego.position
    events = []

    def emit(kind: InfractionKind, source_id: Optional[int] = None):
        events.append(InfractionEvent(nxt.tick, kind, x, y, source_id))

    by_actor = lambda a: actor_radius(a.kind, cfg)
    before = _overlapping(prev, prev.actors, by_actor)
    after = _overlapping(nxt, nxt.actors, by_actor)
    kinds = {a.id: a.kind for a in nxt.actors}
    for actor_id, hit in after.items():
        if hit and not before.get(actor_id, False):
            emit(_COLLISION_KIND[kinds[actor_id].value], actor_id)

    by_prop = lambda p: p.radius
    before = _overlapping(prev, prev.props, by_prop)
    after = _overlapping(nxt, nxt.props, by_prop)
    for prop_id, hit in after.items():
        if hit and not before.get(prop_id, False):
            emit(InfractionKind.LAYOUT_COLLISION, prop_id)

    cleared = set(prev.cleared_stop_signs) | set(nxt.cleared_stop_signs)
    for sig in prev.signals:
        if not sig.on_route:
            continue
        if not prev.progress_s < sig.route_s <= nxt.progress_s:
            continue
        if sig.kind is SignalKind.TRAFFIC_LIGHT and sig.is_red:
            emit(InfractionKind.RED_LIGHT_VIOLATION, sig.id)
        elif sig.kind is SignalKind.STOP_SIGN and sig.id not in cleared:
            emit(InfractionKind.STOP_SIGN_VIOLATION, sig.id)

    off_prev, off_next = abs(_offset(prev)), abs(_offset(nxt))
    if off_next > cfg.road_half_width >= off_prev:
        emit(InfractionKind.OFFROAD_INFRACTION)
    if off_next > cfg.d_dev >= off_prev:
        emit(InfractionKind.ROUTE_DEVIATION)

    if nxt.blocked_s >= cfg.t_block > prev.blocked_s:
        emit(InfractionKind.BLOCKED)

    events.sort(key=lambda e: (_KIND_ORDER[e.kind], -1 if e.source_id is None else e.source_id))
    return events
