"""
Procedural Towns
------------------
Seeded road networks with a pool of routes per length class and the
scenario (signals, actors, street furniture) placed along each route.

A town is an 8x8 grid of intersections 70 m apart with a few closed
intersections; routes are found with the A* road router and their
corners are rounded.

Example:
    town = generate_town(1, seed=42)
    route = town.route("t1-tiny-00")
    scenario = town.scenario("t1-tiny-00")
"""

import functools
import json
import logging
import math
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from src.hierarchy.types import Maneuver
from src.planning.astar import AStarRouter, Cell, RoadGrid
from src.simulation.route import Route, RouteTurn, wrap_angle
from src.simulation.world import (
    Actor, ActorKind, Behavior, SignalKind, SignalState, StaticProp,
)


logger = logging.getLogger(__name__)

TOWN_IDS = range(1, 9)
GRID_SIZE = 8
SPACING_M = 70.0
CORNER_RADIUS_M = 10.0
CLOSED_INTERSECTIONS = 6
ARC_STEPS = 9

TINY_COUNT, SHORT_COUNT, LONG_COUNT = 10, 6, 4
TINY_MAX_M, LONG_MIN_M = 150.0, 500.0
STOP_LINE_BEFORE_M = 12.0
ACTOR_CLEARANCE_M = 20.0

CROSSING_SPEED_MPS = 1.2
CURB_LATERAL_M = 3.5
CROSSING_SPAN_M = 60.0       # walks this far before turning back
CROSSING_WINDOW_M = (40.0, 110.0)
ONCOMING_SPEED_MPS = 5.0
ONCOMING_LATERAL_M = 3.5
BIKE_SPEED_MPS = 3.0

LANDMARK_CUES = (
    "a turning point with palm trees ahead",
    "the cornfield",
    "an open space with some parked vehicles",
    "grid lines on the ground",
)

# kind, lateral offset (left positive), probability
_PLACEMENTS = (
    ("parked_vehicle", -4.5, 0.40),
    ("bike", -4.0, 0.15),
    ("pedestrian", 6.0, 0.25),
    ("pole", -5.5, 0.10),
    ("waiting_vehicle", 3.0, 0.10),
)


@dataclass(frozen=True)
class Scenario:
    """Everything placed along one route."""
    route_id: str
    actors: Tuple[Actor, ...] = ()
    signals: Tuple[SignalState, ...] = ()
    props: Tuple[StaticProp, ...] = ()

    def to_dict(self) -> dict:
        return {
            "route_id": self.route_id,
            "actors": [a.to_dict() for a in self.actors],
            "signals": [s.to_dict() for s in self.signals],
            "props": [p.to_dict() for p in self.props],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Scenario":
        return cls(
            route_id=data["route_id"],
            actors=tuple(Actor.from_dict(a) for a in data.get("actors", ())),
            signals=tuple(SignalState.from_dict(s) for s in data.get("signals", ())),
            props=tuple(StaticProp.from_dict(p) for p in data.get("props", ())),
        )


@dataclass(frozen=True)
class Town:
    town_id: int
    seed: int
    grid: Tuple[Tuple[int, ...], ...]
    landmarks: Tuple[Tuple[Cell, str], ...]
    routes: Tuple[Route, ...]
    scenarios: Tuple[Scenario, ...]

    def route(self, route_id: str) -> Route:
        for route in self.routes:
            if route.route_id == route_id:
                return route
        raise KeyError(f"town {self.town_id} has no route '{route_id}'")

    def scenario(self, route_id: str) -> Scenario:
        for scenario in self.scenarios:
            if scenario.route_id == route_id:
                return scenario
        raise KeyError(f"town {self.town_id} has no scenario for '{route_id}'")

    def routes_by_class(self, length_class: str) -> List[Route]:
        return [r for r in self.routes if r.length_class == length_class]

    def to_dict(self, config_hash: Optional[str] = None) -> dict:
        return {
            "town_id": self.town_id,
            "seed": self.seed,
            "config_hash": config_hash,
            "spacing_m": SPACING_M,
            "grid": [list(row) for row in self.grid],
            "landmarks": [{"cell": list(cell), "cue": cue} for cell, cue in self.landmarks],
            "routes": [r.to_dict() for r in self.routes],
            "scenarios": [s.to_dict() for s in self.scenarios],
        }

    def to_json(self, config_hash: Optional[str] = None) -> str:
        return json.dumps(self.to_dict(config_hash), indent=2, sort_keys=True)


def cell_xy(cell: Cell) -> np.ndarray:
    return np.array([cell[0] * SPACING_M, cell[1] * SPACING_M], dtype=float)


def round_corners(points: Sequence[np.ndarray], radius: float = CORNER_RADIUS_M,
                  steps: int = ARC_STEPS) -> List[Tuple[float, float]]:
    """Replace every interior corner of a polyline with a circular arc."""
    pts = [np.asarray(p, dtype=float) for p in points]
    out = [pts[0]]
    for a, b, c in zip(pts, pts[1:], pts[2:]):
        u_in = (b - a) / np.linalg.norm(b - a)
        u_out = (c - b) / np.linalg.norm(c - b)
        cross = u_in[0] * u_out[1] - u_in[1] * u_out[0]
        if abs(cross) < 1e-9:
            out.append(b)
            continue
        theta = math.acos(float(np.clip(u_in @ u_out, -1.0, 1.0)))
        cut = radius * math.tan(theta / 2.0)
        side = 1.0 if cross > 0 else -1.0
        t1 = b - u_in * cut
        center = t1 + side * radius * np.array([-u_in[1], u_in[0]])
        out.append(t1)
        v = t1 - center
        for k in range(1, steps):
            phi = side * theta * k / steps
            c_, s_ = math.cos(phi), math.sin(phi)
            out.append(center + np.array([c_ * v[0] - s_ * v[1], s_ * v[0] + c_ * v[1]]))
        out.append(b + u_out * cut)
    out.append(pts[-1])
    return [(round(float(p[0]), 6), round(float(p[1]), 6)) for p in out]


def _descriptor(grid: RoadGrid, cell: Cell, heading: Cell) -> Optional[str]:
    """How an instruction names the junction at `cell` when entered along `heading`."""
    degree = grid.degree(*cell)
    if degree <= 2:
        return None     # a bend in the road, not a junction
    if not grid.is_open(cell[0] + heading[0], cell[1] + heading[1]):
        return "the end of the road"
    if degree == 3:
        return "the T-junction"
    return "the crossroads" if (cell[0] + cell[1]) % 2 else "the intersection"


def _label_turns(route: Route, grid: RoadGrid, cells: Sequence[Cell],
                 landmarks: Dict[Cell, str]) -> Tuple[RouteTurn, ...]:
    """Attach junction names and landmarks; bends keep junction None."""
    labeled = []
    for turn in route.turns:
        x, y, _ = route.point_at(0.5 * (turn.s_start + turn.s_end))
        k = int(np.argmin([np.hypot(*(cell_xy(c) - (x, y))) for c in cells]))
        cell = cells[k]
        prev = cells[k - 1] if k > 0 else cell
        heading = (int(np.sign(cell[0] - prev[0])), int(np.sign(cell[1] - prev[1])))
        labeled.append(RouteTurn(
            s_start=turn.s_start, s_end=turn.s_end, direction=turn.direction,
            angle_rad=turn.angle_rad, junction=_descriptor(grid, cell, heading),
            landmark=landmarks.get(cell),
        ))
    return tuple(labeled)


def _build_route(route_id: str, town_id: int, grid: RoadGrid, cells: Sequence[Cell],
                 points: Sequence[np.ndarray], length_class: str,
                 landmarks: Dict[Cell, str]) -> Route:
    draft = Route(route_id, town_id, round_corners(points))
    junctions = tuple(
        round(draft.project(cell_xy(c)).s, 6) for c in cells
        if 0.0 < draft.project(cell_xy(c)).s < draft.length_m and grid.degree(*c) >= 3
    )
    return Route(route_id, town_id, draft.polyline, junctions_s=junctions,
                 turns=_label_turns(draft, grid, list(cells), landmarks),
                 length_class=length_class)


def maneuver_of(turn: RouteTurn) -> Maneuver:
    """Turns at junctions keep their direction; bends read as following the road."""
    return turn.direction if turn.junction is not None else Maneuver.FOLLOW


def _tiny_routes(town_id: int, grid: RoadGrid, rng: np.random.Generator,
                 landmarks: Dict[Cell, str]) -> List[Route]:
    dirs = AStarRouter.NEIGHBORS_4
    straight, turning = [], []
    for cell in grid.open_cells():
        for d_in in dirs:
            before = (cell[0] - d_in[0], cell[1] - d_in[1])
            if not grid.is_open(*before):
                continue
            for d_out in dirs:
                after = (cell[0] + d_out[0], cell[1] + d_out[1])
                if not grid.is_open(*after) or grid.degree(*cell) < 3:
                    continue
                cross = d_in[0] * d_out[1] - d_in[1] * d_out[0]
                if d_out == d_in:
                    straight.append((before, cell, after, d_in, d_out))
                elif cross != 0:
                    turning.append((before, cell, after, d_in, d_out, cross))

    routes = []
    for k in range(TINY_COUNT):
        if k < TINY_COUNT // 2:
            before, cell, after, d_in, d_out = straight[int(rng.integers(len(straight)))]
        else:
            want_left = k % 2 == 1
            pool = [t for t in turning if (t[5] > 0) == want_left]
            before, cell, after, d_in, d_out, _ = pool[int(rng.integers(len(pool)))]
        a = round(float(rng.uniform(45.0, 65.0)), 1)
        b = round(float(rng.uniform(45.0, 65.0)), 1)
        center = cell_xy(cell)
        points = [center - a * np.array(d_in, float), center, center + b * np.array(d_out, float)]
        routes.append(_build_route(f"t{town_id}-tiny-{k:02d}", town_id, grid,
                                   [before, cell, after], points, "tiny", landmarks))
    return routes


def _routed(town_id: int, grid: RoadGrid, rng: np.random.Generator, landmarks,
            length_class: str, count: int, hops: Tuple[int, int],
            accept) -> List[Route]:
    router = AStarRouter(grid)
    cells = grid.open_cells()
    routes: List[Route] = []
    attempts = 0
    while len(routes) < count:
        attempts += 1
        if attempts > 1000:
            raise RuntimeError(f"town {town_id}: could not place {length_class} routes")
        start = cells[int(rng.integers(len(cells)))]
        goal = cells[int(rng.integers(len(cells)))]
        manhattan = abs(start[0] - goal[0]) + abs(start[1] - goal[1])
        if not hops[0] <= manhattan <= hops[1]:
            continue
        path = router.plan(start, goal)
        if not path:
            continue
        corners = router.corners(path)
        route = _build_route(f"t{town_id}-{length_class}-{len(routes):02d}", town_id, grid,
                             path, [cell_xy(c) for c in corners], length_class, landmarks)
        if accept(route.length_m):
            routes.append(route)
    logger.debug("town %d: %d %s routes after %d attempts", town_id, count, length_class, attempts)
    return routes


def _in_turn(route: Route, s: float, margin: float) -> bool:
    return any(t.s_start - margin <= s <= t.s_end + margin for t in route.turns)


def _offset_point(route: Route, s: float, lateral: float) -> Tuple[float, float, float]:
    x, y, heading = route.point_at(s)
    return x - lateral * math.sin(heading), y + lateral * math.cos(heading), heading


def _scenario(route: Route, rng: np.random.Generator,
              traffic_rng: Optional[np.random.Generator] = None) -> Scenario:
    signals = []
    for s_j in route.junctions_s:
        s_line = s_j - STOP_LINE_BEFORE_M
        if s_line < 20.0 or _in_turn(route, s_line, 1.0):
            continue
        roll = float(rng.random())
        x, y, _ = route.point_at(s_line)
        if roll < 0.35:
            signals.append(SignalState(
                id=len(signals) + 1, kind=SignalKind.TRAFFIC_LIGHT, x=x, y=y,
                cycle_s=16.0, offset_s=round(float(rng.uniform(0.0, 16.0)), 1),
            ))
        elif roll < 0.55:
            signals.append(SignalState(id=len(signals) + 1, kind=SignalKind.STOP_SIGN, x=x, y=y))

    actors, props = [], []
    names = [p[0] for p in _PLACEMENTS]
    probs = np.array([p[2] for p in _PLACEMENTS])
    count = int(rng.integers(0, int(route.length_m // 50.0) + 2))
    for _ in range(count):
        s = float(rng.uniform(15.0, route.length_m - 15.0))
        k = int(rng.choice(len(names), p=probs / probs.sum()))
        side = 1.0 if rng.random() < 0.5 else -1.0
        if _in_turn(route, s, ACTOR_CLEARANCE_M) or any(
                abs(s - j) < ACTOR_CLEARANCE_M for j in route.junctions_s):
            continue
        name, lateral, _ = _PLACEMENTS[k]
        if name == "pedestrian":
            lateral *= side
        x, y, heading = _offset_point(route, s, lateral)
        x, y = round(x, 6), round(y, 6)
        if name == "pole":
            props.append(StaticProp(id=len(props) + 1, x=x, y=y))
            continue
        kind = {"parked_vehicle": ActorKind.VEHICLE, "waiting_vehicle": ActorKind.VEHICLE,
                "bike": ActorKind.BIKE, "pedestrian": ActorKind.PEDESTRIAN}[name]
        actors.append(Actor(id=len(actors) + 1, kind=kind, x=x, y=y, heading=heading))

    if traffic_rng is not None:
        actors.extend(_traffic(route, traffic_rng, first_id=len(actors) + 1))
    return Scenario(route.route_id, tuple(actors), tuple(signals), tuple(props))


def _clear_of_junctions(route: Route, s: float) -> bool:
    return not _in_turn(route, s, ACTOR_CLEARANCE_M) and all(
        abs(s - j) >= ACTOR_CLEARANCE_M for j in route.junctions_s)


def _traffic(route: Route, rng: np.random.Generator, first_id: int) -> List[Actor]:
    """
    Moving actors for one route.

    A pedestrian crosses once from the curb, early enough that the ego
    meets it in or just past the road. An oncoming vehicle holds at red
    lights and only uses the leg before the first turn. A bike rides the
    shoulder of the last leg.
    """
    actors: List[Actor] = []
    first_turn = min((t.s_start for t in route.turns), default=route.length_m)
    last_turn = max((t.s_end for t in route.turns), default=0.0)

    lo, hi = CROSSING_WINDOW_M[0], min(CROSSING_WINDOW_M[1], route.length_m - 15.0)
    if rng.random() < 0.35 and hi > lo:
        s = float(rng.uniform(lo, hi))
        if _clear_of_junctions(route, s):
            side = 1.0 if rng.random() < 0.5 else -1.0
            x, y, heading = _offset_point(route, s, side * CURB_LATERAL_M)
            actors.append(Actor(
                id=first_id + len(actors), kind=ActorKind.PEDESTRIAN,
                x=round(x, 6), y=round(y, 6), heading=wrap_angle(heading - side * math.pi / 2),
                speed=CROSSING_SPEED_MPS, behavior=Behavior.SCRIPTED_CROSSING,
                span_m=CROSSING_SPAN_M,
            ))

    hi = min(first_turn - ACTOR_CLEARANCE_M, route.length_m - 10.0)
    if rng.random() < 0.35 and hi > 30.0:
        s = float(rng.uniform(30.0, hi))
        x, y, heading = _offset_point(route, s, ONCOMING_LATERAL_M)
        actors.append(Actor(
            id=first_id + len(actors), kind=ActorKind.VEHICLE,
            x=round(x, 6), y=round(y, 6), heading=wrap_angle(heading + math.pi),
            speed=ONCOMING_SPEED_MPS, behavior=Behavior.SIGNAL_COMPLIANT,
        ))

    lo, hi = last_turn + ACTOR_CLEARANCE_M, route.length_m - 30.0
    if rng.random() < 0.2 and hi > max(lo, 15.0):
        s = float(rng.uniform(max(lo, 15.0), hi))
        x, y, heading = _offset_point(route, s, _PLACEMENTS[1][1])
        actors.append(Actor(
            id=first_id + len(actors), kind=ActorKind.BIKE,
            x=round(x, 6), y=round(y, 6), heading=heading,
            speed=BIKE_SPEED_MPS, behavior=Behavior.CONSTANT_VELOCITY,
        ))
    return actors


@functools.lru_cache(maxsize=16)
def generate_town(town_id: int, seed: int = 42) -> Town:
    """
    Build one town deterministically from (town_id, seed).

    Tiny routes run through one junction (the first five straight, the
    rest with one turn); Short and Long routes are A* routes between
    intersections kept only when their length fits the class.
    """
    if town_id not in TOWN_IDS:
        raise ValueError(f"town_id must be in 1..8, got {town_id}")

    rng = np.random.default_rng([seed, town_id])
    grid = RoadGrid(GRID_SIZE, GRID_SIZE)
    grid.close_random(rng, CLOSED_INTERSECTIONS)

    landmarks = {}
    for cell in grid.open_cells():
        if rng.random() < 0.25:
            landmarks[cell] = LANDMARK_CUES[int(rng.integers(len(LANDMARK_CUES)))]

    routes = _tiny_routes(town_id, grid, rng, landmarks)
    routes += _routed(town_id, grid, rng, landmarks, "short", SHORT_COUNT, (3, 7),
                      lambda length: TINY_MAX_M <= length <= LONG_MIN_M)
    routes += _routed(town_id, grid, rng, landmarks, "long", LONG_COUNT, (8, 14),
                      lambda length: length > LONG_MIN_M)

    # moving traffic draws from its own stream so static layouts stay put
    traffic_rng = np.random.default_rng([seed, town_id, 1])
    scenarios = tuple(_scenario(route, rng, traffic_rng) for route in routes)
    logger.info("generated town %d (seed %d): %d routes", town_id, seed, len(routes))

    return Town(
        town_id=town_id,
        seed=seed,
        grid=tuple(tuple(int(v) for v in row) for row in grid.to_list()),
        landmarks=tuple(sorted(landmarks.items())),
        routes=tuple(routes),
        scenarios=scenarios,
    )


def grid_of(town: Town) -> RoadGrid:
    grid = RoadGrid(GRID_SIZE, GRID_SIZE)
    grid.grid = np.array(town.grid, dtype=np.int8)
    return grid
