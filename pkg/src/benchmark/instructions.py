"""
Navigation Instructions
-------------------------
Per-segment instruction text for a route, dispatched by the episode
runner as route progress passes each segment start.

A route with turns gets: a distance-parameterized instruction at the
start, a near-turn instruction shortly before every turn, and a
closing straight instruction after the last turn.
"""

from typing import List, Sequence, Tuple

from src.hierarchy.types import Instruction, Maneuver
from src.simulation.route import Route
from src.simulation.town import maneuver_of


STRAIGHT_TEMPLATES = (
    "Continue in a straight line along your current path.",
    "Keep on rolling straight along this road.",
)

DISTANCE_TURN_TEMPLATES = (
    "Upon covering {d} meters, a {dir} turn at {junction} is compulsory.",
    "After {d} meters, turn {dir} at {junction}.",
)

NEAR_TURN_TEMPLATES = (
    "Turn {dir} at {junction}.",
    "Make a {dir} turn at {junction}.",
)

FOLLOW_TEMPLATES = (
    "Follow the road as it bends {dir}.",
    "Keep going along this road.",
)


def _direction_word(route: Route, index: int) -> str:
    return route.turns[index].direction.value.lower()


def _turn_text(route: Route, index: int, templates: Sequence[str], distance=None) -> str:
    turn = route.turns[index]
    direction = _direction_word(route, index)
    if turn.junction is None:
        return FOLLOW_TEMPLATES[index % len(FOLLOW_TEMPLATES)].format(dir=direction)
    template = templates[index % len(templates)]
    return template.format(d=distance, dir=direction, junction=turn.junction)


def segment_instructions(route: Route, lead_m: float = 25.0) -> Tuple[Instruction, ...]:
    """
    Instructions for a route in dispatch order, each with its start_m.

    Starts are strictly increasing; a near-turn instruction that would
    start before the previous one is dropped.
    """
    if not route.turns:
        return (Instruction(STRAIGHT_TEMPLATES[0], maneuver=Maneuver.STRAIGHT, start_m=0.0),)

    first = route.turns[0]
    distance = int(round(first.s_start))
    out: List[Instruction] = [Instruction(
        _turn_text(route, 0, DISTANCE_TURN_TEMPLATES, distance),
        maneuver=maneuver_of(first),
        junction=first.junction,
        meta_distance_m=float(distance) if first.junction is not None else None,
        start_m=0.0,
    )]

    prev_end = 0.0
    for i, turn in enumerate(route.turns):
        start = round(max(turn.s_start - lead_m, prev_end, 0.0), 6)
        prev_end = turn.s_end
        if start <= out[-1].start_m:
            continue
        out.append(Instruction(
            _turn_text(route, i, NEAR_TURN_TEMPLATES),
            maneuver=maneuver_of(turn),
            junction=turn.junction,
            start_m=start,
        ))

    last_end = round(route.turns[-1].s_end, 6)
    if last_end > out[-1].start_m and last_end < route.length_m:
        out.append(Instruction(
            STRAIGHT_TEMPLATES[len(route.turns) % len(STRAIGHT_TEMPLATES)],
            maneuver=Maneuver.STRAIGHT,
            start_m=last_end,
        ))
    return tuple(out)
