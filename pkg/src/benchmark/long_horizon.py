"""
Long-horizon Instructions
---------------------------
Condenses a route's sequence of maneuvers into one directive issued at
episode start, optionally anchored on landmark cues.

Example:
    compose_long_horizon([
        Instruction("Alright, you can start driving.", maneuver=Maneuver.STRAIGHT),
        Instruction("Turn left.", maneuver=Maneuver.LEFT, junction="the end of the road"),
        Instruction("Continue straight.", maneuver=Maneuver.STRAIGHT),
    ]).text
    # "Go straight ahead, turn left at the end of the road, then continue straight."
"""

from dataclasses import replace
from typing import Dict, List, Optional, Sequence, Tuple

from src.hierarchy.types import Instruction, InstructionKind, Maneuver
from src.simulation.route import Route
from src.simulation.town import maneuver_of


S, L, R, F = Maneuver.STRAIGHT, Maneuver.LEFT, Maneuver.RIGHT, Maneuver.FOLLOW

# id -> (text, maneuver pattern)
LONG_HORIZON_CATALOG: Dict[int, Tuple[str, Tuple[Maneuver, ...]]] = {
    0: ("Go straight ahead, turn left at the end of the road, then continue straight.", (S, L, S)),
    10: ("Go straight until the intersection ahead, then turn right, and continue along the road.",
         (S, R, F)),
    12: ("Go straight to the first intersection ahead and turn left, then continue straight.",
         (S, L, S)),
    20: ("Turn right ahead and then go straight.", (R, S)),
    26: ("Turn right ahead, go straight, then turn right again.", (R, S, R)),
    34: ("Go straight to the T-junction ahead, then turn left and follow the route.", (S, L, F)),
    44: ("Go straight to a crossroads, then turn left, then continue straight.", (S, L, S)),
    46: ("Go straight to the T-junction, turn right, and continue straight.", (S, R, S)),
    48: ("Follow the route, and continue straight when you reach the crossroads.", (F, S)),
    57: ("Go straight to the intersection where, on the left front side, there is an open space "
         "with some parked vehicles, and turn left.", (S, L)),
    68: ("Keep going along this road.", (F,)),
    70: ("Turn left at the T-junction ahead, then follow the road.", (L, F)),
    74: ("Turn left ahead when you reach the cornfield, then turn left again when you encounter "
         "an open area.", (L, L)),
    81: ("Slightly turn left along the road ahead, then turn right, turn left at the T-junction, "
         "and then go straight.", (F, R, L, S)),
    84: ("Go straight until you see a turning point with palm trees ahead, then turn right and "
         "follow the road.", (S, R, F)),
    88: ("Turn right at the T-junction, go straight, then turn right at the T-junction where there "
         "are grid lines on the ground. Then continue straight.", (R, S, R, S)),
}


def catalog_for(pattern: Sequence[Maneuver]) -> List[int]:
    """Catalog ids whose maneuver pattern matches."""
    return [k for k, (_, p) in sorted(LONG_HORIZON_CATALOG.items()) if p == tuple(pattern)]


def _join(clauses: List[str]) -> str:
    if len(clauses) == 1:
        text = clauses[0]
    elif len(clauses) == 2:
        text = f"{clauses[0]}, then {clauses[1]}"
    else:
        text = ", ".join(clauses[:-1]) + f", then {clauses[-1]}"
    return text[0].upper() + text[1:] + "."


def compose_long_horizon(
    instructions: Sequence[Instruction],
    cues: Sequence[Optional[str]] = ()
) -> Instruction:
    """
    Merge segment instructions into one LongHorizon instruction.

    cues[i], when given, anchors segment i on a landmark. The segment
    start arclengths are carried in segment_starts_m.
    """
    if not instructions:
        raise ValueError("need at least one instruction")

    starts = tuple(float(inst.start_m or 0.0) for inst in instructions)
    if len(instructions) == 1:
        return replace(instructions[0], kind=InstructionKind.LONG_HORIZON,
                       segment_starts_m=starts)

    maneuvers = [inst.maneuver or Maneuver.STRAIGHT for inst in instructions]
    cue_at = lambda i: cues[i] if i < len(cues) else None

    clauses: List[str] = []
    last_turn: Optional[Maneuver] = None
    i, n = 0, len(instructions)
    while i < n:
        maneuver, cue, first = maneuvers[i], cue_at(i), not clauses
        if maneuver is Maneuver.STRAIGHT:
            if cue:
                text = f"go straight until you see {cue}"
            elif first:
                text = "go straight ahead"
            elif i == n - 1:
                text = "continue straight"
            else:
                text = "go straight"
        elif maneuver is Maneuver.FOLLOW:
            text = "keep going along this road" if first else "follow the road"
        else:
            text = f"turn {maneuver.value.lower()}"
            junction = instructions[i].junction
            if maneuver is last_turn:
                text += " again"
            elif junction:
                text += f" at {junction}"
            elif first:
                text += " ahead"
            if cue:
                text += f" when you reach {cue}"
            last_turn = maneuver
            if i + 1 < n and maneuvers[i + 1] is Maneuver.FOLLOW:
                text += " and follow the road"
                i += 1
        clauses.append(text)
        i += 1

    return Instruction(
        text=_join(clauses),
        kind=InstructionKind.LONG_HORIZON,
        start_m=0.0,
        segment_starts_m=starts,
    )


def route_long_horizon(route: Route, lead_m: float = 25.0) -> Instruction:
    """
    Long-horizon instruction for a whole route.

    A landmark at the first turn becomes a cue on the opening straight,
    replacing the junction name of that turn.
    """
    if not route.turns:
        return compose_long_horizon([
            Instruction("Go straight ahead.", maneuver=Maneuver.STRAIGHT, start_m=0.0),
        ])

    parts: List[Instruction] = []
    cues: List[Optional[str]] = []
    first = route.turns[0]
    if first.s_start > lead_m:
        parts.append(Instruction("Go straight.", maneuver=Maneuver.STRAIGHT, start_m=0.0))
        cues.append(first.landmark)

    prev_end = 0.0
    for k, turn in enumerate(route.turns):
        junction = None if (k == 0 and first.landmark and parts) else turn.junction
        start = 0.0 if not parts else max(turn.s_start - lead_m, prev_end)
        parts.append(Instruction(
            f"Turn {turn.direction.value.lower()}.", maneuver=maneuver_of(turn),
            junction=junction, start_m=round(start, 6),
        ))
        cues.append(None)
        prev_end = turn.s_end

    if route.length_m - prev_end > lead_m:
        parts.append(Instruction("Continue straight.", maneuver=Maneuver.STRAIGHT,
                                 start_m=round(prev_end, 6)))
        cues.append(None)

    return compose_long_horizon(parts, cues)
