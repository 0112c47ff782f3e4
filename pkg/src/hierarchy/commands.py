"""
Mid-level Command Grammar
---------------------------
The command language sitting between navigation instructions and
control signals.

A command is at most one perception clause, at most one speed clause and
exactly one steer/brake clause, rendered in that order as sentences.

Features:
    - Clause enums carrying their exact sentence text
    - Canonical rendering and strict parsing
    - Enumeration of every consistent composition

Author: Mehmet Demir
"""

import re
from dataclasses import dataclass
from enum import Enum
from typing import List, Optional, Tuple


class ParseError(ValueError):
    """Raised when a command string contains an unknown sentence."""

    def __init__(self, sentence: str, message: Optional[str] = None):
        self.sentence = sentence
        super().__init__(message or f"unrecognized clause: {sentence!r}")


class OrderError(ValueError):
    """Raised when clauses are repeated or out of canonical order."""


class PerceptionClause(Enum):
    APPROACHING_JUNCTION = "Approaching a junction, prepare to follow traffic rules."
    VEHICLE_AT_JUNCTION = "A vehicle is present at the junction. Be cautious."
    MULTIPLE_VEHICLES_AT_JUNCTION = "Multiple vehicles are present at the junction. Be cautious."
    VEHICLE_AHEAD = "Watch out for the car ahead, there's a vehicle in front."
    MULTIPLE_VEHICLES_AHEAD = "Watch out for the cars ahead, there are multiple vehicles in front."
    VEHICLE_IN_LANE = "A vehicle is present in the lane. Be cautious."
    MULTIPLE_VEHICLES_IN_LANE = "Multiple vehicles are present in the lane. Be cautious."
    BIKE_AHEAD = "There is a bike ahead. Be cautious."
    MULTIPLE_BIKES_AHEAD = "Multiple bikes are ahead. Be cautious."
    PEDESTRIAN_AHEAD = "There is a pedestrian ahead. Be cautious."
    MULTIPLE_PEDESTRIANS_AHEAD = "Multiple pedestrians are ahead. Be cautious."
    RED_LIGHT_AHEAD = "There is a red light ahead."
    STOP_SIGN_AHEAD = "There is a stop sign ahead."


class SpeedClause(Enum):
    SLOW_DOWN = "Slow down to ensure safety."
    START_ACCELERATING = "Start accelerating gradually towards the target speed."
    REMAIN_STOPPED = "Remain stopped due to brake application."
    SIGNIFICANTLY_BELOW_TARGET = "Significantly below target speed, accelerate if safe."
    SLIGHTLY_BELOW_TARGET = "Slightly below target speed, gently increase acceleration."
    ABOVE_TARGET = "Above target speed, decelerate."
    MAINTAIN_SPEED = "Maintain current speed to match the target speed."


class MotionClause(Enum):
    STEER_RIGHT_SHARP = "Steer right sharply."
    STEER_RIGHT_SLIGHT = "Make a slight right turn."
    STEER_LEFT_SHARP = "Steer left sharply."
    STEER_LEFT_SLIGHT = "Make a slight left turn."
    STEER_STRAIGHT = "Keep the steering wheel straight."
    BRAKE = "Apply brakes safely."

    @property
    def is_turn(self) -> bool:
        return self not in (MotionClause.STEER_STRAIGHT, MotionClause.BRAKE)

    @property
    def direction(self) -> int:
        """+1 for left, -1 for right, 0 otherwise."""
        if self in (MotionClause.STEER_LEFT_SHARP, MotionClause.STEER_LEFT_SLIGHT):
            return 1
        if self in (MotionClause.STEER_RIGHT_SHARP, MotionClause.STEER_RIGHT_SLIGHT):
            return -1
        return 0


ACCELERATING = (
    SpeedClause.START_ACCELERATING,
    SpeedClause.SIGNIFICANTLY_BELOW_TARGET,
    SpeedClause.SLIGHTLY_BELOW_TARGET,
)


@dataclass(frozen=True)
class MidLevelCommand:
    """One mid-level driving command."""
    motion: MotionClause
    perception: Optional[PerceptionClause] = None
    speed: Optional[SpeedClause] = None

    def __post_init__(self):
        if not isinstance(self.motion, MotionClause):
            raise ValueError("motion clause is required")

    def render(self) -> str:
        return render_command(self)


def is_consistent(cmd: MidLevelCommand) -> bool:
    """Reject physically contradictory compositions."""
    if cmd.speed is SpeedClause.REMAIN_STOPPED and cmd.motion.is_turn:
        return False
    if cmd.motion is MotionClause.BRAKE and cmd.speed in ACCELERATING:
        return False
    return True


def render_command(cmd: MidLevelCommand) -> str:
    """Render perception, speed and motion clauses in canonical order."""
    parts = []
    if cmd.perception is not None:
        parts.append(cmd.perception.value)
    if cmd.speed is not None:
        parts.append(cmd.speed.value)
    parts.append(cmd.motion.value)
    return " ".join(parts)


# (text, category rank, clause) sorted longest first so prefixes never win
_CLAUSES: List[Tuple[str, int, Enum]] = sorted(
    [(c.value, 0, c) for c in PerceptionClause]
    + [(c.value, 1, c) for c in SpeedClause]
    + [(c.value, 2, c) for c in MotionClause],
    key=lambda item: -len(item[0]),
)

_CATEGORY_NAMES = ("perception", "speed", "motion")


def normalize_text(text: str) -> str:
    return re.sub(r"\s+", " ", text.strip())


def _next_sentence(text: str) -> str:
    end = text.find(". ")
    return text if end < 0 else text[:end + 1]


def parse_command(text: str) -> MidLevelCommand:
    """
    Parse a rendered command back into its clauses.

    Raises:
        ParseError: unknown sentence or missing steer/brake clause
        OrderError: clause category repeated or out of order
    """
    rest = normalize_text(text)
    found: List[Tuple[int, Enum]] = []

    while rest:
        for clause_text, rank, clause in _CLAUSES:
            if rest == clause_text or rest.startswith(clause_text + " "):
                found.append((rank, clause))
                rest = rest[len(clause_text):].lstrip()
                break
        else:
            raise ParseError(_next_sentence(rest))

    slots: List[Optional[Enum]] = [None, None, None]
    last_rank = -1
    for rank, clause in found:
        if rank <= last_rank:
            raise OrderError(
                f"{_CATEGORY_NAMES[rank]} clause {clause.value!r} appears after "
                f"a {_CATEGORY_NAMES[last_rank]} clause"
            )
        slots[rank] = clause
        last_rank = rank

    if slots[2] is None:
        raise ParseError(normalize_text(text), "command has no steer or brake clause")

    return MidLevelCommand(motion=slots[2], perception=slots[0], speed=slots[1])


def enumerate_valid_commands() -> List[MidLevelCommand]:
    """All consistent commands, in a fixed deterministic order."""
    commands = []
    for perception in [None] + list(PerceptionClause):
        for speed in [None] + list(SpeedClause):
            for motion in MotionClause:
                cmd = MidLevelCommand(motion=motion, perception=perception, speed=speed)
                if is_consistent(cmd):
                    commands.append(cmd)
    return commands
