"""
Hierarchy Value Types
-----------------------
High-level instructions, 5-point waypoint sets and control signals.

All types are immutable and validate their invariants on construction.
"""

import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Optional, Sequence, Tuple


NUM_WAYPOINTS = 5


class InstructionKind(Enum):
    SHORT = "Short"
    LONG_HORIZON = "LongHorizon"


class Maneuver(Enum):
    STRAIGHT = "Straight"
    LEFT = "Left"
    RIGHT = "Right"
    FOLLOW = "Follow"


@dataclass(frozen=True)
class Instruction:
    """Navigation directive for a route segment or a whole route."""
    text: str
    kind: InstructionKind = InstructionKind.SHORT
    meta_distance_m: Optional[float] = None
    maneuver: Optional[Maneuver] = None
    junction: Optional[str] = None
    start_m: Optional[float] = None
    segment_starts_m: Tuple[float, ...] = ()

    def __post_init__(self):
        if not self.text or not self.text.strip():
            raise ValueError("instruction text must be non-empty")

    def to_dict(self) -> dict:
        return {
            "text": self.text,
            "kind": self.kind.value,
            "meta_distance_m": self.meta_distance_m,
            "maneuver": self.maneuver.value if self.maneuver else None,
            "junction": self.junction,
            "start_m": self.start_m,
            "segment_starts_m": list(self.segment_starts_m),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Instruction":
        return cls(
            text=data["text"],
            kind=InstructionKind(data.get("kind", "Short")),
            meta_distance_m=data.get("meta_distance_m"),
            maneuver=Maneuver(data["maneuver"]) if data.get("maneuver") else None,
            junction=data.get("junction"),
            start_m=data.get("start_m"),
            segment_starts_m=tuple(data.get("segment_starts_m", ())),
        )


@dataclass(frozen=True)
class Waypoints:
    """
    Five future positions in the ego frame.

    Each point is (lateral_m, longitudinal_m): x to the right,
    y forward.
    """
    points: Tuple[Tuple[float, float], ...]

    def __post_init__(self):
        pts = tuple((float(x), float(y)) for x, y in self.points)
        if len(pts) != NUM_WAYPOINTS:
            raise ValueError(f"expected {NUM_WAYPOINTS} waypoints, got {len(pts)}")
        for x, y in pts:
            if not (math.isfinite(x) and math.isfinite(y)):
                raise ValueError("waypoints must be finite")
        object.__setattr__(self, "points", pts)

    @classmethod
    def stopped(cls) -> "Waypoints":
        return cls(((0.0, 0.0),) * NUM_WAYPOINTS)

    @classmethod
    def forward(cls, points) -> "Waypoints":
        """Waypoints that must never fold back, as a controller emits them."""
        wp = cls(tuple(points))
        if not wp.is_forward_monotone():
            raise ValueError(f"waypoints fold back: {wp.points}")
        return wp

    def is_forward_monotone(self) -> bool:
        """Longitudinal magnitudes never shrink along the set."""
        mags = [abs(y) for _, y in self.points]
        return all(b >= a for a, b in zip(mags, mags[1:]))

    def to_list(self):
        return [[x, y] for x, y in self.points]

    @classmethod
    def from_list(cls, pairs: Iterable[Sequence[float]]) -> "Waypoints":
        return cls(tuple((p[0], p[1]) for p in pairs))


def waypoints_from_legacy(pairs: Iterable[Sequence[float]]) -> Waypoints:
    """
    Convert forward-negative waypoints into the forward-positive ego frame.

    Published waypoint dumps list (lateral, -forward); lateral keeps its sign.
    """
    return Waypoints(tuple((p[0], -p[1]) for p in pairs))


@dataclass(frozen=True)
class ControlSignal:
    """Actuation for one tick. steer < 0 is left."""
    throttle: float = 0.0
    steer: float = 0.0
    brake: float = 0.0

    MUTEX_TOLERANCE = 0.1

    def __post_init__(self):
        if not 0.0 <= self.throttle <= 1.0:
            raise ValueError(f"throttle out of range: {self.throttle}")
        if not -1.0 <= self.steer <= 1.0:
            raise ValueError(f"steer out of range: {self.steer}")
        if not 0.0 <= self.brake <= 1.0:
            raise ValueError(f"brake out of range: {self.brake}")
        if self.throttle > self.MUTEX_TOLERANCE and self.brake > self.MUTEX_TOLERANCE:
            raise ValueError("throttle and brake cannot both be applied")

    def to_dict(self) -> dict:
        return {"throttle": self.throttle, "steer": self.steer, "brake": self.brake}

    @classmethod
    def from_dict(cls, data: dict) -> "ControlSignal":
        return cls(throttle=data["throttle"], steer=data["steer"], brake=data["brake"])
