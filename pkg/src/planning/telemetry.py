"""
Telemetry Frame
-----------------
Structured per-tick observation handed to planners.

The JSON form uses unit-suffixed field names and is the wire format
for any planner that consumes frames as text.
"""

from dataclasses import dataclass, fields
from typing import Optional

from src.hierarchy.types import Maneuver


_COUNTS = ("vehicles_ahead", "vehicles_at_junction", "vehicles_in_lane",
           "bikes_ahead", "pedestrians_ahead")

_DISTANCES = ("junction_distance_m", "red_light_distance_m", "stop_sign_distance_m",
              "next_turn_distance_m", "pedestrian_distance_m", "lead_vehicle_distance_m")


@dataclass(frozen=True)
class TelemetryFrame:
    speed_mps: float
    target_speed_mps: float = 8.0
    applied_throttle: float = 0.0
    applied_steer: float = 0.0
    applied_brake: float = 0.0
    junction_distance_m: Optional[float] = None
    vehicles_ahead: int = 0
    vehicles_at_junction: int = 0
    vehicles_in_lane: int = 0
    bikes_ahead: int = 0
    pedestrians_ahead: int = 0
    red_light_ahead: bool = False
    red_light_distance_m: Optional[float] = None
    stop_sign_ahead: bool = False
    stop_sign_distance_m: Optional[float] = None
    lateral_offset_m: float = 0.0       # positive when ego is left of the route
    heading_error_rad: float = 0.0      # route tangent minus ego heading
    next_turn: Maneuver = Maneuver.STRAIGHT
    next_turn_distance_m: Optional[float] = None
    pedestrian_distance_m: Optional[float] = None
    lead_vehicle_distance_m: Optional[float] = None

    def __post_init__(self):
        for name in _COUNTS:
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")
        for name in _DISTANCES:
            value = getattr(self, name)
            if value is not None and value < 0:
                raise ValueError(f"{name} must be >= 0 when present")
        if self.speed_mps < 0:
            raise ValueError("speed_mps must be >= 0")
        if self.next_turn not in (Maneuver.STRAIGHT, Maneuver.LEFT, Maneuver.RIGHT):
            raise ValueError(f"next_turn must be Straight, Left or Right, got {self.next_turn}")
        if self.red_light_ahead != (self.red_light_distance_m is not None):
            raise ValueError("red_light_distance_m must be set exactly when a red light is ahead")
        if self.stop_sign_ahead != (self.stop_sign_distance_m is not None):
            raise ValueError("stop_sign_distance_m must be set exactly when a stop sign is ahead")

    def to_dict(self) -> dict:
        data = {f.name: getattr(self, f.name) for f in fields(self)}
        data["next_turn"] = self.next_turn.value
        return data

    @classmethod
    def from_dict(cls, data: dict) -> "TelemetryFrame":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown telemetry fields: {', '.join(sorted(unknown))}")
        values = dict(data)
        if "next_turn" in values:
            values["next_turn"] = Maneuver(values["next_turn"])
        return cls(**values)
