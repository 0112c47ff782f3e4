"""
Rule-based Command Planner
----------------------------
Maps a telemetry frame to a mid-level driving command.

The same rules label logged frames offline, so closed-loop planning and
dataset annotation always agree.

Features:
    - Prioritized perception clause selection
    - Speed clause from the speed/target ratio with hazard slow-down
    - Steer/brake clause with self-correction toward the route
    - Pluggable planner registry

Author: Mehmet Demir
"""

import logging
from typing import Callable, Dict, Optional

from src.config import ConfigError, PlannerConfig
from src.hierarchy.commands import (
    ACCELERATING, MidLevelCommand, MotionClause, PerceptionClause, SpeedClause,
    parse_command,
)
from src.hierarchy.types import Instruction, Maneuver
from src.planning.telemetry import TelemetryFrame


logger = logging.getLogger(__name__)

DEFAULT_PLANNER = PlannerConfig()

# (count field, single clause, multiple clause) in priority order
_COUNTED = (
    ("pedestrians_ahead", PerceptionClause.PEDESTRIAN_AHEAD,
     PerceptionClause.MULTIPLE_PEDESTRIANS_AHEAD),
    ("bikes_ahead", PerceptionClause.BIKE_AHEAD, PerceptionClause.MULTIPLE_BIKES_AHEAD),
    ("vehicles_ahead", PerceptionClause.VEHICLE_AHEAD,
     PerceptionClause.MULTIPLE_VEHICLES_AHEAD),
    ("vehicles_at_junction", PerceptionClause.VEHICLE_AT_JUNCTION,
     PerceptionClause.MULTIPLE_VEHICLES_AT_JUNCTION),
    ("vehicles_in_lane", PerceptionClause.VEHICLE_IN_LANE,
     PerceptionClause.MULTIPLE_VEHICLES_IN_LANE),
)


def braking_distance(speed: float, config: PlannerConfig = DEFAULT_PLANNER) -> float:
    """Full-brake stopping distance plus a safety margin."""
    return speed ** 2 / (2.0 * config.b_max) + config.brake_margin_m


def perception_clause(
    frame: TelemetryFrame,
    config: PlannerConfig = DEFAULT_PLANNER
) -> Optional[PerceptionClause]:
    if frame.red_light_ahead:
        return PerceptionClause.RED_LIGHT_AHEAD
    if frame.stop_sign_ahead:
        return PerceptionClause.STOP_SIGN_AHEAD

    for name, single, multiple in _COUNTED:
        count = getattr(frame, name)
        if count >= 2:
            return multiple
        if count == 1:
            return single

    if frame.junction_distance_m is not None and \
            frame.junction_distance_m <= config.junction_notice_m:
        return PerceptionClause.APPROACHING_JUNCTION
    return None


def hazard_active(frame: TelemetryFrame, config: PlannerConfig = DEFAULT_PLANNER) -> bool:
    """Conditions that call for slowing down."""
    if frame.red_light_ahead or frame.stop_sign_ahead or frame.pedestrians_ahead > 0:
        return True
    gap = frame.lead_vehicle_distance_m
    return gap is not None and gap <= config.lead_gap_slow_m


def speed_clause(
    frame: TelemetryFrame,
    config: PlannerConfig = DEFAULT_PLANNER
) -> Optional[SpeedClause]:
    if frame.target_speed_mps <= 0:
        raise ValueError(f"target speed must be > 0, got {frame.target_speed_mps}")

    if frame.speed_mps < config.stopped_speed:
        if frame.applied_brake > 0:
            return SpeedClause.REMAIN_STOPPED
        return SpeedClause.START_ACCELERATING

    ratio = frame.speed_mps / frame.target_speed_mps
    if hazard_active(frame, config) and ratio >= config.significantly_below:
        return SpeedClause.SLOW_DOWN
    if ratio < config.significantly_below:
        return SpeedClause.SIGNIFICANTLY_BELOW_TARGET
    if ratio < config.slightly_below:
        return SpeedClause.SLIGHTLY_BELOW_TARGET
    if ratio > config.above_target:
        return SpeedClause.ABOVE_TARGET
    return SpeedClause.MAINTAIN_SPEED


def must_brake(frame: TelemetryFrame, config: PlannerConfig = DEFAULT_PLANNER) -> bool:
    """Stop-class hazards."""
    stop_within = braking_distance(frame.speed_mps, config)
    if frame.red_light_ahead and \
            frame.red_light_distance_m <= max(stop_within, config.red_light_brake_m):
        return True
    if frame.stop_sign_ahead and frame.stop_sign_distance_m <= stop_within:
        return True
    ped = frame.pedestrian_distance_m
    if ped is not None and ped <= config.pedestrian_brake_m:
        return True
    gap = frame.lead_vehicle_distance_m
    return gap is not None and gap < config.lead_gap_brake_m


def desired_curvature(frame: TelemetryFrame, config: PlannerConfig = DEFAULT_PLANNER) -> float:
    """
    Steering intent in 1/m, positive to the left.

    A large heading error alone decides the direction so that an
    oversteered ego is always turned back toward the route.
    """
    error = frame.heading_error_rad
    if abs(error) > config.self_correction_rad:
        return error

    limit = config.offset_term_limit
    offset_term = min(max(-config.offset_gain * frame.lateral_offset_m, -limit), limit)
    kappa = config.heading_gain * error + offset_term

    dist = frame.next_turn_distance_m
    if dist is not None and dist <= config.turn_anticipation_m:
        if frame.next_turn is Maneuver.LEFT:
            kappa += config.turn_bias
        elif frame.next_turn is Maneuver.RIGHT:
            kappa -= config.turn_bias
    return kappa


def curvature_to_motion(kappa: float, config: PlannerConfig = DEFAULT_PLANNER) -> MotionClause:
    magnitude = abs(kappa)
    if magnitude < config.straight_band:
        return MotionClause.STEER_STRAIGHT
    if kappa > 0:
        return MotionClause.STEER_LEFT_SLIGHT if magnitude < config.sharp_band \
            else MotionClause.STEER_LEFT_SHARP
    return MotionClause.STEER_RIGHT_SLIGHT if magnitude < config.sharp_band \
        else MotionClause.STEER_RIGHT_SHARP


def motion_clause(
    frame: TelemetryFrame,
    instruction: Optional[Instruction] = None,
    config: PlannerConfig = DEFAULT_PLANNER
) -> MotionClause:
    if must_brake(frame, config):
        return MotionClause.BRAKE
    return curvature_to_motion(desired_curvature(frame, config), config)


def plan(
    frame: TelemetryFrame,
    instruction: Optional[Instruction] = None,
    config: PlannerConfig = DEFAULT_PLANNER
) -> MidLevelCommand:
    """Assemble the three clauses into one consistent command."""
    perception = perception_clause(frame, config)
    speed = speed_clause(frame, config)
    motion = motion_clause(frame, instruction, config)

    if motion is MotionClause.BRAKE and speed in ACCELERATING:
        stopped = frame.speed_mps < config.stopped_speed
        speed = SpeedClause.REMAIN_STOPPED if stopped else SpeedClause.SLOW_DOWN
    if speed is SpeedClause.REMAIN_STOPPED and motion.is_turn:
        speed = SpeedClause.START_ACCELERATING

    return MidLevelCommand(motion=motion, perception=perception, speed=speed)


class RulePlanner:
    """Reference planner backed by the rule engine."""

    name = "reference"

    def __init__(self, config: PlannerConfig = DEFAULT_PLANNER):
        self.config = config

    def plan(self, frame: TelemetryFrame, instruction: Instruction) -> MidLevelCommand:
        return plan(frame, instruction, self.config)


class FrozenCommandPlanner:
    """Baseline that ignores its inputs and always drives straight."""

    name = "frozen"

    def __init__(self, config: PlannerConfig = DEFAULT_PLANNER):
        self.config = config
        self.command = MidLevelCommand(motion=MotionClause.STEER_STRAIGHT)

    def plan(self, frame: TelemetryFrame, instruction: Instruction) -> MidLevelCommand:
        return self.command


class StringPlannerAdapter:
    """
    Wraps any planner that answers in text.

    The callable receives the frame as a JSON-ready dict and the
    instruction text; its answer is parsed through the command grammar.

    Example:
        adapter = StringPlannerAdapter(lambda frame, text: "Apply brakes safely.")
        cmd = adapter.plan(frame, instruction)
    """

    def __init__(self, respond: Callable[[dict, str], str], name: str = "text"):
        self.respond = respond
        self.name = name

    def plan(self, frame: TelemetryFrame, instruction: Instruction) -> MidLevelCommand:
        text = self.respond(frame.to_dict(), instruction.text)
        logger.debug("%s planner answered %r", self.name, text)
        return parse_command(text)


PLANNERS: Dict[str, Callable[[PlannerConfig], object]] = {
    "reference": RulePlanner,
    "frozen": FrozenCommandPlanner,
}


def register_planner(name: str, factory: Callable[[PlannerConfig], object]):
    PLANNERS[name] = factory


def get_planner(name: str, config: PlannerConfig = DEFAULT_PLANNER):
    if name not in PLANNERS:
        raise ConfigError(f"unknown planner '{name}' (choose from {', '.join(sorted(PLANNERS))})")
    return PLANNERS[name](config)
