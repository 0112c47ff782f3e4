"""
Waypoint Controller
---------------------
Turns a mid-level command into five ego-frame waypoints, then tracks
them with a PID speed loop and a pure-pursuit steering law.

Features:
    - Command to target speed and arc curvature
    - Bounded centerline-return correction
    - PID with drag feed-forward and leaky integral
    - Pure pursuit on the waypoint polyline
    - Offline L1 scoring against recorded waypoints

Author: Mehmet Demir
"""

import math
from dataclasses import dataclass
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from src.config import ConfigError, ControllerConfig
from src.hierarchy.commands import (
    MidLevelCommand, MotionClause, SpeedClause, parse_command,
)
from src.hierarchy.types import (
    NUM_WAYPOINTS, ControlSignal, Instruction, Waypoints,
)
from src.planning.telemetry import TelemetryFrame


DEFAULT_CONTROLLER = ControllerConfig()


@dataclass(frozen=True)
class ControllerState:
    """Longitudinal PID memory."""
    integral_error: float = 0.0
    prev_error: Optional[float] = None


def target_speed(frame: TelemetryFrame, cmd: MidLevelCommand,
                 config: ControllerConfig = DEFAULT_CONTROLLER) -> float:
    if cmd.motion is MotionClause.BRAKE or cmd.speed is SpeedClause.REMAIN_STOPPED:
        return 0.0
    if cmd.speed in (SpeedClause.SLOW_DOWN, SpeedClause.ABOVE_TARGET):
        return config.slow_factor * frame.target_speed_mps
    if cmd.speed is SpeedClause.MAINTAIN_SPEED:
        return frame.speed_mps
    # accelerating clauses and no speed clause at all
    return frame.target_speed_mps


def command_curvature(frame: TelemetryFrame, cmd: MidLevelCommand,
                      config: ControllerConfig = DEFAULT_CONTROLLER) -> float:
    """Arc curvature in 1/m, positive to the left."""
    direction = cmd.motion.direction
    if cmd.motion in (MotionClause.STEER_LEFT_SHARP, MotionClause.STEER_RIGHT_SHARP):
        nominal = direction * config.sharp_curvature
    elif cmd.motion.is_turn:
        nominal = direction * config.slight_curvature
    else:
        nominal = 0.0

    # past the commanded turn already: only steer back to the route
    if direction != 0 and direction * frame.heading_error_rad < -config.overshoot_tolerance:
        nominal = 0.0

    limit = config.turn_correction_limit if cmd.motion.is_turn \
        else config.straight_correction_limit
    correction = (config.correction_heading_gain * frame.heading_error_rad
                  - config.correction_offset_gain * frame.lateral_offset_m)
    return nominal + min(max(correction, -limit), limit)


def arc_points(speed: float, kappa: float, spacing_s: float) -> List[Tuple[float, float]]:
    """
    Points along a constant-curvature arc, x right and y forward.

    The arc stops bending after a quarter turn and continues along its
    final tangent, keeping the forward coordinate non-decreasing.
    """
    points = []
    for i in range(1, NUM_WAYPOINTS + 1):
        s = speed * spacing_s * i
        if abs(kappa) < 1e-9:
            left, forward = 0.0, s
        else:
            radius = 1.0 / abs(kappa)
            bend = min(s * abs(kappa), 0.5 * math.pi)
            left = radius * (1.0 - math.cos(bend))
            forward = radius * math.sin(bend)
            left += max(0.0, s - 0.5 * math.pi * radius)
            left = math.copysign(left, kappa)
        points.append((-left, forward))
    return points


def command_to_waypoints(
    frame: TelemetryFrame,
    instruction: Optional[Instruction],
    cmd: MidLevelCommand,
    config: ControllerConfig = DEFAULT_CONTROLLER
) -> Waypoints:
    v_star = target_speed(frame, cmd, config)
    if v_star <= 0.0:
        return Waypoints.stopped()
    kappa = command_curvature(frame, cmd, config)
    return Waypoints.forward(arc_points(v_star, kappa, config.waypoint_dt))


def _lookahead_target(points: np.ndarray, lookahead: float):
    """Where the polyline from the ego through the waypoints leaves the lookahead circle."""
    path = np.vstack([[0.0, 0.0], points])
    for a, b in zip(path[:-1], path[1:]):
        d = b - a
        dd = float(d @ d)
        if dd < 1e-12:
            continue
        # |a + t d| = L, take the larger root
        ad = float(a @ d)
        disc = ad * ad - dd * (float(a @ a) - lookahead ** 2)
        if disc < 0:
            continue
        t = (-ad + math.sqrt(disc)) / dd
        if 0.0 <= t <= 1.0:
            return a + t * d, lookahead
    last = path[-1]
    dist = float(np.hypot(*last))
    if dist < 1e-6:
        return None, 0.0
    return last, dist


def pure_pursuit_steer(wp: Waypoints, speed: float,
                       config: ControllerConfig = DEFAULT_CONTROLLER) -> float:
    lookahead = max(config.min_lookahead, config.lookahead_time * speed)
    target, dist = _lookahead_target(np.asarray(wp.points, dtype=float), lookahead)
    if target is None:
        return 0.0
    alpha = math.atan2(target[0], target[1])   # positive to the right
    angle = math.atan2(2.0 * config.wheelbase * math.sin(alpha), dist)
    return min(max(angle / config.delta_max, -1.0), 1.0)


def track_waypoints(
    ego,
    wp: Waypoints,
    state: ControllerState,
    dt: float,
    config: ControllerConfig = DEFAULT_CONTROLLER
) -> Tuple[ControlSignal, ControllerState]:
    """
    One control step toward the waypoints.

    ego only needs a `speed` attribute.
    """
    if dt <= 0:
        raise ValueError(f"dt must be > 0, got {dt}")

    p0, p1 = wp.points[0], wp.points[1]
    v_des = math.hypot(p1[0] - p0[0], p1[1] - p0[1]) / config.waypoint_dt
    speed = ego.speed

    if v_des == 0.0 and speed < config.stopped_speed:
        return ControlSignal(), ControllerState()

    error = v_des - speed
    integral = state.integral_error
    if config.integral_leak_s:
        integral *= max(0.0, 1.0 - dt / config.integral_leak_s)
    integral = min(max(integral + error * dt, -config.integral_limit), config.integral_limit)
    derivative = 0.0 if state.prev_error is None else (error - state.prev_error) / dt

    feed_forward = config.c_drag * v_des / config.a_max
    u = config.kp * error + config.ki * integral + config.kd * derivative + feed_forward

    if u >= 0.0:
        throttle, brake = min(u, 1.0), 0.0
    else:
        throttle, brake = 0.0, min(-u, 1.0)

    control = ControlSignal(throttle=throttle,
                            steer=pure_pursuit_steer(wp, speed, config),
                            brake=brake)
    return control, ControllerState(integral_error=integral, prev_error=error)


def waypoint_l1_error(pred: Waypoints, truth: Waypoints) -> float:
    """Mean absolute difference over all ten coordinates."""
    a = np.asarray(pred.points, dtype=float)
    b = np.asarray(truth.points, dtype=float)
    return float(np.mean(np.abs(a - b)))


class WaypointController:
    """
    Reference controller: command -> waypoints -> actuation.

    Example:
        controller = WaypointController()
        wp = controller.waypoints(frame, instruction, cmd)
        control = controller.track(ego, wp, dt=0.1)
    """

    name = "reference"

    def __init__(self, config: ControllerConfig = DEFAULT_CONTROLLER):
        self.config = config
        self.state = ControllerState()

    def reset(self):
        self.state = ControllerState()

    def waypoints(self, frame: TelemetryFrame, instruction: Optional[Instruction],
                  cmd: MidLevelCommand) -> Waypoints:
        return command_to_waypoints(frame, instruction, cmd, self.config)

    def track(self, ego, wp: Waypoints, dt: float) -> ControlSignal:
        control, self.state = track_waypoints(ego, wp, self.state, dt, self.config)
        return control


class ReplayController(WaypointController):
    """Tracks a recorded waypoint sequence instead of expanding commands."""

    name = "replay"

    def __init__(self, config: ControllerConfig = DEFAULT_CONTROLLER,
                 recorded: Iterable[Waypoints] = ()):
        super().__init__(config)
        self.recorded = list(recorded)
        self.index = 0

    def reset(self):
        super().reset()
        self.index = 0

    def waypoints(self, frame, instruction, cmd) -> Waypoints:
        if not self.recorded:
            return Waypoints.stopped()
        wp = self.recorded[min(self.index, len(self.recorded) - 1)]
        self.index += 1
        return wp


def offline_l1(records: Sequence, controller: WaypointController) -> float:
    """
    Mean waypoint L1 of a controller over annotated records.

    Each record needs telemetry, instruction, command and waypoints.
    """
    if not records:
        raise ValueError("no records to score")
    errors = []
    for record in records:
        pred = controller.waypoints(record.telemetry, Instruction(record.instruction),
                                    parse_command(record.command))
        errors.append(waypoint_l1_error(pred, record.waypoints))
    return float(np.mean(errors))


CONTROLLERS: Dict[str, Callable[..., WaypointController]] = {
    "reference": WaypointController,
    "replay": ReplayController,
}


def get_controller(name: str, config: ControllerConfig = DEFAULT_CONTROLLER, **kwargs):
    if name not in CONTROLLERS:
        raise ConfigError(
            f"unknown controller '{name}' (choose from {', '.join(sorted(CONTROLLERS))})"
        )
    return CONTROLLERS[name](config, **kwargs)
