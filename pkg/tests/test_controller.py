"""
Tests for command expansion and waypoint tracking.
"""

import math

import numpy as np
import pytest
from src.config import ConfigError, SimConfig
from src.control.controller import (
    ControllerState, ReplayController, WaypointController, command_curvature,
    command_to_waypoints, get_controller, pure_pursuit_steer, target_speed,
    track_waypoints, waypoint_l1_error,
)
from src.hierarchy.commands import MidLevelCommand, MotionClause, SpeedClause
from src.hierarchy.types import ControlSignal, Instruction, Waypoints
from src.planning.telemetry import TelemetryFrame
from src.simulation.world import EgoState, step_ego


GO = Instruction("Go straight ahead.")


def frame(**kwargs):
    values = {"speed_mps": 6.0, "target_speed_mps": 8.0}
    values.update(kwargs)
    return TelemetryFrame(**values)


def cmd(motion, speed=None):
    return MidLevelCommand(motion=motion, speed=speed)


def test_brake_gives_stopped_waypoints():
    wp = command_to_waypoints(frame(), GO, cmd(MotionClause.BRAKE))
    assert wp == Waypoints.stopped()


def test_maintain_straight_spacing():
    wp = command_to_waypoints(frame(), GO, cmd(MotionClause.STEER_STRAIGHT,
                                               SpeedClause.MAINTAIN_SPEED))
    assert [p[1] for p in wp.points] == pytest.approx([3.0, 6.0, 9.0, 12.0, 15.0])
    assert [p[0] for p in wp.points] == pytest.approx([0.0] * 5)


def test_slight_left_moves_left():
    wp = command_to_waypoints(frame(), GO, cmd(MotionClause.STEER_LEFT_SLIGHT))
    lateral = [p[0] for p in wp.points]
    assert all(b < a for a, b in zip(lateral, lateral[1:]))
    assert lateral[0] < 0.0
    assert wp.is_forward_monotone()


def test_sharp_turn_stays_forward_monotone():
    for speed in (2.0, 8.0, 12.0):
        wp = command_to_waypoints(frame(speed_mps=speed), GO,
                                  cmd(MotionClause.STEER_RIGHT_SHARP))
        assert wp.is_forward_monotone()
        assert all(p[0] > 0.0 for p in wp.points)


def test_target_speed_table():
    f = frame(speed_mps=5.0)
    assert target_speed(f, cmd(MotionClause.STEER_STRAIGHT, SpeedClause.SLOW_DOWN)) == \
        pytest.approx(4.8)
    assert target_speed(f, cmd(MotionClause.STEER_STRAIGHT, SpeedClause.ABOVE_TARGET)) == \
        pytest.approx(4.8)
    assert target_speed(f, cmd(MotionClause.STEER_STRAIGHT,
                               SpeedClause.START_ACCELERATING)) == 8.0
    assert target_speed(f, cmd(MotionClause.STEER_STRAIGHT, SpeedClause.MAINTAIN_SPEED)) == 5.0
    assert target_speed(f, cmd(MotionClause.STEER_STRAIGHT, SpeedClause.REMAIN_STOPPED)) == 0.0
    assert target_speed(f, cmd(MotionClause.STEER_STRAIGHT)) == 8.0


def test_curvature_correction_is_bounded():
    straight = cmd(MotionClause.STEER_STRAIGHT)
    assert command_curvature(frame(lateral_offset_m=10.0), straight) == pytest.approx(-0.02)
    slight = cmd(MotionClause.STEER_LEFT_SLIGHT)
    assert command_curvature(frame(), slight) == pytest.approx(0.08)
    assert command_curvature(frame(heading_error_rad=1.0), slight) == pytest.approx(0.13)


def test_overshoot_drops_nominal_curvature():
    sharp_left = cmd(MotionClause.STEER_LEFT_SHARP)
    kappa = command_curvature(frame(heading_error_rad=-0.3), sharp_left)
    assert kappa == pytest.approx(-0.05)


def test_stopped_waypoints_brake_a_moving_ego():
    control, _ = track_waypoints(EgoState(0, 0, speed=5.0), Waypoints.stopped(),
                                 ControllerState(), 0.1)
    assert control.brake > 0.0
    assert control.throttle == 0.0


def test_steady_state_throttle_matches_drag():
    wp = Waypoints(tuple((0.0, 3.0 * k) for k in range(1, 6)))
    control, _ = track_waypoints(EgoState(0, 0, speed=6.0), wp, ControllerState(), 0.1)
    assert abs(control.steer) < 0.02
    assert control.throttle == pytest.approx(0.1 * 6.0 / 3.0)


def test_left_waypoints_steer_left():
    wp = Waypoints(tuple((-0.5 * k, 3.0 * k) for k in range(1, 6)))
    assert pure_pursuit_steer(wp, 6.0) < 0.0


def test_standstill_resets_memory():
    state = ControllerState(integral_error=1.5, prev_error=0.3)
    control, state = track_waypoints(EgoState(0, 0, speed=0.0), Waypoints.stopped(), state, 0.1)
    assert control == ControlSignal()
    assert state == ControllerState()


def test_degenerate_waypoints_do_not_produce_nan():
    wp = Waypoints(((1.0, 1.0),) * 5)
    steer = pure_pursuit_steer(wp, 5.0)
    assert math.isfinite(steer)
    assert -1.0 <= steer <= 1.0


def test_steer_saturates():
    wp = Waypoints(tuple((10.0 * k, 0.5 * k) for k in range(1, 6)))
    assert pure_pursuit_steer(wp, 2.0) == 1.0


def test_stop_guarantee():
    ego = EgoState(0.0, 0.0, speed=8.0)
    state = ControllerState()
    dt, t = 0.1, 0.0
    while ego.speed >= 0.1:
        control, state = track_waypoints(ego, Waypoints.stopped(), state, dt)
        ego = step_ego(ego, control, dt)
        t += dt
        assert t <= 8.0 / 8.0 + 1.0


def test_track_rejects_bad_dt():
    with pytest.raises(ValueError):
        track_waypoints(EgoState(0, 0), Waypoints.stopped(), ControllerState(), 0.0)


def test_l1_examples():
    a = Waypoints(tuple((0.0, 2.0 * k) for k in range(1, 6)))
    shifted = Waypoints(tuple((x + 1.0, y) for x, y in a.points))
    assert waypoint_l1_error(a, a) == 0.0
    assert waypoint_l1_error(shifted, a) == pytest.approx(0.5)


def test_l1_matches_double_loop():
    rng = np.random.default_rng(11)
    a = Waypoints(tuple(map(tuple, rng.normal(size=(5, 2)))))
    b = Waypoints(tuple(map(tuple, rng.normal(size=(5, 2)))))
    total = 0.0
    for i in range(5):
        for j in range(2):
            total += abs(a.points[i][j] - b.points[i][j])
    assert waypoint_l1_error(a, b) == pytest.approx(total / 10.0)


def test_replay_controller_steps_through_recording():
    first = Waypoints(tuple((0.0, float(k)) for k in range(1, 6)))
    second = Waypoints(tuple((0.0, 2.0 * k) for k in range(1, 6)))
    replay = ReplayController(recorded=[first, second])
    straight = cmd(MotionClause.STEER_STRAIGHT)
    assert replay.waypoints(frame(), GO, straight) == first
    assert replay.waypoints(frame(), GO, straight) == second
    assert replay.waypoints(frame(), GO, straight) == second
    replay.reset()
    assert replay.waypoints(frame(), GO, straight) == first
    assert ReplayController().waypoints(frame(), GO, straight) == Waypoints.stopped()


def test_controller_registry():
    assert isinstance(get_controller("reference"), WaypointController)
    assert isinstance(get_controller("replay", recorded=()), ReplayController)
    with pytest.raises(ConfigError):
        get_controller("mpc")


def test_reference_controller_tracks_straight_route():
    from src.benchmark.runner import run_episode
    from src.simulation.route import Route

    route = Route("straight", 1, ((0.0, 0.0), (200.0, 0.0)))
    log = run_episode(route, config=SimConfig())
    late = [t for t in log.ticks if t.time_s >= 10.0]
    assert late
    for tick in late:
        assert abs(tick.lateral_offset_m) < 0.3
        assert abs(tick.speed - 8.0) <= 0.8
