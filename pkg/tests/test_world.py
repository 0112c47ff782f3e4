"""
Tests for routes, vehicle dynamics and world stepping.
"""

import math
from dataclasses import replace

import numpy as np
import pytest
from src.config import WorldConfig
from src.hierarchy.types import ControlSignal, Maneuver
from src.simulation.route import Route, wrap_angle
from src.simulation.world import (
    Actor, ActorKind, Behavior, EgoState, Phase, SignalKind, SignalState,
    initial_state, phase_at, step, step_actor, step_ego,
)


NO_DRAG = WorldConfig(c_drag=0.0)


def straight_route(length=200.0):
    return Route("straight", 1, ((0.0, 0.0), (length, 0.0)))


def l_route():
    # left turn at (50, 0) with a rounded corner
    pts = [(0.0, 0.0), (40.0, 0.0)]
    for k in range(1, 9):
        a = -math.pi / 2 + k * math.pi / 18
        pts.append((40.0 + 10.0 * math.cos(a), 10.0 + 10.0 * math.sin(a)))
    pts += [(50.0, 60.0)]
    return Route("l-turn", 1, tuple(pts))


def test_route_length_and_point():
    route = Route("r", 1, ((0, 0), (30, 0), (30, 40)))
    assert route.length_m == pytest.approx(70.0, rel=1e-9)
    x, y, heading = route.point_at(50.0)
    assert (x, y) == pytest.approx((30.0, 20.0))
    assert heading == pytest.approx(math.pi / 2)


def test_route_projection_sign():
    proj = straight_route(100.0).project((50.0, 2.0))
    assert proj.s == pytest.approx(50.0)
    assert proj.offset == pytest.approx(2.0)
    assert straight_route(100.0).project((50.0, -2.0)).offset == pytest.approx(-2.0)


def test_route_detects_left_turn():
    route = l_route()
    assert len(route.turns) == 1
    turn = route.turns[0]
    assert turn.direction is Maneuver.LEFT
    assert 35.0 <= turn.s_start <= turn.s_end <= 60.0


def test_straight_route_has_no_turns():
    assert straight_route().turns == ()


def test_route_round_trip():
    route = l_route()
    again = Route.from_dict(route.to_dict())
    assert again.polyline == route.polyline
    assert again.turns == route.turns


def test_wrap_angle():
    assert wrap_angle(3 * math.pi / 2) == pytest.approx(-math.pi / 2)
    assert wrap_angle(-3 * math.pi / 2) == pytest.approx(math.pi / 2)


def test_straight_displacement():
    ego = EgoState(0.0, 0.0, heading=0.3, speed=6.0)
    nxt = step_ego(ego, ControlSignal(), 0.1, NO_DRAG)
    assert nxt.speed == 6.0
    assert nxt.x == pytest.approx(0.6 * math.cos(0.3), abs=1e-12)
    assert nxt.y == pytest.approx(0.6 * math.sin(0.3), abs=1e-12)


def test_braking_is_monotone_and_stops():
    ego = EgoState(0.0, 0.0, speed=5.0)
    speeds = []
    for _ in range(20):
        ego = step_ego(ego, ControlSignal(brake=1.0), 0.1)
        speeds.append(ego.speed)
    assert all(b <= a for a, b in zip(speeds, speeds[1:]))
    assert speeds[0] < 5.0
    assert speeds[-1] == 0.0
    assert speeds.index(0.0) < 10


def test_heading_change_closed_form():
    v, dt, n = 5.0, 0.1, 20
    ego = EgoState(0.0, 0.0, speed=v)
    for _ in range(n):
        ego = step_ego(ego, ControlSignal(steer=0.5), dt, NO_DRAG)
    expected = -n * dt * (v / ego.wheelbase) * math.tan(0.6 * 0.5)
    assert ego.heading == pytest.approx(expected, abs=1e-9)


def test_positive_steer_turns_right():
    ego = step_ego(EgoState(0.0, 0.0, speed=5.0), ControlSignal(steer=0.5), 0.1)
    assert ego.heading < 0.0


def test_turning_radius():
    dt, v = 0.01, 5.0
    ego = EgoState(0.0, 0.0, speed=v)
    xs, ys = [], []
    for _ in range(2000):
        ego = step_ego(ego, ControlSignal(steer=0.4), dt, NO_DRAG)
        xs.append(ego.x)
        ys.append(ego.y)
    pts = np.column_stack([xs, ys])
    # least-squares circle fit
    A = np.column_stack([2 * pts[:, 0], 2 * pts[:, 1], np.ones(len(pts))])
    b = (pts ** 2).sum(axis=1)
    cx, cy, c = np.linalg.lstsq(A, b, rcond=None)[0]
    radius = math.sqrt(c + cx ** 2 + cy ** 2)
    expected = ego.wheelbase / math.tan(0.6 * 0.4)
    assert radius == pytest.approx(expected, rel=0.01)


def test_phase_cycle():
    light = SignalState(1, SignalKind.TRAFFIC_LIGHT, 0.0, 0.0, cycle_s=16.0, offset_s=0.0)
    assert light.phase is Phase.RED
    assert phase_at(light, 7.9) is Phase.RED
    assert phase_at(light, 8.0) is Phase.GREEN
    assert phase_at(light, 16.0) is Phase.RED


def test_stop_sign_has_no_phase():
    with pytest.raises(ValueError):
        SignalState(1, SignalKind.STOP_SIGN, 0.0, 0.0, phase=Phase.RED)


def test_scripted_crossing_reverses():
    walker = Actor(1, ActorKind.PEDESTRIAN, 0.0, 0.0, heading=math.pi / 2, speed=1.0,
                   behavior=Behavior.SCRIPTED_CROSSING, span_m=0.5)
    walker = step_actor(walker, (), 0.3)
    walker = step_actor(walker, (), 0.3)
    assert walker.heading == pytest.approx(-math.pi / 2)


def test_signal_compliant_actor_holds_at_red():
    light = SignalState(1, SignalKind.TRAFFIC_LIGHT, 5.0, 0.0)
    car = Actor(1, ActorKind.VEHICLE, 0.0, 0.0, speed=5.0, behavior=Behavior.SIGNAL_COMPLIANT)
    assert step_actor(car, (light,), 0.1) == car
    cruiser = Actor(2, ActorKind.VEHICLE, 0.0, 0.0, speed=5.0,
                    behavior=Behavior.CONSTANT_VELOCITY)
    assert step_actor(cruiser, (light,), 0.1).x == pytest.approx(0.5)


def test_step_is_pure_and_deterministic():
    state = initial_state(straight_route(), speed=5.0)
    control = ControlSignal(throttle=0.4, steer=0.1)
    a = step(state, control)
    b = step(state, control)
    assert a == b
    assert state.tick == 0
    assert a.tick == 1
    assert a.time_s == pytest.approx(0.1)


def test_step_rejects_bad_dt():
    state = initial_state(straight_route())
    with pytest.raises(ValueError):
        step(state, ControlSignal(), dt=0.0)


def test_duplicate_actor_ids_rejected():
    actors = [Actor(1, ActorKind.VEHICLE, 10.0, 0.0), Actor(1, ActorKind.BIKE, 20.0, 0.0)]
    with pytest.raises(ValueError):
        initial_state(straight_route(), actors=actors)


def test_progress_is_monotone_when_reversing_heading():
    state = initial_state(straight_route(), speed=8.0)
    for _ in range(20):
        state = step(state, ControlSignal(throttle=0.3))
    reached = state.progress_s
    turned = replace(state, ego=EgoState(state.ego.x, state.ego.y, heading=math.pi, speed=8.0))
    for _ in range(10):
        turned = step(turned, ControlSignal(throttle=0.3))
    assert turned.progress_s == reached


def test_stop_sign_cleared_after_stopping():
    sign = SignalState(1, SignalKind.STOP_SIGN, 30.0, 0.0)
    state = initial_state(straight_route(), signals=[sign])
    state = replace(state, ego=EgoState(25.0, 0.0, speed=0.0), progress_s=25.0)
    nxt = step(state, ControlSignal(brake=1.0))
    assert nxt.cleared_stop_signs == (1,)


def test_blocked_time_accumulates_without_red_light():
    state = initial_state(straight_route())
    for _ in range(5):
        state = step(state, ControlSignal(brake=1.0))
    assert state.blocked_s == pytest.approx(0.5)
    state = step(state, ControlSignal(throttle=1.0))
    assert state.blocked_s == 0.0
