"""
Tests for ego sensing, infraction detection and route progress.
"""

from dataclasses import replace

import numpy as np
import pytest
from src.hierarchy.types import ControlSignal
from src.simulation.infractions import InfractionKind, detect_infractions, route_progress
from src.simulation.route import Route
from src.simulation.sensing import observe, to_ego_frame
from src.simulation.world import (
    Actor, ActorKind, EgoState, SignalKind, SignalState, StaticProp, initial_state, step,
)


def straight_route(length=200.0):
    return Route("straight", 1, ((0.0, 0.0), (length, 0.0)))


def at(state, x, y=0.0, speed=0.0, heading=0.0, **changes):
    return replace(state, ego=EgoState(x, y, heading=heading, speed=speed), **changes)


def test_ego_frame_axes():
    ego = EgoState(10.0, 0.0, heading=0.0)
    local = to_ego_frame(ego, np.array([[20.0, 0.0], [10.0, -3.0]]))
    assert local[0] == pytest.approx([0.0, 10.0])
    assert local[1] == pytest.approx([3.0, 0.0])


def test_empty_world_on_centerline():
    frame = observe(initial_state(straight_route(), speed=5.0))
    assert frame.vehicles_ahead == 0
    assert frame.pedestrians_ahead == 0
    assert not frame.red_light_ahead
    assert not frame.stop_sign_ahead
    assert frame.lateral_offset_m == 0.0
    assert frame.heading_error_rad == 0.0
    assert frame.speed_mps == 5.0


def test_red_light_distance():
    light = SignalState(1, SignalKind.TRAFFIC_LIGHT, 20.0, 0.0)
    frame = observe(initial_state(straight_route(), signals=[light]))
    assert frame.red_light_ahead
    assert frame.red_light_distance_m == pytest.approx(20.0)


def test_green_light_not_reported():
    light = SignalState(1, SignalKind.TRAFFIC_LIGHT, 20.0, 0.0, offset_s=8.0)
    frame = observe(initial_state(straight_route(), signals=[light]))
    assert not frame.red_light_ahead


def test_light_beyond_signal_range_ignored():
    light = SignalState(1, SignalKind.TRAFFIC_LIGHT, 36.0, 0.0)
    assert not observe(initial_state(straight_route(), signals=[light])).red_light_ahead


def test_three_vehicles_ahead():
    cars = [Actor(i + 1, ActorKind.VEHICLE, x, y)
            for i, (x, y) in enumerate([(20.0, 0.0), (30.0, 0.5), (35.0, -0.5)])]
    frame = observe(initial_state(straight_route(), actors=cars))
    assert frame.vehicles_ahead == 3
    assert frame.lead_vehicle_distance_m == pytest.approx(20.0 - 2.4)


def test_actors_outside_cone_or_range_ignored():
    actors = [
        Actor(1, ActorKind.VEHICLE, -10.0, 0.0),     # behind
        Actor(2, ActorKind.VEHICLE, 45.0, 0.0),      # out of range
        Actor(3, ActorKind.BIKE, 2.0, 10.0),         # outside the cone
    ]
    frame = observe(initial_state(straight_route(), actors=actors))
    assert frame.vehicles_ahead == 0
    assert frame.bikes_ahead == 0


def test_pedestrian_in_path():
    walker = Actor(1, ActorKind.PEDESTRIAN, 12.0, 1.0)
    frame = observe(initial_state(straight_route(), actors=[walker]))
    assert frame.pedestrians_ahead == 1
    assert frame.pedestrian_distance_m == pytest.approx(12.0)


def test_adjacent_lane_vehicle():
    car = Actor(1, ActorKind.VEHICLE, 20.0, 3.0)
    frame = observe(initial_state(straight_route(), actors=[car]))
    assert frame.vehicles_ahead == 0
    assert frame.vehicles_in_lane == 1
    assert frame.lead_vehicle_distance_m is None


def test_offset_and_heading_error_signs():
    state = at(initial_state(straight_route()), 50.0, 2.0, heading=0.1)
    frame = observe(state)
    assert frame.lateral_offset_m == pytest.approx(2.0)
    assert frame.heading_error_rad == pytest.approx(-0.1)


def test_route_progress_examples():
    state = initial_state(straight_route(100.0))
    assert route_progress(state) == (0.0, 0.0)
    assert route_progress(at(state, 50.0, 2.0)) == pytest.approx((0.5, 2.0))
    assert route_progress(at(state, 100.0, progress_s=95.0)) == pytest.approx((1.0, 0.0))


def test_pedestrian_collision_at_onset_only():
    walker = Actor(1, ActorKind.PEDESTRIAN, 11.5, 0.0)
    state = at(initial_state(straight_route(), actors=[walker]), 9.5, speed=5.0)
    nxt = step(state, ControlSignal())
    events = detect_infractions(state, nxt)
    assert [e.kind for e in events] == [InfractionKind.PEDESTRIAN_COLLISION]
    assert events[0].source_id == 1
    assert detect_infractions(nxt, step(nxt, ControlSignal(brake=1.0))) == []


def test_bike_collision_counts_as_vehicle():
    bike = Actor(1, ActorKind.BIKE, 11.8, 0.0)
    state = at(initial_state(straight_route(), actors=[bike]), 9.5, speed=5.0)
    events = detect_infractions(state, step(state, ControlSignal()))
    assert [e.kind for e in events] == [InfractionKind.VEHICLE_COLLISION]


def test_layout_collision_with_prop():
    pole = StaticProp(1, 11.2, 0.0)
    state = at(initial_state(straight_route(), props=[pole]), 9.5, speed=5.0)
    events = detect_infractions(state, step(state, ControlSignal()))
    assert [e.kind for e in events] == [InfractionKind.LAYOUT_COLLISION]


def test_red_light_violation_on_crossing():
    light = SignalState(1, SignalKind.TRAFFIC_LIGHT, 20.0, 0.0)
    state = at(initial_state(straight_route(), signals=[light]), 19.8, speed=8.0,
               progress_s=19.8)
    events = detect_infractions(state, step(state, ControlSignal()))
    assert [e.kind for e in events] == [InfractionKind.RED_LIGHT_VIOLATION]


def test_stop_sign_violation_without_stopping():
    sign = SignalState(1, SignalKind.STOP_SIGN, 20.0, 0.0)
    state = at(initial_state(straight_route(), signals=[sign]), 19.8, speed=8.0,
               progress_s=19.8)
    events = detect_infractions(state, step(state, ControlSignal()))
    assert [e.kind for e in events] == [InfractionKind.STOP_SIGN_VIOLATION]


def test_cleared_stop_sign_is_not_a_violation():
    sign = SignalState(1, SignalKind.STOP_SIGN, 20.0, 0.0)
    state = at(initial_state(straight_route(), signals=[sign]), 19.8, speed=8.0,
               progress_s=19.8, cleared_stop_signs=(1,))
    assert detect_infractions(state, step(state, ControlSignal())) == []


def test_route_deviation_threshold():
    state = at(initial_state(straight_route()), 50.0, 29.9, heading=1.5708, speed=2.0,
               progress_s=50.0)
    nxt = at(state, 50.0, 31.0, heading=1.5708, speed=2.0, progress_s=50.0, tick=1)
    kinds = [e.kind for e in detect_infractions(state, nxt)]
    assert kinds == [InfractionKind.ROUTE_DEVIATION]


def test_offroad_onset():
    state = at(initial_state(straight_route()), 50.0, 3.4, progress_s=50.0)
    nxt = at(state, 50.0, 3.6, progress_s=50.0, tick=1)
    assert [e.kind for e in detect_infractions(state, nxt)] == \
        [InfractionKind.OFFROAD_INFRACTION]
    later = at(state, 50.0, 3.8, progress_s=50.0, tick=2)
    assert detect_infractions(nxt, later) == []
