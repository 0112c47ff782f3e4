"""
Ego Sensing
-------------
Builds the structured TelemetryFrame a planner sees at one tick:
actor counts inside the forward sensing cone, signals ahead on the route,
the next junction and turn, and route-relative pose errors.
"""

import math
from typing import Optional

import numpy as np
from scipy.spatial.distance import cdist

from src.hierarchy.types import Instruction, Maneuver
from src.planning.telemetry import TelemetryFrame
from src.simulation.route import wrap_angle
from src.simulation.world import (
    ActorKind, SignalKind, WorldState, signal_distance_ahead,
)


def actor_radius(kind: ActorKind, config) -> float:
    return {
        ActorKind.VEHICLE: config.vehicle_radius,
        ActorKind.PEDESTRIAN: config.pedestrian_radius,
        ActorKind.BIKE: config.bike_radius,
    }[kind]


def to_ego_frame(ego, points: np.ndarray) -> np.ndarray:
    """World points -> (lateral right, forward) relative to the ego."""
    rel = points - np.array([ego.x, ego.y])
    c, s = math.cos(ego.heading), math.sin(ego.heading)
    forward = rel[:, 0] * c + rel[:, 1] * s
    lateral = rel[:, 0] * s - rel[:, 1] * c
    return np.column_stack([lateral, forward])


def _next_junction(state: WorldState, ego_s: float, max_range: float) -> Optional[float]:
    for s in state.route.junctions_s:
        if s >= ego_s:
            return s if s - ego_s <= max_range else None
    return None


def _next_turn(state: WorldState, ego_s: float, max_range: float):
    for turn in state.route.turns:
        if turn.s_end >= ego_s:
            dist = max(0.0, turn.s_start - ego_s)
            if dist > max_range:
                break
            return turn.direction, dist
    return Maneuver.STRAIGHT, None


def observe(state: WorldState, instruction: Optional[Instruction] = None) -> TelemetryFrame:
    """
    Read the world around the ego into a TelemetryFrame.

    The instruction is not consulted: maneuvers come from route geometry.
    """
    cfg = state.config
    ego = state.ego
    route = state.route

    proj = route.project(ego.position, state.progress_s,
                         cfg.projection_back_m, cfg.projection_ahead_m)
    ego_s = proj.s

    junction_s = _next_junction(state, ego_s, cfg.sensing_range)
    junction_distance = None if junction_s is None else junction_s - ego_s

    counts = {"vehicles_ahead": 0, "vehicles_at_junction": 0, "vehicles_in_lane": 0,
              "bikes_ahead": 0, "pedestrians_ahead": 0}
    pedestrian_distance = None
    lead_gap = None

    if state.actors:
        positions = np.array([a.position for a in state.actors], dtype=float)
        dist = cdist(np.array([ego.position]), positions)[0]
        local = to_ego_frame(ego, positions)
        bearing = np.arctan2(local[:, 0], local[:, 1])
        in_cone = (dist <= cfg.sensing_range) & (np.abs(bearing) <= cfg.sensing_half_angle)

        junction_xy = None
        if junction_s is not None:
            jx, jy, _ = route.point_at(junction_s)
            junction_xy = np.array([jx, jy])

        for i, actor in enumerate(state.actors):
            lateral, forward = local[i]
            if actor.kind is ActorKind.PEDESTRIAN and forward > 0.0 \
                    and abs(lateral) <= cfg.path_half_width and dist[i] <= cfg.sensing_range:
                if pedestrian_distance is None or forward < pedestrian_distance:
                    pedestrian_distance = float(forward)

            if not in_cone[i]:
                continue

            in_ego_lane = abs(lateral) <= cfg.lane_half_width
            if actor.kind is not ActorKind.PEDESTRIAN and in_ego_lane:
                gap = max(0.0, float(forward) - cfg.ego_radius - actor_radius(actor.kind, cfg))
                if lead_gap is None or gap < lead_gap:
                    lead_gap = gap

            if actor.kind is ActorKind.PEDESTRIAN:
                counts["pedestrians_ahead"] += 1
            elif actor.kind is ActorKind.BIKE:
                counts["bikes_ahead"] += 1
            elif in_ego_lane:
                counts["vehicles_ahead"] += 1
            elif junction_xy is not None and \
                    np.hypot(*(positions[i] - junction_xy)) <= cfg.junction_radius:
                counts["vehicles_at_junction"] += 1
            elif abs(lateral) <= cfg.road_half_width:
                counts["vehicles_in_lane"] += 1

    red = signal_distance_ahead(state, SignalKind.TRAFFIC_LIGHT, ego_s,
                                cfg.signal_range, red_only=True)
    stop = signal_distance_ahead(state, SignalKind.STOP_SIGN, ego_s,
                                 cfg.signal_range, skip_cleared=True)
    turn, turn_distance = _next_turn(state, ego_s, cfg.sensing_range)
    control = state.last_control

    return TelemetryFrame(
        speed_mps=ego.speed,
        target_speed_mps=route.target_speed_mps,
        applied_throttle=control.throttle,
        applied_steer=control.steer,
        applied_brake=control.brake,
        junction_distance_m=junction_distance,
        red_light_ahead=red is not None,
        red_light_distance_m=red,
        stop_sign_ahead=stop is not None,
        stop_sign_distance_m=stop,
        lateral_offset_m=proj.offset,
        heading_error_rad=wrap_angle(proj.heading - ego.heading),
        next_turn=turn,
        next_turn_distance_m=turn_distance,
        pedestrian_distance_m=pedestrian_distance,
        lead_vehicle_distance_m=lead_gap,
        **counts,
    )
