"""
Log Annotation
----------------
Retrospectively labels every frame of a driving log with the mid-level
command the rule planner would issue, and pairs it with ground-truth
waypoints read from the poses that follow.
"""

import logging
from dataclasses import dataclass
from typing import List, Sequence

import numpy as np

from src.config import PlannerConfig
from src.hierarchy.types import NUM_WAYPOINTS, Instruction, Waypoints
from src.planning.rule_planner import plan
from src.planning.telemetry import TelemetryFrame
from src.simulation.sensing import to_ego_frame

from src.dataset.records import HierarchyRecord


logger = logging.getLogger(__name__)


class ShortLogError(ValueError):
    """The log is too short to yield a single labeled frame."""


@dataclass(frozen=True)
class LogFrame:
    """Telemetry plus the ego pose it was recorded at."""
    telemetry: TelemetryFrame
    x: float
    y: float
    heading: float


def frames_from_episode(log) -> List[LogFrame]:
    """LogFrames from an EpisodeLog's tick records."""
    return [LogFrame(t.frame, t.x, t.y, t.heading) for t in log.ticks]


def waypoint_stride(log_dt: float, waypoint_dt: float = 0.5) -> int:
    return max(1, int(round(waypoint_dt / log_dt)))


def future_waypoints(frames: Sequence[LogFrame], t: int, stride: int) -> Waypoints:
    """Poses t+stride .. t+5*stride expressed in the ego frame at t."""
    future = np.array([
        (frames[t + k * stride].x, frames[t + k * stride].y)
        for k in range(1, NUM_WAYPOINTS + 1)
    ], dtype=float)
    local = to_ego_frame(frames[t], future)
    return Waypoints(tuple((float(x), float(y)) for x, y in local))


def annotate_log(
    frames: Sequence[LogFrame],
    instruction: Instruction,
    log_dt: float = 0.5,
    config: PlannerConfig = PlannerConfig(),
    waypoint_dt: float = 0.5
) -> List[HierarchyRecord]:
    """
    Label each frame that has five future poses at the waypoint cadence.

    Raises:
        ShortLogError: fewer than 1 + 5 * stride frames
    """
    stride = waypoint_stride(log_dt, waypoint_dt)
    needed = 1 + NUM_WAYPOINTS * stride
    if len(frames) < needed:
        raise ShortLogError(f"need at least {needed} frames, got {len(frames)}")

    records = []
    for t in range(len(frames) - NUM_WAYPOINTS * stride):
        command = plan(frames[t].telemetry, instruction, config)
        records.append(HierarchyRecord(
            frame_id=t,
            instruction=instruction.text,
            command=command.render(),
            waypoints=future_waypoints(frames, t, stride),
            telemetry=frames[t].telemetry,
        ))
    logger.debug("annotated %d of %d frames (stride %d)", len(records), len(frames), stride)
    return records


def annotate_episode(log, config: PlannerConfig = PlannerConfig()) -> List[HierarchyRecord]:
    """
    Annotate an EpisodeLog, labeling each frame with the instruction in
    force when it was observed.
    """
    frames = frames_from_episode(log)
    stride = waypoint_stride(log.dt)
    needed = 1 + NUM_WAYPOINTS * stride
    if len(frames) < needed:
        raise ShortLogError(f"{log.route_id}: need at least {needed} frames, got {len(frames)}")

    active = []
    current = None
    for tick in log.ticks:
        current = tick.instruction or current
        active.append(current)
    if active[0] is None:
        raise ValueError(f"{log.route_id}: no instruction dispatched at the first tick")

    records = []
    for t in range(len(frames) - NUM_WAYPOINTS * stride):
        command = plan(frames[t].telemetry, Instruction(active[t]), config)
        records.append(HierarchyRecord(
            frame_id=t,
            instruction=active[t],
            command=command.render(),
            waypoints=future_waypoints(frames, t, stride),
            telemetry=frames[t].telemetry,
        ))
    return records
