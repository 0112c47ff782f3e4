"""
Trace Plots
-------------
Overhead SVG of one episode: route polyline, driven path, the waypoints
issued at each planner decision and infraction markers.

Output is byte-stable for a given log: no timestamp, fixed hash salt.

Author: Mehmet Demir
"""

import logging
import math
from pathlib import Path
from typing import List, Tuple, Union

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt


logger = logging.getLogger(__name__)

_MARKERS = {
    "VehicleCollision": ("X", "red"),
    "PedestrianCollision": ("X", "magenta"),
    "LayoutCollision": ("X", "brown"),
    "RedLightViolation": ("s", "red"),
    "StopSignViolation": ("s", "orange"),
    "OffroadInfraction": ("v", "purple"),
    "RouteDeviation": ("D", "black"),
    "Blocked": ("o", "black"),
}


def waypoints_to_world(x: float, y: float, heading: float,
                       waypoints) -> List[Tuple[float, float]]:
    """Ego-frame (lateral right, forward) waypoints -> world points."""
    c, s = math.cos(heading), math.sin(heading)
    return [(x + fwd * c + lat * s, y + fwd * s - lat * c) for lat, fwd in waypoints.points]


def plot_episode(log, path: Union[str, Path], decisions_only: bool = True):
    """
    Write an SVG trace of an episode log.

    Args:
        log: EpisodeLog
        path: output .svg file
        decisions_only: draw waypoints only on planner decision ticks
    """
    with plt.rc_context({"svg.hashsalt": log.config_hash or "trace"}):
        fig, ax = plt.subplots(figsize=(10, 10))

        rx = [p[0] for p in log.route.polyline]
        ry = [p[1] for p in log.route.polyline]
        line, = ax.plot(rx, ry, "-", color="gray", linewidth=6,
                        alpha=0.4, label="Route")
        line.set_gid("route")

        if log.ticks:
            xs = [t.x for t in log.ticks]
            ys = [t.y for t in log.ticks]
            ego, = ax.plot(xs, ys, "b-", linewidth=1.5, label="Ego path")
            ego.set_gid("ego-path")

            pts = []
            for t in log.ticks:
                if decisions_only and not t.decision:
                    continue
                pts.extend(waypoints_to_world(t.x, t.y, t.heading, t.waypoints))
            if pts:
                wp = ax.scatter([p[0] for p in pts], [p[1] for p in pts], c="green", s=6,
                                label="Waypoints", zorder=5)
                wp.set_gid("waypoints")

        events = log.events
        if events:
            for kind in sorted({e.kind.value for e in events}):
                marker, color = _MARKERS.get(kind, ("o", "red"))
                hits = [e for e in events if e.kind.value == kind]
                sc = ax.scatter([e.x for e in hits], [e.y for e in hits], marker=marker, c=color,
                                s=80, label=kind, zorder=10)
                sc.set_gid("infractions")

        ax.set_aspect("equal")
        ax.set_xlabel("X [m]")
        ax.set_ylabel("Y [m]")
        termination = log.termination.value if log.termination else "running"
        ax.set_title(f"{log.route_id} ({termination}, {100 * log.completion:.1f}%)")
        ax.legend(loc="best")
        ax.grid(True, alpha=0.3)

        fig.tight_layout()
        fig.savefig(str(path), format="svg",
                    metadata={"Date": None, "Description": log.config_hash})
        plt.close(fig)
    logger.info("wrote trace for %s to %s", log.route_id, path)
