"""
Route Geometry
----------------
Polyline routes with cumulative arclength, nearest-point projection
and turn detection.
"""

import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from src.hierarchy.types import Maneuver


def wrap_angle(angle: float) -> float:
    """Normalize to (-pi, pi]."""
    wrapped = math.atan2(math.sin(angle), math.cos(angle))
    if wrapped <= -math.pi:
        wrapped += 2.0 * math.pi
    return wrapped


@dataclass(frozen=True)
class RouteTurn:
    """A maneuver along the route between two arclengths."""
    s_start: float
    s_end: float
    direction: Maneuver
    angle_rad: float
    junction: Optional[str] = None
    landmark: Optional[str] = None

    def to_dict(self) -> dict:
        return {
            "s_start_m": self.s_start, "s_end_m": self.s_end,
            "direction": self.direction.value, "angle_rad": self.angle_rad,
            "junction": self.junction, "landmark": self.landmark,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "RouteTurn":
        return cls(
            s_start=data["s_start_m"], s_end=data["s_end_m"],
            direction=Maneuver(data["direction"]), angle_rad=data["angle_rad"],
            junction=data.get("junction"), landmark=data.get("landmark"),
        )


@dataclass(frozen=True)
class Projection:
    s: float                # arclength of the nearest point
    offset: float           # signed distance, positive when ego is left of the route
    heading: float          # route tangent at the nearest point


def find_turns(
    points: np.ndarray,
    cumulative: np.ndarray,
    min_angle: float = 0.3,
    join_gap: float = 3.0
) -> Tuple[RouteTurn, ...]:
    """
    Group consecutive heading changes of the same sign into turns.

    Rounded corners are discretized into many small bends; they are
    merged while successive bends are closer than join_gap meters.
    """
    seg = np.diff(points, axis=0)
    headings = np.arctan2(seg[:, 1], seg[:, 0])

    turns = []
    group: List[Tuple[float, float]] = []   # (s, dtheta)

    def close_group():
        if not group:
            return
        total = sum(d for _, d in group)
        if abs(total) >= min_angle:
            turns.append(RouteTurn(
                s_start=float(group[0][0]),
                s_end=float(group[-1][0]),
                direction=Maneuver.LEFT if total > 0 else Maneuver.RIGHT,
                angle_rad=float(total),
            ))
        group.clear()

    for i in range(1, len(headings)):
        d = wrap_angle(float(headings[i] - headings[i - 1]))
        if abs(d) < 1e-3:
            continue
        s = float(cumulative[i])
        if group and (np.sign(d) != np.sign(group[-1][1]) or s - group[-1][0] > join_gap):
            close_group()
        group.append((s, d))
    close_group()

    return tuple(turns)


@dataclass(frozen=True)
class Route:
    """
    Route polyline in world coordinates (meters).

    Example:
        route = Route("demo", 1, ((0, 0), (100, 0)))
        proj = route.project((50.0, 2.0))   # s=50, offset=+2 (left)
    """
    route_id: str
    town_id: int
    polyline: Tuple[Tuple[float, float], ...]
    junctions_s: Tuple[float, ...] = ()
    turns: Optional[Tuple[RouteTurn, ...]] = None
    target_speed_mps: float = 8.0
    length_class: str = ""
    cumulative: Tuple[float, ...] = field(init=False, repr=False, compare=False)
    length_m: float = field(init=False, compare=False)

    def __post_init__(self):
        pts = tuple((float(x), float(y)) for x, y in self.polyline)
        if len(pts) < 2:
            raise ValueError("route needs at least two points")
        arr = np.asarray(pts, dtype=float)
        seg = np.diff(arr, axis=0)
        seg_len = np.hypot(seg[:, 0], seg[:, 1])
        if np.any(seg_len <= 0.0):
            raise ValueError("consecutive route points must be distinct")
        cum = np.concatenate([[0.0], np.cumsum(seg_len)])

        object.__setattr__(self, "polyline", pts)
        object.__setattr__(self, "cumulative", tuple(float(c) for c in cum))
        object.__setattr__(self, "length_m", float(cum[-1]))
        object.__setattr__(self, "_pts", arr)
        object.__setattr__(self, "_seg", seg)
        object.__setattr__(self, "_seg_len", seg_len)
        object.__setattr__(self, "_cum", cum)
        if self.turns is None:
            object.__setattr__(self, "turns", find_turns(arr, cum))
        object.__setattr__(self, "junctions_s", tuple(sorted(self.junctions_s)))

    def point_at(self, s: float) -> Tuple[float, float, float]:
        """Position and tangent heading at arclength s (clamped)."""
        s = min(max(s, 0.0), self.length_m)
        i = int(np.searchsorted(self._cum, s, side="right")) - 1
        i = min(max(i, 0), len(self._seg) - 1)
        t = (s - self._cum[i]) / self._seg_len[i]
        x = self._pts[i, 0] + t * self._seg[i, 0]
        y = self._pts[i, 1] + t * self._seg[i, 1]
        return float(x), float(y), math.atan2(self._seg[i, 1], self._seg[i, 0])

    def project(
        self,
        point: Sequence[float],
        s_hint: Optional[float] = None,
        back: float = 10.0,
        ahead: float = 80.0
    ) -> Projection:
        """
        Nearest point on the route.

        With s_hint, only segments overlapping [s_hint - back, s_hint + ahead]
        are searched so the projection cannot jump to a distant leg.
        """
        p = np.asarray(point, dtype=float)
        if s_hint is None:
            idx = np.arange(len(self._seg))
        else:
            lo, hi = s_hint - back, s_hint + ahead
            mask = (self._cum[1:] >= lo) & (self._cum[:-1] <= hi)
            idx = np.nonzero(mask)[0]
            if idx.size == 0:
                idx = np.array([len(self._seg) - 1])

        a = self._pts[idx]
        d = self._seg[idx]
        rel = p - a
        t = np.clip(np.einsum("ij,ij->i", rel, d) / self._seg_len[idx] ** 2, 0.0, 1.0)
        q = a + t[:, None] * d
        dist = np.hypot(p[0] - q[:, 0], p[1] - q[:, 1])
        k = int(np.argmin(dist))
        i = int(idx[k])

        s = float(self._cum[i] + t[k] * self._seg_len[i])
        cross = d[k, 0] * rel[k, 1] - d[k, 1] * rel[k, 0]
        offset = float(dist[k]) if cross >= 0 else -float(dist[k])
        return Projection(s=s, offset=offset, heading=math.atan2(d[k, 1], d[k, 0]))

    def to_dict(self) -> dict:
        return {
            "route_id": self.route_id,
            "town_id": self.town_id,
            "length_m": self.length_m,
            "length_class": self.length_class,
            "target_speed_mps": self.target_speed_mps,
            "polyline_m": [list(p) for p in self.polyline],
            "junctions_s_m": list(self.junctions_s),
            "turns": [t.to_dict() for t in self.turns],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Route":
        return cls(
            route_id=data["route_id"],
            town_id=data["town_id"],
            polyline=tuple(tuple(p) for p in data["polyline_m"]),
            junctions_s=tuple(data.get("junctions_s_m", ())),
            turns=tuple(RouteTurn.from_dict(t) for t in data["turns"]) if "turns" in data else None,
            target_speed_mps=data.get("target_speed_mps", 8.0),
            length_class=data.get("length_class", ""),
        )
