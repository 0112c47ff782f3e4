"""
Driving Scores
----------------
Route completion, infraction score and driving score per route, suite
means, and infraction rates per kilometre.

Per route DS = RC * IS exactly. Suite DS is the mean of per-route DS,
which is not the product of the suite means.

Example:
    results = [score_log(log) for log in logs]
    ds, rc, is_ = driving_score(results)
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, Iterable, Sequence, Tuple

import numpy as np

from src.config import ConfigError, MetricsConfig
from src.simulation.infractions import InfractionEvent, InfractionKind


logger = logging.getLogger(__name__)


class EmptySuiteError(ValueError):
    """Aggregating over no routes."""


class ZeroDistanceError(ValueError):
    """Rates requested for logs that never moved."""


# Short column names for per-km rates
RATE_KINDS: Dict[str, InfractionKind] = {
    "VC": InfractionKind.VEHICLE_COLLISION,
    "PC": InfractionKind.PEDESTRIAN_COLLISION,
    "LC": InfractionKind.LAYOUT_COLLISION,
    "RV": InfractionKind.RED_LIGHT_VIOLATION,
    "OI": InfractionKind.OFFROAD_INFRACTION,
}

# Terminal or RC-discounted kinds; they never enter IS
UNPENALIZED = frozenset({
    InfractionKind.OFFROAD_INFRACTION,
    InfractionKind.ROUTE_DEVIATION,
    InfractionKind.BLOCKED,
})


@dataclass(frozen=True)
class RouteResult:
    route_id: str
    rc: float
    is_: float
    infraction_counts: Dict[str, int] = field(default_factory=dict)
    distance_km: float = 0.0

    @property
    def ds(self) -> float:
        return self.rc * self.is_

    def to_dict(self) -> dict:
        return {
            "route_id": self.route_id,
            "ds": self.ds,
            "rc": self.rc,
            "is": self.is_,
            "distance_km": self.distance_km,
            "infraction_counts": dict(self.infraction_counts),
        }


def route_completion(log, config: MetricsConfig = MetricsConfig(),
                     completion_threshold: float = 0.99) -> float:
    """
    Percent of the route completed.

    Progress is monotone, so a deviated episode keeps the value it had at
    the deviation point. Off-road driving discounts RC by the fraction of
    distance driven off the road when enabled.
    """
    if log.termination is None:
        raise ValueError(f"episode {log.route_id} has not terminated")
    fraction = 1.0 if log.completion >= completion_threshold else max(log.completion, 0.0)
    rc = 100.0 * fraction
    if config.offroad_discounts_rc and log.distance_driven_m > 0:
        rc *= 1.0 - min(log.offroad_distance_m / log.distance_driven_m, 1.0)
    return rc


def infraction_score(events: Iterable[InfractionEvent],
                     config: MetricsConfig = MetricsConfig()) -> float:
    """
    Product of penalty coefficients over the episode's events.

    Raises:
        ConfigError: a penalized kind has no coefficient in the table
    """
    score = 1.0
    for event in events:
        if event.kind in UNPENALIZED:
            continue
        try:
            score *= config.penalties[event.kind.value]
        except KeyError:
            raise ConfigError(f"no penalty coefficient for {event.kind.value}") from None
    return score


def score_log(log, config: MetricsConfig = MetricsConfig(),
              completion_threshold: float = 0.99) -> RouteResult:
    return RouteResult(
        route_id=log.route_id,
        rc=route_completion(log, config, completion_threshold),
        is_=infraction_score(log.events, config),
        infraction_counts=log.infraction_counts(),
        distance_km=log.distance_driven_m / 1000.0,
    )


def driving_score(results: Sequence[RouteResult]) -> Tuple[float, float, float]:
    """Suite (DS, RC, IS) as means over routes."""
    if not results:
        raise EmptySuiteError("cannot aggregate an empty suite")
    ds = float(np.mean([r.ds for r in results]))
    rc = float(np.mean([r.rc for r in results]))
    is_ = float(np.mean([r.is_ for r in results]))
    return ds, rc, is_


def infraction_rates(results: Sequence[RouteResult]) -> Dict[str, float]:
    """Infractions per km for VC, PC, LC, RV and OI over the whole suite."""
    total_km = sum(r.distance_km for r in results)
    if total_km <= 0:
        raise ZeroDistanceError("total distance driven is zero")
    rates = {}
    for column, kind in RATE_KINDS.items():
        count = sum(r.infraction_counts.get(kind.value, 0) for r in results)
        rates[column] = count / total_km
    logger.debug("rates over %.3f km: %s", total_km, rates)
    return rates
