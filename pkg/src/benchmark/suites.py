"""
Benchmark Suites
------------------
Suite files list route references and how instructions are issued.

Suite JSON:
    {
      "name": "langauto_tiny",
      "instruction_mode": "PerSegment",
      "town_seed": 42,
      "holdout_towns": [],
      "routes": [{"town_id": 1, "route_id": "t1-tiny-00"}, ...]
    }

A route entry may carry "perturbation": {"at_s_m": 120.0, "delta_rad": 0.4},
or {"after_turn_m": 5.0, "delta_rad": 0.4} to kick just past the route's
first turn.
"""

import json
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Callable, FrozenSet, Iterable, List, Optional, Sequence, Tuple, TypeVar, Union

from src.config import ConfigError
from src.simulation.town import TOWN_IDS


T = TypeVar("T")


class InstructionMode(Enum):
    PER_SEGMENT = "PerSegment"
    LONG_HORIZON_AT_START = "LongHorizonAtStart"


@dataclass(frozen=True)
class Perturbation:
    """
    Heading kick applied once when progress first passes a trigger point.

    The trigger is either a fixed arclength `at_s` or `after_turn_m`
    meters past the end of the route's first turn.
    """
    at_s: Optional[float]
    delta_rad: float
    after_turn_m: Optional[float] = None

    def __post_init__(self):
        if (self.at_s is None) == (self.after_turn_m is None):
            raise ConfigError("perturbation needs exactly one of at_s_m and after_turn_m")

    def trigger_s(self, route) -> float:
        if self.after_turn_m is None:
            return self.at_s
        if not route.turns:
            raise ConfigError(f"route {route.route_id} has no turn to perturb after")
        return route.turns[0].s_end + self.after_turn_m

    def to_dict(self) -> dict:
        if self.after_turn_m is None:
            return {"at_s_m": self.at_s, "delta_rad": self.delta_rad}
        return {"after_turn_m": self.after_turn_m, "delta_rad": self.delta_rad}

    @classmethod
    def from_dict(cls, data: dict) -> "Perturbation":
        at_s = data.get("at_s_m")
        after = data.get("after_turn_m")
        return cls(
            at_s=None if at_s is None else float(at_s),
            delta_rad=float(data["delta_rad"]),
            after_turn_m=None if after is None else float(after),
        )


@dataclass(frozen=True)
class RouteRef:
    town_id: int
    route_id: str
    perturbation: Optional[Perturbation] = None

    def to_dict(self) -> dict:
        data = {"town_id": self.town_id, "route_id": self.route_id}
        if self.perturbation is not None:
            data["perturbation"] = self.perturbation.to_dict()
        return data


@dataclass(frozen=True)
class SuiteSpec:
    name: str
    routes: Tuple[RouteRef, ...]
    instruction_mode: InstructionMode = InstructionMode.PER_SEGMENT
    holdout_towns: FrozenSet[int] = field(default_factory=frozenset)
    town_seed: int = 42

    def __post_init__(self):
        if not self.routes:
            raise ConfigError(f"suite '{self.name}' has no routes")
        ids = [r.route_id for r in self.routes]
        if len(set(ids)) != len(ids):
            raise ConfigError(f"suite '{self.name}' lists a route more than once")
        for ref in self.routes:
            if ref.town_id not in TOWN_IDS:
                raise ConfigError(f"suite '{self.name}': town {ref.town_id} not in 1..8")
        if self.holdout_towns:
            outside = sorted({r.town_id for r in self.routes} - set(self.holdout_towns))
            if outside:
                raise ConfigError(
                    f"suite '{self.name}' holds out towns {sorted(self.holdout_towns)} "
                    f"but lists routes from {outside}"
                )

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "instruction_mode": self.instruction_mode.value,
            "town_seed": self.town_seed,
            "holdout_towns": sorted(self.holdout_towns),
            "routes": [r.to_dict() for r in self.routes],
        }


def suite_from_dict(data: dict, source: str = "<suite>") -> SuiteSpec:
    try:
        refs = []
        for entry in data["routes"]:
            kick = entry.get("perturbation")
            refs.append(RouteRef(
                town_id=int(entry["town_id"]),
                route_id=str(entry["route_id"]),
                perturbation=Perturbation.from_dict(kick) if kick else None,
            ))
        return SuiteSpec(
            name=str(data["name"]),
            routes=tuple(refs),
            instruction_mode=InstructionMode(data.get("instruction_mode", "PerSegment")),
            holdout_towns=frozenset(int(t) for t in data.get("holdout_towns", ())),
            town_seed=int(data.get("town_seed", 42)),
        )
    except (KeyError, TypeError, ValueError) as e:
        if isinstance(e, ConfigError):
            raise
        raise ConfigError(f"{source}: invalid suite ({e})") from e


def load_suite(path: Union[str, Path]) -> SuiteSpec:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"suite file not found: {path}")
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path}: invalid JSON ({e})") from e
    return suite_from_dict(data, str(path))


def save_suite(spec: SuiteSpec, path: Union[str, Path]):
    Path(path).write_text(json.dumps(spec.to_dict(), indent=2) + "\n")


def split_novel_environment(
    town_pool: Iterable[int],
    holdout: Iterable[int],
    route_ids: Sequence[str] = tuple(f"tiny-{k:02d}" for k in range(10)),
    town_seed: int = 42
) -> Tuple[Tuple[int, ...], SuiteSpec]:
    """
    Split towns into training towns and a held-out evaluation suite.

    route_ids are town-relative ("tiny-03" becomes "t8-tiny-03").
    """
    pool = sorted(set(town_pool))
    held = sorted(set(holdout))
    if not held:
        raise ConfigError("holdout must name at least one town")
    if not set(held) <= set(pool):
        raise ConfigError(f"holdout towns {held} are not all in the pool {pool}")
    train = tuple(t for t in pool if t not in held)
    if not train:
        raise ConfigError("holdout cannot cover the whole town pool")

    suite = SuiteSpec(
        name="novel_environment",
        routes=tuple(RouteRef(t, f"t{t}-{rid}") for t in held for rid in route_ids),
        holdout_towns=frozenset(held),
        town_seed=town_seed,
    )
    assert not set(train) & set(suite.holdout_towns)
    return train, suite


def filter_for_export(items: Iterable[T], holdout: Iterable[int],
                      town_of: Callable[[T], int] = lambda item: item.town_id) -> List[T]:
    """Drop anything recorded in a held-out town before dataset export."""
    held = set(holdout)
    return [item for item in items if town_of(item) not in held]
