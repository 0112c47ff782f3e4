"""
Long-tail Resampling
----------------------
Caps over-represented command classes so that the largest retained group
is at most cap_ratio times the smallest. Rare groups are kept whole.

Example:
    resample_plan({"a": 1000, "b": 10}, cap_ratio=10)
    # {"a": 100, "b": 10}
"""

import logging
import math
from collections import defaultdict
from typing import Callable, Dict, Hashable, List, Mapping, Sequence, TypeVar

import numpy as np


logger = logging.getLogger(__name__)

T = TypeVar("T")


def resample_plan(
    sizes: Mapping[Hashable, int],
    cap_ratio: float = 20.0,
    floor: int = 50
) -> Dict[Hashable, int]:
    """
    Retained size per group.

    The reference size is the smallest group, raised to floor / cap_ratio
    so that a handful of stray records cannot shrink every other group.
    Groups at or below cap_ratio * reference are kept whole.
    """
    if cap_ratio < 1:
        raise ValueError(f"cap_ratio must be >= 1, got {cap_ratio}")
    if not sizes:
        return {}
    reference = max(min(sizes.values()), floor / cap_ratio)
    cap = int(math.floor(cap_ratio * reference))
    return {key: min(n, cap) for key, n in sizes.items()}


def group_by(records: Sequence[T], key: Callable[[T], Hashable]) -> Dict[Hashable, List[int]]:
    groups: Dict[Hashable, List[int]] = defaultdict(list)
    for i, record in enumerate(records):
        groups[key(record)].append(i)
    return dict(groups)


def resample(
    records: Sequence[T],
    cap_ratio: float = 20.0,
    floor: int = 50,
    seed: int = 0,
    key: Callable[[T], Hashable] = lambda record: record.command
) -> List[T]:
    """
    Downsample each over-represented group with a seeded draw.

    Output keeps the input order; the same seed gives the same subset.
    """
    groups = group_by(records, key)
    plan = resample_plan({k: len(v) for k, v in groups.items()}, cap_ratio, floor)
    rng = np.random.default_rng(seed)

    keep: List[int] = []
    for k in sorted(groups, key=str):
        members = groups[k]
        n = plan[k]
        if n < len(members):
            chosen = rng.choice(len(members), size=n, replace=False)
            keep.extend(members[i] for i in chosen)
        else:
            keep.extend(members)
    keep.sort()

    logger.info("resampled %d -> %d records over %d groups",
                len(records), len(keep), len(groups))
    for k in sorted(groups, key=lambda g: -len(groups[g])):
        logger.debug("  %-60s %8d -> %8d", k, len(groups[k]), plan[k])
    return [records[i] for i in keep]


def histogram(records: Sequence[T],
              key: Callable[[T], Hashable] = lambda record: record.command) -> Dict[Hashable, int]:
    """Group sizes, largest first."""
    groups = group_by(records, key)
    return {k: len(groups[k]) for k in sorted(groups, key=lambda g: (-len(groups[g]), str(g)))}
