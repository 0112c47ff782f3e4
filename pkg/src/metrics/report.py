"""
Score Reports
---------------
Aligned text tables, CSV and a JSON summary for a scored suite.
"""

import csv
import json
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Union

from src.metrics.scores import (
    RATE_KINDS, RouteResult, ZeroDistanceError, driving_score, infraction_rates
)


def _table(header: List[str], rows: List[List[str]]) -> str:
    widths = [max(len(row[i]) for row in [header] + rows) for i in range(len(header))]
    line = lambda row: "  ".join(cell.rjust(w) if i else cell.ljust(w)
                                 for i, (cell, w) in enumerate(zip(row, widths)))
    rule = "  ".join("-" * w for w in widths)
    return "\n".join([line(header), rule] + [line(row) for row in rows])


def score_table(suite: str, results: Sequence[RouteResult]) -> str:
    """Per-route DS/RC/IS followed by the suite means."""
    rows = [[r.route_id, f"{r.ds:.2f}", f"{r.rc:.2f}", f"{r.is_:.3f}"]
            for r in sorted(results, key=lambda r: r.route_id)]
    ds, rc, is_ = driving_score(results)
    rows.append([f"{suite} (mean)", f"{ds:.2f}", f"{rc:.2f}", f"{is_:.3f}"])
    return _table(["route", "DS", "RC", "IS"], rows)


def rate_table(suite: str, results: Sequence[RouteResult]) -> str:
    """Infractions per km."""
    try:
        rates = infraction_rates(results)
    except ZeroDistanceError:
        return f"{suite}: no distance driven, rates undefined"
    row = [suite] + [f"{rates[k]:.3f}" for k in RATE_KINDS]
    return _table(["suite"] + list(RATE_KINDS), [row])


def write_csv(results: Sequence[RouteResult], path: Union[str, Path],
              config_hash: Optional[str] = None):
    """One row per route; every row carries the config hash of the run."""
    kinds = sorted({k for r in results for k in r.infraction_counts})
    with Path(path).open("w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["route_id", "ds", "rc", "is", "distance_km"] + kinds + ["config_hash"])
        for r in sorted(results, key=lambda r: r.route_id):
            writer.writerow([r.route_id, f"{r.ds:.4f}", f"{r.rc:.4f}", f"{r.is_:.4f}",
                             f"{r.distance_km:.4f}"]
                            + [r.infraction_counts.get(k, 0) for k in kinds] + [config_hash or ""])


def summary(suite: str, results: Sequence[RouteResult],
            config_hash: Optional[str] = None) -> Dict:
    ds, rc, is_ = driving_score(results)
    try:
        rates = infraction_rates(results)
    except ZeroDistanceError:
        rates = None
    return {
        "suite": suite,
        "config_hash": config_hash,
        "routes": len(results),
        "ds": ds,
        "rc": rc,
        "is": is_,
        "rates_per_km": rates,
        "results": [r.to_dict() for r in sorted(results, key=lambda r: r.route_id)],
    }


def write_summary(suite: str, results: Sequence[RouteResult], path: Union[str, Path],
                  config_hash: Optional[str] = None):
    Path(path).write_text(json.dumps(summary(suite, results, config_hash), indent=2) + "\n")
