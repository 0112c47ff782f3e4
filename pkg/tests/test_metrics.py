"""
Tests for driving scores, infraction rates and reports.
"""

import csv
import json

import pytest
from src.benchmark.runner import EpisodeLog, Termination
from src.config import MetricsConfig
from src.metrics.report import rate_table, score_table, summary, write_csv, write_summary
from src.metrics.scores import (
    EmptySuiteError, RouteResult, ZeroDistanceError, driving_score, infraction_rates,
    infraction_score, route_completion, score_log,
)
from src.simulation.infractions import InfractionEvent, InfractionKind
from src.simulation.route import Route


def event(kind, tick=0):
    return InfractionEvent(tick, kind, 0.0, 0.0)


def finished_log(completion, termination=Termination.COMPLETED, driven=100.0, offroad=0.0):
    log = EpisodeLog(route=Route("r1", 1, ((0.0, 0.0), (100.0, 0.0))), config_hash="test")
    log.completion = completion
    log.distance_driven_m = driven
    log.offroad_distance_m = offroad
    log.finish(termination)
    return log


def test_infraction_score_examples():
    assert infraction_score([]) == 1.0
    assert infraction_score([event(InfractionKind.VEHICLE_COLLISION)]) == \
        pytest.approx(0.60, abs=1e-12)
    pair = [event(InfractionKind.PEDESTRIAN_COLLISION), event(InfractionKind.RED_LIGHT_VIOLATION)]
    assert infraction_score(pair) == pytest.approx(0.35, abs=1e-12)


def test_terminal_kinds_carry_no_penalty():
    events = [event(InfractionKind.ROUTE_DEVIATION), event(InfractionKind.BLOCKED),
              event(InfractionKind.OFFROAD_INFRACTION)]
    assert infraction_score(events) == 1.0


def test_penalties_come_from_config():
    config = MetricsConfig(penalties={"VehicleCollision": 0.5})
    events = [event(InfractionKind.VEHICLE_COLLISION)] * 2
    assert infraction_score(events, config) == pytest.approx(0.25)


def test_route_completion_examples():
    assert route_completion(finished_log(1.0)) == 100.0
    assert route_completion(finished_log(0.995)) == 100.0
    assert route_completion(finished_log(0.5, Termination.DEVIATED)) == pytest.approx(50.0)
    assert route_completion(finished_log(0.0, Termination.BLOCKED, driven=0.0)) == 0.0


def test_offroad_discount():
    log = finished_log(1.0, driven=100.0, offroad=25.0)
    assert route_completion(log) == pytest.approx(75.0)
    assert route_completion(log, MetricsConfig(offroad_discounts_rc=False)) == 100.0


def test_route_completion_needs_termination():
    log = EpisodeLog(route=Route("r1", 1, ((0.0, 0.0), (100.0, 0.0))), config_hash="test")
    with pytest.raises(ValueError):
        route_completion(log)


def test_per_route_identity():
    result = RouteResult("r", rc=80.0, is_=0.6)
    assert result.ds == 80.0 * 0.6
    assert result.to_dict()["ds"] == result.ds


def test_score_log_counts_events():
    log = finished_log(1.0, driven=250.0)
    result = score_log(log)
    assert result.rc == 100.0
    assert result.is_ == 1.0
    assert result.distance_km == pytest.approx(0.25)
    assert result.infraction_counts["VehicleCollision"] == 0


def test_driving_score_examples():
    assert driving_score([RouteResult("a", 100.0, 1.0)]) == (100.0, 100.0, 1.0)
    ds, rc, is_ = driving_score([RouteResult("a", 100.0, 1.0), RouteResult("b", 50.0, 0.5)])
    assert ds == pytest.approx(62.5, abs=1e-12)
    assert rc == pytest.approx(75.0)
    assert is_ == pytest.approx(0.75)
    assert ds != pytest.approx(rc * is_)


def test_empty_suite():
    with pytest.raises(EmptySuiteError):
        driving_score([])


def test_infraction_rates_examples():
    quiet = infraction_rates([RouteResult("a", 100.0, 1.0, {}, 10.0)])
    assert quiet == {"VC": 0.0, "PC": 0.0, "LC": 0.0, "RV": 0.0, "OI": 0.0}

    red = infraction_rates([RouteResult("a", 100.0, 0.7, {"RedLightViolation": 1}, 12.2)])
    assert red["RV"] == pytest.approx(1 / 12.2)
    assert round(red["RV"], 3) == 0.082

    crashes = infraction_rates([RouteResult("a", 100.0, 0.36, {"VehicleCollision": 2}, 0.4),
                                RouteResult("b", 100.0, 1.0, {}, 0.6)])
    assert crashes["VC"] == pytest.approx(2.0)


def test_zero_distance_rates():
    with pytest.raises(ZeroDistanceError):
        infraction_rates([RouteResult("a", 0.0, 1.0)])
    assert "rates undefined" in rate_table("tiny", [RouteResult("a", 0.0, 1.0)])


def test_score_table_lists_routes_then_mean():
    results = [RouteResult("b", 50.0, 0.5), RouteResult("a", 100.0, 1.0)]
    lines = score_table("tiny", results).splitlines()
    assert lines[0].split() == ["route", "DS", "RC", "IS"]
    assert lines[2].startswith("a ")
    assert lines[-1].startswith("tiny (mean)")
    assert "62.50" in lines[-1]


def test_csv_and_summary(tmp_path):
    results = [RouteResult("a", 100.0, 0.6, {"VehicleCollision": 1}, 0.5),
               RouteResult("b", 50.0, 1.0, {"VehicleCollision": 0}, 0.5)]
    path = tmp_path / "summary.csv"
    write_csv(results, path, config_hash="abc")
    with path.open() as f:
        rows = list(csv.reader(f))
    assert rows[0] == [
        "route_id", "ds", "rc", "is", "distance_km", "VehicleCollision", "config_hash",
    ]
    assert rows[1][0] == "a"
    assert [row[-1] for row in rows[1:]] == ["abc", "abc"]
    assert float(rows[1][1]) == pytest.approx(60.0)

    doc = summary("tiny", results, config_hash="abc")
    assert doc["ds"] == pytest.approx(55.0)
    assert doc["rates_per_km"]["VC"] == pytest.approx(1.0)

    out = tmp_path / "summary.json"
    write_summary("tiny", results, out, config_hash="abc")
    assert json.loads(out.read_text())["config_hash"] == "abc"
