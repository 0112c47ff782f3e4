"""
Tests for log annotation, long-tail resampling and record files.
"""

import json
from pathlib import Path

import numpy as np
import pytest
from src.benchmark.runner import read_episode_log
from src.control.controller import WaypointController, offline_l1
from src.dataset.annotation import (
    LogFrame, ShortLogError, annotate_episode, annotate_log, waypoint_stride,
)
from src.dataset.records import HierarchyRecord, SchemaError, read_records, write_records
from src.dataset.resampling import histogram, resample, resample_plan
from src.hierarchy.commands import parse_command
from src.hierarchy.types import Instruction, Waypoints
from src.planning.telemetry import TelemetryFrame


DEMO_LOG = Path(__file__).resolve().parent.parent / "data" / "demo_episode.jsonl"
GO = Instruction("Go straight ahead.")


def straight_frames(n, speed=8.0, dt=0.5):
    telemetry = TelemetryFrame(speed_mps=speed, target_speed_mps=8.0)
    return [LogFrame(telemetry, speed * dt * i, 0.0, 0.0) for i in range(n)]


def record(command, frame_id=0):
    return HierarchyRecord(frame_id, "Go straight ahead.", command,
                           Waypoints.stopped(), TelemetryFrame(speed_mps=0.0))


def test_waypoint_stride():
    assert waypoint_stride(0.5) == 1
    assert waypoint_stride(0.1) == 5
    assert waypoint_stride(1.0) == 1


def test_short_log_rejected():
    with pytest.raises(ShortLogError):
        annotate_log(straight_frames(5), GO)
    assert len(annotate_log(straight_frames(6), GO)) == 1


def test_annotation_reads_future_poses():
    records = annotate_log(straight_frames(10), GO)
    assert len(records) == 5
    first = records[0]
    assert first.waypoints.points == pytest.approx(
        ((0.0, 4.0), (0.0, 8.0), (0.0, 12.0), (0.0, 16.0), (0.0, 20.0)))
    assert first.command == \
        "Maintain current speed to match the target speed. Keep the steering wheel straight."
    assert [r.frame_id for r in records] == list(range(5))


def test_annotation_rotates_into_ego_frame():
    telemetry = TelemetryFrame(speed_mps=4.0, target_speed_mps=8.0)
    # heading north: forward is +y in the world
    frames = [LogFrame(telemetry, 0.0, 2.0 * i, np.pi / 2) for i in range(6)]
    wp = annotate_log(frames, GO)[0].waypoints
    assert wp.points[-1] == pytest.approx((0.0, 10.0))


def test_demo_log_annotation():
    log = read_episode_log(DEMO_LOG)
    records = annotate_episode(log)
    assert len(records) == len(log.ticks) - 25
    for r in records:
        parse_command(r.command)
        assert r.instruction == "Go straight ahead."
    assert offline_l1(records, WaypointController()) == pytest.approx(0.0, abs=1e-9)


def test_resample_plan_example():
    assert resample_plan({"a": 1000, "b": 10}, cap_ratio=10) == {"a": 100, "b": 10}
    assert resample_plan({}) == {}
    with pytest.raises(ValueError):
        resample_plan({"a": 3}, cap_ratio=0.5)


def test_resample_plan_floor_protects_against_stray_groups():
    plan = resample_plan({"a": 5000, "b": 1}, cap_ratio=20, floor=50)
    assert plan == {"a": 50, "b": 1}


def test_resample_balance_over_random_distributions():
    rng = np.random.default_rng(3)
    for _ in range(50):
        sizes = {f"c{i}": int(n) for i, n in enumerate(rng.integers(50, 20000, size=12))}
        plan = resample_plan(sizes, cap_ratio=20, floor=50)
        kept = [n for n in plan.values() if n > 0]
        assert max(kept) <= 20 * min(kept)
        for k in sizes:
            assert plan[k] <= sizes[k]
            if sizes[k] <= 20 * min(sizes.values()):
                assert plan[k] == sizes[k]


def test_resample_plan_heavy_skew_with_groups_below_floor():
    assert resample_plan({"a": 5000, "b": 30, "c": 1000}, cap_ratio=20, floor=50) == \
        {"a": 600, "b": 30, "c": 600}
    assert resample_plan({"a": 5000, "b": 2, "c": 1000}, cap_ratio=20, floor=50) == \
        {"a": 50, "b": 2, "c": 50}

    rng = np.random.default_rng(11)
    for _ in range(50):
        small = rng.integers(1, 50, size=3)
        large = rng.integers(25_000, 60_000, size=4)
        sizes = {f"c{i}": int(n) for i, n in enumerate(np.concatenate([small, large]))}
        assert max(sizes.values()) >= 500 * min(sizes.values())
        plan = resample_plan(sizes, cap_ratio=20, floor=50)
        for k, n in sizes.items():
            assert plan[k] <= n
            if n <= 50:
                assert plan[k] == n
        if min(sizes.values()) >= 50 / 20:
            assert max(plan.values()) <= 20 * min(plan.values())
        else:
            assert max(plan.values()) <= 50


def test_resample_large_corpus_size():
    sizes = {f"common-{i}": 150_000 for i in range(10)}
    sizes.update({f"rare-{i}": 500 for i in range(5)})
    rest = 3_000_000 - sum(sizes.values())
    for i in range(150):
        sizes[f"mid-{i}"] = rest // 150 + (1 if i < rest % 150 else 0)
    assert sum(sizes.values()) == 3_000_000
    total = sum(resample_plan(sizes, cap_ratio=20).values())
    assert 1_275_000 <= total <= 2_125_000


def test_resample_is_seeded_and_keeps_order():
    records = [record("Apply brakes safely.", i) for i in range(300)]
    records += [record("Steer slightly to the left.", 300 + i) for i in range(5)]
    a = resample(records, cap_ratio=10, floor=10, seed=4)
    b = resample(records, cap_ratio=10, floor=10, seed=4)
    assert a == b
    assert [r.frame_id for r in a] == sorted(r.frame_id for r in a)
    assert histogram(a) == {"Apply brakes safely.": 50, "Steer slightly to the left.": 5}
    assert resample(records, cap_ratio=10, floor=10, seed=5) != a


def test_histogram_largest_first():
    records = [record("Apply brakes safely.")] + [record("Keep the steering wheel straight.")] * 3
    assert list(histogram(records)) == \
        ["Keep the steering wheel straight.", "Apply brakes safely."]


def test_records_round_trip(tmp_path):
    records = annotate_log(straight_frames(8), GO)
    path = tmp_path / "records.jsonl"
    write_records(records, path, config_hash="abc123")
    header = json.loads(path.read_text().splitlines()[0])
    assert header == {"schema": "hierarchy-record/1", "config_hash": "abc123"}
    assert read_records(path) == records


def test_records_without_header(tmp_path):
    path = tmp_path / "records.jsonl"
    path.write_text(json.dumps(record("Apply brakes safely.").to_dict()) + "\n")
    assert len(read_records(path)) == 1


def test_empty_record_file(tmp_path):
    path = tmp_path / "empty.jsonl"
    path.write_text("")
    assert read_records(path) == []


def test_schema_error_names_the_line(tmp_path):
    good = json.dumps(record("Apply brakes safely.").to_dict())
    bad = json.dumps(record("Drive carefully please.").to_dict())
    path = tmp_path / "records.jsonl"
    path.write_text("\n".join([good, good, bad]) + "\n")
    with pytest.raises(SchemaError) as info:
        read_records(path)
    assert info.value.lineno == 3
    assert ":3:" in str(info.value)


def test_schema_error_on_missing_field_and_bad_json(tmp_path):
    path = tmp_path / "records.jsonl"
    path.write_text('{"frame_id": 1}\n')
    with pytest.raises(SchemaError):
        read_records(path)
    path.write_text("{not json\n")
    with pytest.raises(SchemaError):
        read_records(path)
    path.write_text('{"schema": "other/9"}\n')
    with pytest.raises(SchemaError):
        read_records(path)
