"""
Configuration Module
----------------------
Layered configuration for the simulator and benchmark harness.

Every numeric threshold used by the world, planner, controller,
benchmark and metrics lives here as a dataclass field with its default.
A JSON file can override any subset of fields; CLI flags override the file.

Author: Mehmet Demir
"""

import hashlib
import json
from dataclasses import dataclass, field, fields, asdict, replace
from pathlib import Path
from typing import Any, Dict, Optional, Union


class ConfigError(ValueError):
    """Raised for invalid or unknown configuration values."""


@dataclass(frozen=True)
class WorldConfig:
    """Vehicle dynamics and world geometry constants."""
    dt: float = 0.1
    a_max: float = 3.0          # m/s^2 at full throttle
    b_max: float = 8.0          # m/s^2 at full brake
    c_drag: float = 0.1         # 1/s
    v_max: float = 12.0         # m/s
    delta_max: float = 0.6      # rad
    wheelbase: float = 2.8      # m
    d_dev: float = 30.0         # route deviation threshold, m
    t_block: float = 60.0       # blocked timeout, s
    ego_radius: float = 1.2
    vehicle_radius: float = 1.2
    pedestrian_radius: float = 0.4
    bike_radius: float = 0.8
    sensing_range: float = 40.0
    sensing_half_angle: float = 1.0471975511965976  # 60 deg
    signal_range: float = 35.0
    lane_half_width: float = 1.75
    road_half_width: float = 3.5
    path_half_width: float = 2.5
    junction_radius: float = 15.0
    stop_clear_distance: float = 8.0
    signal_lateral_tolerance: float = 4.0
    projection_back_m: float = 10.0
    projection_ahead_m: float = 80.0


@dataclass(frozen=True)
class PlannerConfig:
    """Rule engine thresholds shared by live planning and annotation."""
    stopped_speed: float = 0.1
    significantly_below: float = 0.5
    slightly_below: float = 0.9
    above_target: float = 1.1
    straight_band: float = 0.05
    sharp_band: float = 0.35
    pedestrian_brake_m: float = 15.0
    red_light_brake_m: float = 15.0    # floor on the red light stop window
    lead_gap_brake_m: float = 8.0
    lead_gap_slow_m: float = 20.0
    brake_margin_m: float = 5.0
    b_max: float = 8.0                 # follows world.b_max inside SimConfig
    junction_notice_m: float = 20.0
    self_correction_rad: float = 0.15
    heading_gain: float = 0.5
    offset_gain: float = 0.05
    offset_term_limit: float = 0.1
    turn_anticipation_m: float = 8.0
    turn_bias: float = 0.1


@dataclass(frozen=True)
class ControllerConfig:
    """Waypoint expansion and tracking parameters."""
    kp: float = 0.8
    ki: float = 0.05
    kd: float = 0.1
    integral_limit: float = 2.0
    integral_leak_s: Optional[float] = 2.0
    waypoint_dt: float = 0.5            # seconds of travel between waypoints
    slight_curvature: float = 0.08      # 1/m
    sharp_curvature: float = 0.25       # 1/m
    slow_factor: float = 0.6
    correction_heading_gain: float = 0.3
    correction_offset_gain: float = 0.05
    straight_correction_limit: float = 0.02
    turn_correction_limit: float = 0.05
    overshoot_tolerance: float = 0.1
    min_lookahead: float = 4.0
    lookahead_time: float = 1.2
    wheelbase: float = 2.8
    delta_max: float = 0.6
    a_max: float = 3.0
    c_drag: float = 0.1
    stopped_speed: float = 0.1


@dataclass(frozen=True)
class BenchmarkConfig:
    """Episode runner settings."""
    planner_cadence: int = 10
    completion_threshold: float = 0.99
    timeout_speed_fraction: float = 0.25
    segment_lead_m: float = 25.0
    workers: int = 1


@dataclass(frozen=True)
class MetricsConfig:
    """Infraction penalty coefficients and scoring switches."""
    penalties: Dict[str, float] = field(default_factory=lambda: {
        "PedestrianCollision": 0.50,
        "VehicleCollision": 0.60,
        "LayoutCollision": 0.65,
        "RedLightViolation": 0.70,
        "StopSignViolation": 0.80,
    })
    offroad_discounts_rc: bool = True


@dataclass(frozen=True)
class DatasetConfig:
    """Annotation cadence and long-tail resampling."""
    log_dt: float = 0.5
    cap_ratio: float = 20.0
    floor: int = 50
    seed: int = 0


@dataclass(frozen=True)
class SimConfig:
    """All configuration sections together."""
    world: WorldConfig = field(default_factory=WorldConfig)
    planner: PlannerConfig = field(default_factory=PlannerConfig)
    controller: ControllerConfig = field(default_factory=ControllerConfig)
    benchmark: BenchmarkConfig = field(default_factory=BenchmarkConfig)
    metrics: MetricsConfig = field(default_factory=MetricsConfig)
    dataset: DatasetConfig = field(default_factory=DatasetConfig)

    def __post_init__(self):
        if self.planner.b_max != self.world.b_max:
            object.__setattr__(self, "planner", replace(self.planner, b_max=self.world.b_max))

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


SECTIONS = ("world", "planner", "controller", "benchmark", "metrics", "dataset")


def _override_section(section: Any, values: Dict[str, Any], name: str) -> Any:
    known = {f.name for f in fields(section)}
    unknown = sorted(set(values) - known)
    if unknown:
        raise ConfigError(f"unknown {name} keys: {', '.join(unknown)}")
    if name == "planner" and "b_max" in values:
        raise ConfigError("planner.b_max is taken from world.b_max; set that instead")

    # dict fields are merged key by key onto the current table
    merged = {}
    for key, value in values.items():
        current = getattr(section, key)
        if isinstance(current, dict):
            if not isinstance(value, dict):
                raise ConfigError(f"{name}.{key} must be an object")
            value = {**current, **value}
        merged[key] = value
    return replace(section, **merged)


def merge_config(base: SimConfig, overrides: Dict[str, Any]) -> SimConfig:
    """Apply a nested dict of overrides on top of a config."""
    unknown = sorted(set(overrides) - set(SECTIONS))
    if unknown:
        raise ConfigError(f"unknown config sections: {', '.join(unknown)}")

    updated = {}
    for name in SECTIONS:
        if name in overrides:
            values = overrides[name]
            if not isinstance(values, dict):
                raise ConfigError(f"section '{name}' must be an object")
            updated[name] = _override_section(getattr(base, name), values, name)

    cfg = replace(base, **updated)
    validate_config(cfg)
    return cfg


def load_config(path: Optional[Union[str, Path]] = None) -> SimConfig:
    """Load defaults, then apply overrides from a JSON file if given."""
    cfg = SimConfig()
    if path is None:
        return cfg

    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path}: invalid JSON ({e})") from e
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be an object")
    return merge_config(cfg, data)


def validate_config(cfg: SimConfig):
    """Check numeric ranges that would make a run meaningless."""
    if cfg.world.dt <= 0:
        raise ConfigError(f"dt must be > 0, got {cfg.world.dt}")
    if cfg.benchmark.planner_cadence < 1:
        raise ConfigError(
            f"planner cadence must be >= 1, got {cfg.benchmark.planner_cadence}"
        )
    if cfg.benchmark.workers < 1:
        raise ConfigError(f"workers must be >= 1, got {cfg.benchmark.workers}")
    if cfg.dataset.cap_ratio < 1:
        raise ConfigError(f"cap_ratio must be >= 1, got {cfg.dataset.cap_ratio}")
    if cfg.dataset.log_dt <= 0:
        raise ConfigError(f"log_dt must be > 0, got {cfg.dataset.log_dt}")
    penalized = set(MetricsConfig().penalties)
    unknown = sorted(set(cfg.metrics.penalties) - penalized)
    if unknown:
        raise ConfigError(f"no penalty applies to: {', '.join(unknown)}")
    missing = sorted(penalized - set(cfg.metrics.penalties))
    if missing:
        raise ConfigError(f"penalty table is missing: {', '.join(missing)}")
    for kind, coef in cfg.metrics.penalties.items():
        if not 0.0 <= coef <= 1.0:
            raise ConfigError(f"penalty for {kind} must be in [0, 1], got {coef}")


def config_hash(cfg: SimConfig) -> str:
    """Short stable hash identifying a configuration."""
    canonical = json.dumps(cfg.to_dict(), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:12]
