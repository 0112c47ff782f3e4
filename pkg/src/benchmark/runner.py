"""
Episode Runner
----------------
Closed-loop evaluation: every tick the world is observed, the planner
refreshes the mid-level command on decision ticks, the controller turns
the current command into actuation, and the world steps.

Features:
    - Per-segment or long-horizon instruction dispatch
    - Optional one-off heading perturbation
    - Deterministic JSONL episode logs
    - Process pool over independent routes

Author: Mehmet Demir
"""

import json
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

from src.config import ConfigError, SimConfig, config_hash, validate_config
from src.control.controller import get_controller
from src.hierarchy.commands import render_command
from src.hierarchy.types import ControlSignal, Instruction, Waypoints
from src.planning.rule_planner import get_planner
from src.planning.telemetry import TelemetryFrame
from src.simulation.infractions import InfractionEvent, InfractionKind, detect_infractions
from src.simulation.route import Route, wrap_angle
from src.simulation.sensing import observe
from src.simulation.town import Scenario, generate_town
from src.simulation.world import initial_state, step

from src.benchmark.instructions import segment_instructions
from src.benchmark.long_horizon import route_long_horizon
from src.benchmark.suites import InstructionMode, Perturbation, RouteRef, SuiteSpec


logger = logging.getLogger(__name__)

LOG_SCHEMA = "episode-log/1"


class Termination(Enum):
    COMPLETED = "Completed"
    DEVIATED = "Deviated"
    BLOCKED = "Blocked"
    TIMEOUT = "Timeout"


@dataclass(frozen=True)
class TickRecord:
    """
    One tick of an episode.

    Pose, progress and telemetry are observed at the start of the tick;
    infractions are those raised by the step that follows.
    """
    tick: int
    time_s: float
    x: float
    y: float
    heading: float
    speed: float
    progress_s: float
    lateral_offset_m: float
    frame: TelemetryFrame
    command: str
    decision: bool
    waypoints: Waypoints
    control: ControlSignal
    infractions: Tuple[InfractionEvent, ...] = ()
    instruction: Optional[str] = None   # text dispatched on this tick
    segments: Tuple[int, ...] = ()      # segment boundaries crossed on this tick

    def to_dict(self) -> dict:
        return {
            "type": "tick",
            "tick": self.tick,
            "time_s": self.time_s,
            "pose": {"x_m": self.x, "y_m": self.y, "heading_rad": self.heading,
                     "speed_mps": self.speed},
            "progress_m": self.progress_s,
            "lateral_offset_m": self.lateral_offset_m,
            "instruction": self.instruction,
            "segments": list(self.segments),
            "decision": self.decision,
            "command": self.command,
            "telemetry": self.frame.to_dict(),
            "waypoints": self.waypoints.to_list(),
            "control": self.control.to_dict(),
            "infractions": [e.to_dict() for e in self.infractions],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "TickRecord":
        pose = data["pose"]
        return cls(
            tick=data["tick"], time_s=data["time_s"],
            x=pose["x_m"], y=pose["y_m"], heading=pose["heading_rad"], speed=pose["speed_mps"],
            progress_s=data["progress_m"], lateral_offset_m=data["lateral_offset_m"],
            frame=TelemetryFrame.from_dict(data["telemetry"]),
            command=data["command"], decision=data["decision"],
            waypoints=Waypoints.from_list(data["waypoints"]),
            control=ControlSignal.from_dict(data["control"]),
            infractions=tuple(InfractionEvent.from_dict(e) for e in data["infractions"]),
            instruction=data.get("instruction"), segments=tuple(data.get("segments", ())),
        )


@dataclass
class EpisodeLog:
    route: Route
    config_hash: str
    suite: str = ""
    seed: int = 0
    planner: str = "reference"
    controller: str = "reference"
    dt: float = 0.1
    planner_cadence: int = 10
    instruction_mode: InstructionMode = InstructionMode.PER_SEGMENT
    ticks: List[TickRecord] = field(default_factory=list)
    termination: Optional[Termination] = None
    distance_driven_m: float = 0.0
    offroad_distance_m: float = 0.0
    completion: float = 0.0

    @property
    def route_id(self) -> str:
        return self.route.route_id

    @property
    def town_id(self) -> int:
        return self.route.town_id

    @property
    def events(self) -> List[InfractionEvent]:
        return [e for t in self.ticks for e in t.infractions]

    def infraction_counts(self) -> Dict[str, int]:
        counts = {kind.value: 0 for kind in InfractionKind}
        for event in self.events:
            counts[event.kind.value] += 1
        return counts

    def finish(self, termination: Termination):
        if self.termination is not None:
            raise RuntimeError(f"episode {self.route_id} already terminated")
        self.termination = termination

    def header(self) -> dict:
        return {
            "type": "header",
            "schema": LOG_SCHEMA,
            "config_hash": self.config_hash,
            "suite": self.suite,
            "seed": self.seed,
            "planner": self.planner,
            "controller": self.controller,
            "dt_s": self.dt,
            "planner_cadence": self.planner_cadence,
            "instruction_mode": self.instruction_mode.value,
            "route": self.route.to_dict(),
        }

    def footer(self) -> dict:
        return {
            "type": "footer",
            "config_hash": self.config_hash,
            "termination": self.termination.value if self.termination else None,
            "distance_driven_m": self.distance_driven_m,
            "offroad_distance_m": self.offroad_distance_m,
            "completion": self.completion,
            "infraction_counts": self.infraction_counts(),
        }

    def to_lines(self) -> List[str]:
        rows = [self.header()] + [t.to_dict() for t in self.ticks] + [self.footer()]
        return [json.dumps(row, separators=(",", ":")) for row in rows]


def write_episode_log(log: EpisodeLog, path: Union[str, Path]):
    Path(path).write_text("\n".join(log.to_lines()) + "\n")


def read_episode_log(path: Union[str, Path]) -> EpisodeLog:
    """
    Load an episode log written by write_episode_log.

    Raises:
        ValueError: missing header/footer or malformed line (names the line)
    """
    path = Path(path)
    header, footer, ticks = None, None, []
    with path.open() as f:
        for lineno, line in enumerate(f, start=1):
            if not line.strip():
                continue
            try:
                row = json.loads(line)
                kind = row["type"]
                if kind == "header":
                    header = row
                elif kind == "tick":
                    ticks.append(TickRecord.from_dict(row))
                elif kind == "footer":
                    footer = row
                else:
                    raise ValueError(f"unknown record type {kind!r}")
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as e:
                raise ValueError(f"{path}:{lineno}: malformed episode record ({e})") from e
    if header is None or footer is None:
        raise ValueError(f"{path}: episode log needs a header and a footer")

    log = EpisodeLog(
        route=Route.from_dict(header["route"]),
        config_hash=header["config_hash"],
        suite=header.get("suite", ""),
        seed=header.get("seed", 0),
        planner=header.get("planner", "reference"),
        controller=header.get("controller", "reference"),
        dt=header.get("dt_s", 0.1),
        planner_cadence=header.get("planner_cadence", 10),
        instruction_mode=InstructionMode(header.get("instruction_mode", "PerSegment")),
        ticks=ticks,
        distance_driven_m=footer["distance_driven_m"],
        offroad_distance_m=footer.get("offroad_distance_m", 0.0),
        completion=footer["completion"],
    )
    if footer.get("termination"):
        log.finish(Termination(footer["termination"]))
    return log


def vehicle_controller_config(config: SimConfig):
    """Controller settings with the vehicle constants taken from the world."""
    world = config.world
    return replace(config.controller, wheelbase=world.wheelbase, delta_max=world.delta_max,
                   a_max=world.a_max, c_drag=world.c_drag)


def episode_instructions(route: Route, mode: InstructionMode,
                         lead_m: float) -> Tuple[Instruction, ...]:
    if mode is InstructionMode.LONG_HORIZON_AT_START:
        return (route_long_horizon(route, lead_m),)
    return segment_instructions(route, lead_m)


def run_episode(
    route: Route,
    scenario: Optional[Scenario] = None,
    planner=None,
    controller=None,
    config: SimConfig = SimConfig(),
    seed: int = 0,
    instruction_mode: InstructionMode = InstructionMode.PER_SEGMENT,
    perturbation: Optional[Perturbation] = None,
    suite: str = "",
) -> EpisodeLog:
    """
    Drive one route closed-loop until it terminates.

    Raises:
        ConfigError: planner cadence < 1 or dt <= 0
    """
    validate_config(config)
    world_cfg = config.world
    planner = planner or get_planner("reference", config.planner)
    controller = controller or get_controller("reference", vehicle_controller_config(config))
    controller.reset()

    scenario = scenario or Scenario(route.route_id)
    state = initial_state(route, scenario.actors, scenario.signals, scenario.props,
                          rng_seed=seed, config=world_cfg)

    dt = world_cfg.dt
    cadence = config.benchmark.planner_cadence
    lead = config.benchmark.segment_lead_m
    instructions = episode_instructions(route, instruction_mode, lead)
    if instruction_mode is InstructionMode.LONG_HORIZON_AT_START:
        boundaries = instructions[0].segment_starts_m
    else:
        boundaries = tuple(inst.start_m or 0.0 for inst in instructions)

    timeout_s = route.length_m / (config.benchmark.timeout_speed_fraction * world_cfg.v_max)
    max_ticks = int(math.ceil(timeout_s / dt))

    log = EpisodeLog(
        route=route, config_hash=config_hash(config), suite=suite, seed=seed,
        planner=getattr(planner, "name", type(planner).__name__),
        controller=getattr(controller, "name", type(controller).__name__),
        dt=dt, planner_cadence=cadence, instruction_mode=instruction_mode,
    )
    logger.info("episode %s: %.1f m, %d instruction(s), timeout %.1f s",
                route.route_id, route.length_m, len(instructions), timeout_s)

    current = instructions[0]
    command = None
    next_boundary = 0
    kicked = perturbation is None
    kick_s = None if kicked else perturbation.trigger_s(route)

    while True:
        dispatched, crossed = None, []
        while next_boundary < len(boundaries) and state.progress_s >= boundaries[next_boundary]:
            crossed.append(next_boundary)
            if instruction_mode is InstructionMode.PER_SEGMENT:
                current = instructions[next_boundary]
                dispatched = current.text
            elif next_boundary == 0:
                dispatched = current.text
            next_boundary += 1

        frame = observe(state, current)
        decision = state.tick % cadence == 0
        if decision:
            command = planner.plan(frame, current)
        wp = controller.waypoints(frame, current, command)
        control = controller.track(state.ego, wp, dt)

        nxt = step(state, control, dt)
        if not kicked and nxt.progress_s >= kick_s:
            nxt = replace(nxt, ego=replace(nxt.ego, heading=wrap_angle(
                nxt.ego.heading + perturbation.delta_rad)))
            kicked = True
            logger.debug("%s: heading perturbed by %.2f rad at tick %d",
                         route.route_id, perturbation.delta_rad, nxt.tick)

        events = detect_infractions(state, nxt)
        moved = math.hypot(nxt.ego.x - state.ego.x, nxt.ego.y - state.ego.y)
        offset = route.project(nxt.ego.position, nxt.progress_s,
                               world_cfg.projection_back_m, world_cfg.projection_ahead_m).offset
        log.distance_driven_m += moved
        if abs(offset) > world_cfg.road_half_width:
            log.offroad_distance_m += moved

        log.ticks.append(TickRecord(
            tick=state.tick, time_s=state.time_s,
            x=state.ego.x, y=state.ego.y, heading=state.ego.heading, speed=state.ego.speed,
            progress_s=state.progress_s, lateral_offset_m=frame.lateral_offset_m,
            frame=frame, command=render_command(command), decision=decision,
            waypoints=wp, control=control, infractions=tuple(events),
            instruction=dispatched, segments=tuple(crossed),
        ))
        state = nxt
        log.completion = min(state.progress_s / route.length_m, 1.0)

        kinds = {e.kind for e in events}
        if log.completion >= config.benchmark.completion_threshold:
            log.finish(Termination.COMPLETED)
        elif InfractionKind.ROUTE_DEVIATION in kinds:
            log.finish(Termination.DEVIATED)
        elif InfractionKind.BLOCKED in kinds:
            log.finish(Termination.BLOCKED)
        elif state.tick >= max_ticks:
            log.finish(Termination.TIMEOUT)
        if log.termination is not None:
            break

    logger.info("episode %s: %s after %d ticks, %.1f m driven, %d infraction(s)",
                route.route_id, log.termination.value, len(log.ticks),
                log.distance_driven_m, len(log.events))
    return log


@dataclass(frozen=True)
class EpisodeJob:
    ref: RouteRef
    suite: str
    town_seed: int
    instruction_mode: InstructionMode
    config: SimConfig
    planner: str
    controller: str
    seed: int
    replay: Tuple[Waypoints, ...] = ()


def run_job(job: EpisodeJob) -> EpisodeLog:
    town = generate_town(job.ref.town_id, job.town_seed)
    planner = get_planner(job.planner, job.config.planner)
    kwargs = {"recorded": job.replay} if job.controller == "replay" else {}
    controller = get_controller(job.controller, vehicle_controller_config(job.config), **kwargs)
    return run_episode(
        town.route(job.ref.route_id), town.scenario(job.ref.route_id),
        planner, controller, job.config, seed=job.seed,
        instruction_mode=job.instruction_mode, perturbation=job.ref.perturbation,
        suite=job.suite,
    )


def suite_jobs(suite: SuiteSpec, config: SimConfig, planner: str = "reference",
               controller: str = "reference", seed: Optional[int] = None,
               replay: Optional[Dict[str, Sequence[Waypoints]]] = None) -> List[EpisodeJob]:
    town_seed = suite.town_seed if seed is None else seed
    replay = replay or {}
    return [
        EpisodeJob(ref=ref, suite=suite.name, town_seed=town_seed,
                   instruction_mode=suite.instruction_mode, config=config,
                   planner=planner, controller=controller, seed=town_seed,
                   replay=tuple(replay.get(ref.route_id, ())))
        for ref in suite.routes
    ]


def run_suite(
    suite: SuiteSpec,
    config: SimConfig = SimConfig(),
    planner: str = "reference",
    controller: str = "reference",
    seed: Optional[int] = None,
    workers: Optional[int] = None,
    replay: Optional[Dict[str, Sequence[Waypoints]]] = None,
) -> List[EpisodeLog]:
    """
    Run every route of a suite; results are sorted by route id.

    workers=1 runs inline; more uses a process pool.
    """
    validate_config(config)
    get_planner(planner, config.planner)
    get_controller(controller, config.controller)

    jobs = suite_jobs(suite, config, planner, controller, seed, replay)
    for job in jobs:
        try:
            generate_town(job.ref.town_id, job.town_seed).route(job.ref.route_id)
        except KeyError as e:
            raise ConfigError(f"suite '{suite.name}': {e.args[0]}") from e
    workers = workers or config.benchmark.workers
    logger.info("suite %s: %d routes, %d worker(s)", suite.name, len(jobs), workers)

    if workers <= 1:
        logs = [run_job(job) for job in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            logs = list(pool.map(run_job, jobs))

    return sorted(logs, key=lambda log: log.route_id)


def write_suite_logs(logs: Iterable[EpisodeLog], out_dir: Union[str, Path]) -> List[Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = []
    for log in logs:
        path = out_dir / f"{log.route_id}.jsonl"
        write_episode_log(log, path)
        paths.append(path)
    return paths
