# action hierarchy: instructions, mid-level commands, waypoints, controls
from src.hierarchy.commands import (
    MidLevelCommand, PerceptionClause, SpeedClause, MotionClause,
    ParseError, OrderError,
    render_command, parse_command, enumerate_valid_commands, is_consistent,
)
from src.hierarchy.types import (
    Instruction, InstructionKind, Maneuver, Waypoints, ControlSignal,
    waypoints_from_legacy,
)
