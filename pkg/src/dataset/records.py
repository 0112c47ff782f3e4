"""
Hierarchy Records
-------------------
One annotated frame: instruction, mid-level command, ground-truth
waypoints and the telemetry it was labeled from. Stored as JSONL, one
record per line after an optional header line.
"""

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, List, Optional, Union

from src.hierarchy.commands import OrderError, ParseError, parse_command
from src.hierarchy.types import Waypoints
from src.planning.telemetry import TelemetryFrame


RECORD_SCHEMA = "hierarchy-record/1"


class SchemaError(ValueError):
    """Malformed record file; carries the offending line number."""

    def __init__(self, path, lineno: int, message: str):
        self.path = str(path)
        self.lineno = lineno
        super().__init__(f"{path}:{lineno}: {message}")


@dataclass(frozen=True)
class HierarchyRecord:
    frame_id: int
    instruction: str
    command: str
    waypoints: Waypoints
    telemetry: TelemetryFrame

    def to_dict(self) -> dict:
        return {
            "frame_id": self.frame_id,
            "instruction": self.instruction,
            "command": self.command,
            "waypoints": self.waypoints.to_list(),
            "telemetry": self.telemetry.to_dict(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "HierarchyRecord":
        return cls(
            frame_id=int(data["frame_id"]),
            instruction=data["instruction"],
            command=data["command"],
            waypoints=Waypoints.from_list(data["waypoints"]),
            telemetry=TelemetryFrame.from_dict(data["telemetry"]),
        )


def write_records(records: Iterable[HierarchyRecord], path: Union[str, Path],
                  config_hash: Optional[str] = None):
    """Write records as JSONL with a schema header line."""
    header = {"schema": RECORD_SCHEMA, "config_hash": config_hash}
    with Path(path).open("w") as f:
        f.write(json.dumps(header) + "\n")
        for record in records:
            f.write(json.dumps(record.to_dict()) + "\n")


def read_records(path: Union[str, Path]) -> List[HierarchyRecord]:
    """
    Read a record file; the header line is optional.

    Raises:
        SchemaError: malformed JSON, missing fields or an unparsable command
    """
    path = Path(path)
    records = []
    with path.open() as f:
        for lineno, line in enumerate(f, start=1):
            if not line.strip():
                continue
            try:
                data = json.loads(line)
            except json.JSONDecodeError as e:
                raise SchemaError(path, lineno, f"invalid JSON ({e.msg})") from e
            if not isinstance(data, dict):
                raise SchemaError(path, lineno, "record must be an object")
            if "schema" in data:
                if data["schema"] != RECORD_SCHEMA:
                    raise SchemaError(path, lineno, f"unsupported schema {data['schema']!r}")
                continue
            try:
                parse_command(data["command"])
                records.append(HierarchyRecord.from_dict(data))
            except (ParseError, OrderError) as e:
                raise SchemaError(path, lineno, f"bad command: {e}") from e
            except KeyError as e:
                raise SchemaError(path, lineno, f"missing field {e}") from e
            except (TypeError, ValueError) as e:
                raise SchemaError(path, lineno, str(e)) from e
    return records
