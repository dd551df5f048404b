"""
Trace files are JSON lines: a header line, one line per event, and a closing
line with the final world state. Keys are sorted so equal traces are equal
bytes.
"""

from pathlib import Path
from typing import Union

import orjson
from pydantic import ValidationError

from assembly.assembly_models import ExecutionEvent, WorldState
from assembly.errors import SimulationError

from .sim_models import ExecutionTrace, TraceHeader


def _line(document: dict) -> bytes:
    return orjson.dumps(document, option=orjson.OPT_SORT_KEYS) + b"\n"


def _world_document(state: WorldState) -> dict:
    document = state.model_dump(mode="json")
    document["mated"] = sorted(
        document["mated"], key=lambda c: (tuple(c["joint_a"]), tuple(c["joint_b"]))
    )
    return document


def trace_bytes(trace: ExecutionTrace) -> bytes:
    lines = [_line({"header": trace.header.model_dump(mode="json")})]
    lines += [_line({"event": event.model_dump(mode="json")}) for event in trace.events]
    lines.append(_line({"final_state": _world_document(trace.final_state)}))
    return b"".join(lines)


def write_trace(trace: ExecutionTrace, path: Union[str, Path]):
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_bytes(trace_bytes(trace))
    except OSError as e:
        raise SimulationError("IO_ERROR", f"cannot write {path}: {e}", path=str(path)) from e


def parse_trace(data: bytes) -> ExecutionTrace:
    lines = [line for line in data.splitlines() if line.strip()]
    if len(lines) < 2:
        raise SimulationError("MALFORMED_TRACE", "a trace needs a header and a final state")
    try:
        documents = [orjson.loads(line) for line in lines]
    except orjson.JSONDecodeError as e:
        raise SimulationError("MALFORMED_TRACE", f"invalid JSON line: {e}") from e

    first, *middle, last = documents
    if not isinstance(first, dict) or "header" not in first:
        raise SimulationError("MALFORMED_TRACE", "first line must be the header")
    if not isinstance(last, dict) or "final_state" not in last:
        raise SimulationError("MALFORMED_TRACE", "last line must be the final state")
    try:
        header = TraceHeader.model_validate(first["header"])
        events = []
        for number, document in enumerate(middle, start=2):
            if not isinstance(document, dict) or "event" not in document:
                raise SimulationError("MALFORMED_TRACE", f"line {number} is not an event")
            events.append(ExecutionEvent.model_validate(document["event"]))
        final_state = WorldState.model_validate(last["final_state"])
    except ValidationError as e:
        raise SimulationError("MALFORMED_TRACE", f"invalid trace record: {e.errors()[0]['msg']}") from e
    return ExecutionTrace(header=header, events=tuple(events), final_state=final_state)


def read_trace(path: Union[str, Path]) -> ExecutionTrace:
    path = Path(path)
    try:
        data = path.read_bytes()
    except FileNotFoundError as e:
        raise SimulationError("MISSING_FILE", f"no trace at {path}", path=str(path)) from e
    except OSError as e:
        raise SimulationError("IO_ERROR", f"cannot read {path}: {e}", path=str(path)) from e
    try:
        return parse_trace(data)
    except SimulationError as e:
        raise SimulationError(e.code, f"{path.name}: {e.message}", path=str(path)) from e
