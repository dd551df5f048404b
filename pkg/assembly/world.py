import logging
from collections import defaultdict
from typing import Dict, Iterable, List

from .assembly_models import (
    CLASS_PEG_RANGE,
    MAX_PEGS,
    BeamPlacement,
    BeamSpec,
    BeamStatus,
    ConnectionStatus,
    EventKind,
    ExecutionEvent,
    GoalConfiguration,
    JointKind,
    LayoutTemplate,
    PegPlacement,
    PegStatus,
    SatisfactionReport,
    Skill,
    ValidationIssue,
    ValidationReport,
    WorldState,
)
from .errors import GoalError, IllegalEventError

logger = logging.getLogger(__name__)

HOME_POSE = "home_approach"
BEAM_SKILLS = (Skill.ASSEMBLE_SQUARE, Skill.ASSEMBLE_CAP)


def _kinds_compatible(a: JointKind, b: JointKind) -> bool:
    if (a == JointKind.CAP) != (b == JointKind.CAP):
        return True
    return {a, b} == {JointKind.SOCKET, JointKind.TAB}


def _connected(nodes: Iterable[str], edges: Iterable[tuple]) -> bool:
    nodes = set(nodes)
    if not nodes:
        return False
    adjacency: Dict[str, set] = defaultdict(set)
    for a, b in edges:
        adjacency[a].add(b)
        adjacency[b].add(a)
    start = min(nodes)
    seen = {start}
    stack = [start]
    while stack:
        for nxt in adjacency[stack.pop()]:
            if nxt not in seen:
                seen.add(nxt)
                stack.append(nxt)
    return seen >= nodes


def validate_goal(goal: GoalConfiguration, catalog: List[BeamSpec]) -> ValidationReport:
    """
    Check a goal against the beam catalog.

    Every violation is itemised with a stable code; an empty report means the
    goal is usable by the planner.
    """
    if not catalog:
        raise GoalError("EMPTY_CATALOG", "validate_goal needs a non-empty catalog")

    issues: List[ValidationIssue] = []

    def issue(code: str, message: str):
        issues.append(ValidationIssue(code=code, message=message))

    known = {beam.beam_id: beam for beam in catalog}
    for beam in goal.beams:
        if beam.beam_id not in known:
            issue("UNKNOWN_BEAM", f"beam {beam.beam_id!r} is not in the catalog")
        elif known[beam.beam_id] != beam:
            issue("BEAM_MISMATCH", f"beam {beam.beam_id!r} differs from the catalog")

    used = goal.beams_used
    fixed = [b.beam_id for b in goal.beams if known.get(b.beam_id, b).fixed]
    if not fixed:
        issue("NO_FIXED_BEAM", "no beam in the goal is fixed to the table")
    elif len(fixed) > 1:
        issue("MULTIPLE_FIXED_BEAMS", f"more than one fixed beam: {sorted(fixed)}")

    seen_joints = set()
    for connection in goal.connections:
        label = connection.key
        beam_a, beam_b = connection.beams
        if beam_a == beam_b:
            issue("SELF_CONNECTION", f"{label} joins a beam to itself")
        joints = []
        for beam_id, index in (connection.joint_a, connection.joint_b):
            if beam_id not in used:
                issue("UNKNOWN_BEAM", f"{label} references beam {beam_id!r}")
                continue
            joint = goal.beam(beam_id).joint(index)
            if joint is None:
                issue("UNKNOWN_JOINT", f"{label} references joint {beam_id}:{index}")
                continue
            if (beam_id, index) in seen_joints:
                issue("JOINT_REUSED", f"joint {beam_id}:{index} is used twice")
            seen_joints.add((beam_id, index))
            joints.append(joint)
        if len(joints) == 2:
            if not _kinds_compatible(joints[0].kind, joints[1].kind):
                issue(
                    "JOINT_KIND_MISMATCH",
                    f"{label} mates {joints[0].kind.value} with {joints[1].kind.value}",
                )
            if connection.requires_peg and not (joints[0].peg_hole and joints[1].peg_hole):
                issue("PEG_HOLE_MISSING", f"{label} needs a peg but lacks a peg hole")

    if not goal.connections or not _connected(
        used, (c.beams for c in goal.connections)
    ):
        issue("DISCONNECTED", "the connection graph does not join every beam")

    pegs = len(goal.peg_connections)
    low, high = CLASS_PEG_RANGE[goal.assembly_class]
    if pegs > MAX_PEGS:
        issue("TOO_MANY_PEGS", f"{pegs} peg connections, at most {MAX_PEGS}")
    elif not low <= pegs <= high:
        issue(
            "CLASS_RANGE",
            f"{goal.assembly_class.value} goals need {low}-{high} pegs, got {pegs}",
        )

    return ValidationReport(errors=issues)


def initial_world_state(goal: GoalConfiguration, layout: LayoutTemplate) -> WorldState:
    beam_at = {}
    for beam in goal.beams:
        if beam.fixed:
            beam_at[beam.beam_id] = BeamPlacement(status=BeamStatus.ASSEMBLED)
        else:
            beam_at[beam.beam_id] = BeamPlacement(
                status=BeamStatus.ON_TEMPLATE, slot=layout.slots.get(beam.beam_id)
            )
    peg_at = {
        peg_id: PegPlacement(status=PegStatus.IN_HOLDER, slot=layout.peg_slot(peg_id))
        for peg_id in layout.peg_ids
    }
    return WorldState(beam_at=beam_at, peg_at=peg_at, robot_loc=HOME_POSE)


def satisfaction(state: WorldState, goal: GoalConfiguration) -> SatisfactionReport:
    fastened = state.fastened()
    per_connection = {}
    for connection in goal.connections:
        if connection in fastened:
            status = ConnectionStatus.FASTENED
        elif connection in state.mated:
            status = ConnectionStatus.MATED_ONLY
        else:
            status = ConnectionStatus.UNSATISFIED
        per_connection[connection.key] = status

    required = goal.peg_connections
    done = sum(1 for c in required if c in fastened)
    pct = 100.0 * done / len(required) if required else 100.0
    return SatisfactionReport(per_connection=per_connection, completion_pct=pct)


def _require(condition: bool, message: str, event: ExecutionEvent):
    if not condition:
        raise IllegalEventError(message, event=event.model_dump(mode="json"))


def apply_event(state: WorldState, event: ExecutionEvent) -> WorldState:
    """Return the state after ``event``; the input state is left untouched."""
    beam_at = dict(state.beam_at)
    peg_at = dict(state.peg_at)
    hand = state.hand
    robot_loc = state.robot_loc
    mated = state.mated
    subject = event.subject

    if event.kind == EventKind.SKILL_SUCCEEDED:
        skill = event.skill
        if skill == Skill.MOVE:
            _require(bool(event.args), "move needs a destination", event)
            robot_loc = event.args[-1]
        elif skill == Skill.PICK_UP:
            _require(hand is None, f"cannot pick up {subject}: hand holds {hand}", event)
            if subject in beam_at:
                _require(
                    beam_at[subject].status == BeamStatus.ON_TEMPLATE,
                    f"beam {subject} is not on the template",
                    event,
                )
                beam_at[subject] = beam_at[subject].model_copy(
                    update={"status": BeamStatus.IN_HAND}
                )
            else:
                _require(subject in peg_at, f"unknown thing {subject}", event)
                _require(
                    peg_at[subject].status == PegStatus.IN_HOLDER,
                    f"peg {subject} is not in its holder",
                    event,
                )
                peg_at[subject] = peg_at[subject].model_copy(
                    update={"status": PegStatus.IN_HAND}
                )
            hand = subject
        elif skill == Skill.PUT_DOWN:
            _require(hand == subject, f"cannot put down {subject}: not held", event)
            if subject in beam_at:
                beam_at[subject] = beam_at[subject].model_copy(
                    update={"status": BeamStatus.ON_TEMPLATE}
                )
            else:
                peg_at[subject] = peg_at[subject].model_copy(
                    update={"status": PegStatus.IN_HOLDER}
                )
            hand = None
        elif skill in BEAM_SKILLS:
            _require(
                hand == subject and subject in beam_at,
                f"cannot insert {subject}: not holding it",
                event,
            )
            for connection in event.connections:
                other = connection.other_beam(subject)
                _require(
                    subject in connection.beams
                    and beam_at.get(other, None) is not None
                    and beam_at[other].status == BeamStatus.ASSEMBLED,
                    f"{connection.key} does not join {subject} to the assembly",
                    event,
                )
            beam_at[subject] = BeamPlacement(status=BeamStatus.ASSEMBLED)
            mated = mated | frozenset(event.connections)
            hand = None
        elif skill == Skill.FASTEN:
            _require(hand == subject and subject in peg_at, "fasten without a peg", event)
            _require(len(event.connections) == 1, "fasten pins one connection", event)
            connection = event.connections[0]
            _require(connection in mated, f"{connection.key} is not mated", event)
            _require(
                connection not in state.fastened(),
                f"{connection.key} is already pinned",
                event,
            )
            peg_at[subject] = PegPlacement(
                status=PegStatus.INSERTED, connection=connection
            )
            hand = None
        elif skill == Skill.PUSH:
            _require(
                subject in beam_at and beam_at[subject].status == BeamStatus.ASSEMBLED,
                f"cannot push {subject}: not assembled",
                event,
            )
    elif event.kind == EventKind.PEG_DROPPED:
        _require(hand == subject and subject in peg_at, f"{subject} is not held", event)
        peg_at[subject] = PegPlacement(status=PegStatus.DROPPED)
        hand = None
    elif event.kind == EventKind.PEG_INSERTED:
        placement = peg_at.get(subject)
        _require(
            placement is not None
            and placement.status == PegStatus.INSERTED
            and placement.connection == event.connections[0],
            f"peg {subject} was not inserted into {event.connections[0].key}",
            event,
        )

    return WorldState(
        beam_at=beam_at,
        peg_at=peg_at,
        robot_loc=robot_loc,
        hand=hand,
        mated=mated,
        step=state.step + 1,
    )
