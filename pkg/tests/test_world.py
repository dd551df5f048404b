from pathlib import Path

import numpy as np
import pytest

from assembly.assembly_models import (
    AssemblyClass,
    BeamStatus,
    Connection,
    ConnectionStatus,
    EventKind,
    ExecutionEvent,
    PegPlacement,
    PegStatus,
    Skill,
)
from assembly.errors import GoalError, IllegalEventError
from assembly.goal_io import load_catalog
from assembly.world import apply_event, initial_world_state, satisfaction, validate_goal

ROOT = Path(__file__).resolve().parent.parent
catalog = load_catalog(ROOT / "catalog")
easy_1 = catalog.goal("easy-1")


def succeeded(skill, subject=None, args=(), connections=()):
    return ExecutionEvent(
        t_s=0.0,
        kind=EventKind.SKILL_SUCCEEDED,
        skill=skill,
        subject=subject,
        args=args,
        connections=connections,
    )


def connection(key):
    return next(c for c in easy_1.connections if c.key == key)


def test_catalog_goals_are_valid():
    for goal in catalog.goals:
        report = validate_goal(goal, list(catalog.beams))
        assert report.ok, (goal.goal_id, report.codes)


def test_empty_catalog_is_an_error():
    with pytest.raises(GoalError) as error:
        validate_goal(easy_1, [])
    assert error.value.code == "EMPTY_CATALOG"


def test_validation_itemises_every_violation():
    b1 = easy_1.beam("b1")
    broken = easy_1.model_copy(
        update={
            "connections": easy_1.connections
            + (
                Connection(joint_a=("b1", 0), joint_b=("b4", 0)),
                Connection(joint_a=("b1", 2), joint_b=("b1", 9)),
            )
        }
    )
    codes = validate_goal(broken, list(catalog.beams)).codes
    assert "JOINT_REUSED" in codes
    assert "JOINT_KIND_MISMATCH" in codes
    assert "SELF_CONNECTION" in codes
    assert "UNKNOWN_JOINT" in codes
    assert b1.joint(9) is None


def test_connections_are_normalised():
    c = Connection(joint_a=("b7", 0), joint_b=("b0", 2))
    assert c.joint_a == ("b0", 2)
    assert c.key == "b0:2-b7:0"
    assert c.other_beam("b0") == "b7"


def test_initial_world_state():
    state = initial_world_state(easy_1, catalog.layout)
    assert state.beam_at["b0"].status == BeamStatus.ASSEMBLED
    assert state.beam_at["b1"].status == BeamStatus.ON_TEMPLATE
    assert state.beam_at["b1"].slot == "s1"
    assert state.peg_at["p1"].status == PegStatus.IN_HOLDER
    assert state.robot_loc == "home_approach"
    assert state.hand is None
    assert satisfaction(state, easy_1).completion_pct == 0.0


def test_insert_and_fasten_one_connection():
    first = connection("b0:0-b1:0")
    state = initial_world_state(easy_1, catalog.layout)
    state = apply_event(state, succeeded(Skill.PICK_UP, "b1"))
    assert state.hand == "b1"
    state = apply_event(state, succeeded(Skill.ASSEMBLE_SQUARE, "b1", connections=(first,)))
    assert state.beam_at["b1"].status == BeamStatus.ASSEMBLED
    assert satisfaction(state, easy_1).per_connection[first.key] == ConnectionStatus.MATED_ONLY

    state = apply_event(state, succeeded(Skill.PICK_UP, "p1"))
    state = apply_event(state, succeeded(Skill.FASTEN, "p1", connections=(first,)))
    state = apply_event(
        state, ExecutionEvent(t_s=1.0, kind=EventKind.PEG_INSERTED, subject="p1", connections=(first,))
    )
    report = satisfaction(state, easy_1)
    assert report.per_connection[first.key] == ConnectionStatus.FASTENED
    assert report.completion_pct == pytest.approx(100 / 3)
    assert state.hand is None


def test_apply_event_leaves_input_untouched():
    state = initial_world_state(easy_1, catalog.layout)
    after = apply_event(state, succeeded(Skill.MOVE, args=("rob", "near_template_approach")))
    assert state.robot_loc == "home_approach"
    assert after.robot_loc == "near_template_approach"
    assert after.step == state.step + 1


def test_fasten_requires_a_mated_connection():
    state = initial_world_state(easy_1, catalog.layout)
    state = apply_event(state, succeeded(Skill.PICK_UP, "p1"))
    with pytest.raises(IllegalEventError) as error:
        apply_event(state, succeeded(Skill.FASTEN, "p1", connections=(connection("b0:0-b1:0"),)))
    assert error.value.code == "ILLEGAL_EVENT"


def test_cannot_pick_up_with_full_hand():
    state = initial_world_state(easy_1, catalog.layout)
    state = apply_event(state, succeeded(Skill.PICK_UP, "b1"))
    with pytest.raises(IllegalEventError):
        apply_event(state, succeeded(Skill.PICK_UP, "p1"))


def test_dropped_peg_empties_the_hand():
    state = initial_world_state(easy_1, catalog.layout)
    state = apply_event(state, succeeded(Skill.PICK_UP, "p1"))
    state = apply_event(state, ExecutionEvent(t_s=0.0, kind=EventKind.PEG_DROPPED, subject="p1"))
    assert state.hand is None
    assert state.peg_at["p1"].status == PegStatus.DROPPED


def test_class_peg_range_and_unknown_beams():
    as_medium = easy_1.model_copy(update={"assembly_class": AssemblyClass.MEDIUM})
    assert validate_goal(as_medium, list(catalog.beams)).codes == ["CLASS_RANGE"]
    without_b7 = [b for b in catalog.beams if b.beam_id != "b7"]
    assert "UNKNOWN_BEAM" in validate_goal(easy_1, without_b7).codes


def test_half_fastened_goal_is_half_complete():
    goal = catalog.goal("easy-3")
    state = initial_world_state(goal, catalog.layout)
    pinned = goal.peg_connections[:2]
    peg_at = dict(state.peg_at)
    for peg, c in zip(("p1", "p2"), pinned):
        peg_at[peg] = PegPlacement(status=PegStatus.INSERTED, connection=c)
    state = state.model_copy(update={"peg_at": peg_at, "mated": frozenset(goal.connections)})
    report = satisfaction(state, goal)
    assert report.completion_pct == 50.0
    assert sorted(report.per_connection.values()).count(ConnectionStatus.FASTENED) == 2


def legal_events(state, goal):
    """Every event the world accepts next, each as the list it is emitted in."""
    events = [
        [ExecutionEvent(t_s=0.0, kind=EventKind.SKILL_STARTED, skill=Skill.MOVE)],
        [ExecutionEvent(t_s=0.0, kind=EventKind.SKILL_FAILED, skill=Skill.PICK_UP)],
    ]
    for slot in sorted(catalog.layout.slots.values()):
        events.append([succeeded(Skill.MOVE, args=("home_approach", slot))])
    assembled = {b for b, p in state.beam_at.items() if p.status == BeamStatus.ASSEMBLED}
    for beam_id in sorted(assembled):
        events.append([succeeded(Skill.PUSH, subject=beam_id)])

    hand = state.hand
    if hand is None:
        for beam_id, placement in sorted(state.beam_at.items()):
            if placement.status == BeamStatus.ON_TEMPLATE:
                events.append([succeeded(Skill.PICK_UP, subject=beam_id)])
        for peg_id, placement in sorted(state.peg_at.items()):
            if placement.status == PegStatus.IN_HOLDER:
                events.append([succeeded(Skill.PICK_UP, subject=peg_id)])
        return events

    events.append([succeeded(Skill.PUT_DOWN, subject=hand)])
    if hand in state.beam_at:
        joining = tuple(
            c for c in goal.connections if hand in c.beams and c.other_beam(hand) in assembled
        )
        if joining:
            events.append([succeeded(Skill.ASSEMBLE_SQUARE, subject=hand, connections=joining)])
    else:
        events.append([ExecutionEvent(t_s=0.0, kind=EventKind.PEG_DROPPED, subject=hand)])
        for target in goal.peg_connections:
            if target in state.mated and target not in state.fastened():
                events.append(
                    [
                        succeeded(Skill.FASTEN, subject=hand, connections=(target,)),
                        ExecutionEvent(
                            t_s=0.0,
                            kind=EventKind.PEG_INSERTED,
                            subject=hand,
                            connections=(target,),
                        ),
                    ]
                )
    return events


@pytest.mark.parametrize("goal_id", [g.goal_id for g in catalog.goals])
@pytest.mark.parametrize("seed", range(25))
def test_random_legal_sequences_keep_the_world_consistent(goal_id, seed):
    goal = catalog.goal(goal_id)
    rng = np.random.default_rng(seed)
    state = initial_world_state(goal, catalog.layout)
    completion = satisfaction(state, goal).completion_pct
    for _ in range(80):
        options = legal_events(state, goal)
        for event in options[rng.integers(len(options))]:
            before = state.model_copy(deep=True)
            after = apply_event(state, event)
            assert state == before
            assert after.step == state.step + 1
            state = after

            held = [
                thing
                for thing, placement in {**state.beam_at, **state.peg_at}.items()
                if placement.status in (BeamStatus.IN_HAND, PegStatus.IN_HAND)
            ]
            assert held == ([state.hand] if state.hand is not None else [])
            assert state.fastened() <= state.mated
            now = satisfaction(state, goal).completion_pct
            assert now >= completion
            completion = now
