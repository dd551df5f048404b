import shutil
from pathlib import Path

import pytest

from assembly.assembly_models import AssemblyClass, Insertion
from assembly.errors import GoalError
from assembly.goal_io import (
    load_catalog,
    load_goal,
    parse_goal,
    parse_layout,
    serialize_goal,
    serialize_layout,
)

ROOT = Path(__file__).resolve().parent.parent
GOLDEN = Path(__file__).resolve().parent / "goldens" / "easy-1.xml"

catalog = load_catalog(ROOT / "catalog")


def test_catalog_has_three_goals_per_class():
    for assembly_class in AssemblyClass:
        goals = catalog.goals_of(assembly_class)
        assert [g.goal_id for g in goals] == [f"{assembly_class.value}-{n}" for n in (1, 2, 3)]


def test_peg_counts_match_the_classes():
    for goal in catalog.goals_of(AssemblyClass.EASY):
        assert 3 <= len(goal.peg_connections) <= 4
    for goal in catalog.goals_of(AssemblyClass.MEDIUM):
        assert 4 <= len(goal.peg_connections) <= 8


def test_hard_goals_need_special_insertions():
    for goal in catalog.goals_of(AssemblyClass.HARD):
        assert any(c.insertion != Insertion.STANDARD for c in goal.connections)


def test_golden_goal_serializes_to_itself():
    data = GOLDEN.read_bytes()
    goal = parse_goal(data, list(catalog.beams))
    assert serialize_goal(goal) == data


def test_serialization_ignores_document_order():
    goal = catalog.goal("easy-3")
    shuffled = goal.model_copy(
        update={"beams": goal.beams[::-1], "connections": goal.connections[::-1]}
    )
    assert serialize_goal(shuffled) == serialize_goal(goal)


def test_layout_round_trip_is_canonical():
    data = (ROOT / "catalog" / "layout.xml").read_bytes()
    layout = parse_layout(data)
    assert serialize_layout(layout) == serialize_layout(parse_layout(serialize_layout(layout)))
    assert layout.peg_ids[0] == "p1"
    assert layout.peg_slot("p2") == "h2"


def test_malformed_xml_reports_position():
    with pytest.raises(GoalError) as error:
        parse_goal(b"<assembly id='x' class='easy'>\n<beam>\n</assembly>")
    assert error.value.code == "PARSE_ERROR"
    assert error.value.context["line"] >= 2


def test_unknown_element_is_a_schema_error():
    data = GOLDEN.read_bytes().replace(b"</assembly>", b"<extra/>\n</assembly>")
    with pytest.raises(GoalError) as error:
        parse_goal(data)
    assert error.value.code == "SCHEMA_ERROR"


def test_semantic_errors_are_itemised():
    data = GOLDEN.read_bytes().replace(
        b'beam_b="b7" joint_b="0"', b'beam_b="b7" joint_b="1"'
    ).replace(b'beam_a="b1" joint_a="1"', b'beam_a="b7" joint_a="1"')
    with pytest.raises(GoalError) as error:
        parse_goal(data, list(catalog.beams))
    assert error.value.code == "SEMANTIC_ERROR"
    assert "JOINT_REUSED" in error.value.context["codes"]


def test_missing_goal_file():
    with pytest.raises(GoalError) as error:
        load_goal(ROOT / "catalog" / "goals" / "nope.xml")
    assert error.value.code == "MISSING_FILE"
    assert error.value.context["file"].endswith("nope.xml")


def test_catalog_missing_a_hard_goal(tmp_path):
    shutil.copytree(ROOT / "catalog", tmp_path / "catalog")
    (tmp_path / "catalog" / "goals" / "hard-2.xml").unlink()
    with pytest.raises(GoalError) as error:
        load_catalog(tmp_path / "catalog")
    assert error.value.code == "MISSING_FILE"
    assert "hard-2.xml" in error.value.message
    assert error.value.context["file"].endswith("hard-2.xml")
