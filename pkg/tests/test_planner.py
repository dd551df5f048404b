from pathlib import Path

import pytest

from assembly.assembly_models import AssemblyClass, Connection, GoalConfiguration
from assembly.errors import PlanningError
from planning.instance import build_instance, joint_id
from planning.planner import plan, plan_bytes, plan_hash
from planning.refinement import Refiner
from planning.search import bfs_oracle, initial_state, plan_coarse
from reasoning.bridge import abstract, ground_bridge
from reasoning.grounding import ground
from reasoning.language_models import Resolution
from reasoning.parser import parse_description

ROOT = Path(__file__).resolve().parent.parent


def toy_goal(catalog, goal_id, beams, connections):
    known = {beam.beam_id: beam for beam in catalog.beams}
    return GoalConfiguration(
        goal_id=goal_id,
        assembly_class=AssemblyClass.HARD,
        beams=tuple(known[b] for b in beams),
        connections=tuple(
            Connection(joint_a=a, joint_b=b, requires_peg=peg) for a, b, peg in connections
        ),
    )


TOYS = {
    "one-beam-one-peg": (["b0", "b1"], [(("b0", 0), ("b1", 0), True)]),
    "one-beam-no-peg": (["b0", "b1"], [(("b0", 0), ("b1", 0), False)]),
    "two-beams-one-peg": (
        ["b0", "b1", "b7"],
        [(("b0", 0), ("b1", 0), True), (("b0", 2), ("b7", 0), False)],
    ),
    "chain-two-pegs": (
        ["b0", "b1", "b4"],
        [(("b0", 0), ("b1", 0), True), (("b1", 1), ("b4", 0), True)],
    ),
    "fan-two-pegs": (
        ["b0", "b1", "b7"],
        [(("b0", 0), ("b1", 0), True), (("b0", 2), ("b7", 0), True)],
    ),
    "cap-one-peg": (["b0", "b3"], [(("b0", 0), ("b3", 0), True)]),
}


def coarse_problem(goal, domains):
    instance = build_instance(goal)
    domain = ground(
        domains.coarse, instance.coarse_constants, instance.coarse_statics, allow_empty_sorts=True
    )
    return instance, domain


@pytest.mark.parametrize("name", sorted(TOYS))
def test_shortest_plan_matches_exhaustive_search(name, catalog, domains):
    beams, connections = TOYS[name]
    instance, domain = coarse_problem(toy_goal(catalog, name, beams, connections), domains)
    coarse = plan_coarse(domain, instance.history, instance.goal)
    oracle = bfs_oracle(domain, initial_state(domain, instance.history), instance.goal)
    assert coarse.horizon == oracle


def test_one_beam_one_peg_takes_eight_steps(catalog, domains):
    beams, connections = TOYS["one-beam-one-peg"]
    instance, domain = coarse_problem(toy_goal(catalog, "toy", beams, connections), domains)
    coarse = plan_coarse(domain, instance.history, instance.goal)
    assert [a[0] for a in coarse.actions] == [
        "move", "pick_up", "move", "assemble", "move", "pick_up", "move", "fasten",
    ]


def test_cap_is_pushed_before_fastening(catalog, domains):
    beams, connections = TOYS["cap-one-peg"]
    instance, domain = coarse_problem(toy_goal(catalog, "toy", beams, connections), domains)
    names = [a[0] for a in plan_coarse(domain, instance.history, instance.goal).actions]
    assert names.index("push") == names.index("assemble") + 1
    assert names.index("fasten") > names.index("push")


def test_horizon_too_short(catalog, domains):
    beams, connections = TOYS["one-beam-one-peg"]
    instance, domain = coarse_problem(toy_goal(catalog, "toy", beams, connections), domains)
    with pytest.raises(PlanningError) as error:
        plan_coarse(domain, instance.history, instance.goal, max_horizon=5)
    assert error.value.code == "NO_PLAN"
    assert error.value.context["horizon"] == 5


def test_negative_horizon(catalog, domains):
    beams, connections = TOYS["one-beam-one-peg"]
    instance, domain = coarse_problem(toy_goal(catalog, "toy", beams, connections), domains)
    with pytest.raises(PlanningError) as error:
        plan_coarse(domain, instance.history, instance.goal, max_horizon=-1)
    assert error.value.code == "INVALID_HORIZON"


def test_goal_already_true(catalog, domains):
    beams, connections = TOYS["one-beam-no-peg"]
    instance, domain = coarse_problem(toy_goal(catalog, "toy", beams, connections), domains)
    done = [literal for literal in instance.goal if literal[0][0] == "needs_push"]
    assert plan_coarse(domain, instance.history, done).horizon == 0


def test_special_insertion_has_no_plan(catalog, domains):
    goal = catalog.goal("hard-1")
    with pytest.raises(PlanningError) as error:
        plan(goal, catalog, domains.coarse, domains.fine, domains.bridge)
    assert error.value.code == "NO_PLAN"
    assert error.value.context["horizon"] == 40


def test_easy_goals_plan(easy_plans, catalog):
    assert set(easy_plans) == {"easy-1", "easy-2", "easy-3"}
    for goal_id, (fine_plan, stats) in easy_plans.items():
        goal = catalog.goal(goal_id)
        fastens = [a for a in fine_plan.flattened if a[0] == "fasten"]
        assert 3 <= len(fastens) <= 4
        assert len(fastens) == len(goal.peg_connections)
        assert stats.fine_length == len(fine_plan.flattened)
        assert stats.coarse_horizon == fine_plan.coarse.horizon


def test_easy_1_takes_four_steps_per_object(easy_plans):
    fine_plan, _ = easy_plans["easy-1"]
    # three beams and three pegs: fetch, pick up, carry, act
    assert fine_plan.coarse.horizon == 24


def test_every_peg_connection_is_pinned(easy_plans, catalog):
    for goal_id, (fine_plan, _) in easy_plans.items():
        goal = catalog.goal(goal_id)
        pinned = {frozenset(a[2:4]) for a in fine_plan.flattened if a[0] == "fasten"}
        expected = {
            frozenset((joint_id(*c.joint_a), joint_id(*c.joint_b))) for c in goal.peg_connections
        }
        assert pinned == expected


def test_segments_refine_their_coarse_steps(easy_plans, catalog, domains):
    for goal_id, (fine_plan, _) in easy_plans.items():
        instance, coarse = coarse_problem(catalog.goal(goal_id), domains)
        bridge = ground_bridge(
            domains.bridge, coarse, fine_plan.fine_domain, instance.bridge_statics
        )
        assert len(fine_plan.segments) == len(fine_plan.coarse.steps)
        for segment, step in zip(fine_plan.segments, fine_plan.coarse.steps):
            assert segment.actions
            assert abstract(bridge, segment.end_state).true == step.post.true


def test_capping_is_followed_by_push(easy_plans):
    fine_plan, _ = easy_plans["easy-3"]
    skills = [a[0] for a in fine_plan.flattened if a[0] != "move"]
    cap = skills.index("assemble_cap")
    assert skills[cap + 1] == "push"
    insertions = [s for s in skills if s.startswith("assemble")]
    assert insertions[-1] == "assemble_cap"


def test_zoomed_domains_are_smaller(easy_plans, catalog, domains):
    fine_plan, _ = easy_plans["easy-1"]
    full = len(fine_plan.fine_domain.ground_actions)
    assert all(segment.zoomed_action_count < full for segment in fine_plan.segments)


@pytest.mark.parametrize("goal_id", ["easy-1", "easy-2", "easy-3"])
def test_zooming_loses_no_refinement(goal_id, easy_plans, catalog, domains):
    fine_plan, _ = easy_plans[goal_id]
    instance, coarse = coarse_problem(catalog.goal(goal_id), domains)
    bridge = ground_bridge(domains.bridge, coarse, fine_plan.fine_domain, instance.bridge_statics)
    refiner = Refiner(domains.fine, instance, fine_plan.fine_domain, bridge)

    state = fine_plan.initial_state
    for segment, step in zip(fine_plan.segments, fine_plan.coarse.steps):
        zoomed_actions, zoomed_end = refiner.refine_transition(step, state, refiner.zoom(step))
        full_actions, full_end = refiner.refine_transition(step, state, fine_plan.fine_domain)
        assert zoomed_actions == segment.actions
        assert len(zoomed_actions) == len(full_actions)
        assert abstract(bridge, zoomed_end) == abstract(bridge, full_end)
        state = zoomed_end


def test_refinement_fails_without_fasten_effects(catalog, domains):
    text = (ROOT / "domains" / "fine.ald").read_text()
    crippled = "\n".join(
        line
        for line in text.splitlines()
        if not (line.strip().startswith("fasten(") and " causes " in line)
    )
    fine = parse_description(crippled, Resolution.FINE)
    with pytest.raises(PlanningError) as error:
        plan(catalog.goal("easy-1"), catalog, domains.coarse, fine, domains.bridge)
    assert error.value.code == "REFINEMENT_FAILED"


def test_planning_is_deterministic(easy_plans, catalog, domains):
    fine_plan, _ = easy_plans["easy-1"]
    again, _ = plan(catalog.goal("easy-1"), catalog, domains.coarse, domains.fine, domains.bridge)
    assert again.flattened == fine_plan.flattened
    assert plan_hash(again) == plan_hash(fine_plan)
    assert plan_bytes(again) == plan_bytes(fine_plan)


def test_refiner_zoom_keeps_held_objects(easy_plans, catalog, domains):
    fine_plan, _ = easy_plans["easy-1"]
    goal = catalog.goal("easy-1")
    instance = build_instance(goal)
    refiner = Refiner(domains.fine, instance, fine_plan.fine_domain, None)
    carry = next(
        step
        for step in fine_plan.coarse.steps
        if step.action[0] == "move" and any(a[0] == "in_hand" for a in step.pre.true)
    )
    held = next(a[2] for a in carry.pre.true if a[0] == "in_hand")
    kept = refiner.relevant_constants(carry)
    assert held in kept
    assert "rob" in kept
