import hashlib
import logging
import time
from pathlib import Path
from typing import Callable, Optional, Tuple

import orjson

from assembly.assembly_models import AssemblyCatalog, GoalConfiguration
from assembly.errors import GoalError, PlanningError
from assembly.world import validate_goal
from reasoning.bridge import abstract, describe_difference, ground_bridge, load_bridge
from reasoning.grounding import ground
from reasoning.language_models import BridgeMap, Resolution, SystemDescription
from reasoning.parser import load_description
from reasoning.semantics import close

from .instance import build_instance
from .planning_models import (
    Domains,
    FinePlan,
    FineSegment,
    PlanDocument,
    PlanningStats,
)
from .refinement import Refiner
from .search import plan_coarse

logger = logging.getLogger(__name__)

JSON_OPTIONS = orjson.OPT_SORT_KEYS | orjson.OPT_INDENT_2


def load_domains(directory: Path) -> Domains:
    directory = Path(directory)
    return Domains(
        coarse=load_description(directory / "coarse.ald", Resolution.COARSE),
        fine=load_description(directory / "fine.ald", Resolution.FINE),
        bridge=load_bridge(directory / "bridge.ald"),
    )


def plan(
    goal: GoalConfiguration,
    catalog: AssemblyCatalog,
    coarse: SystemDescription,
    fine: SystemDescription,
    bridge: BridgeMap,
    coarse_horizon: int = 40,
    fine_horizon: int = 10,
    clock: Callable[[], float] = time.perf_counter,
) -> Tuple[FinePlan, PlanningStats]:
    """
    Plan ``goal`` at the coarse resolution, then refine every coarse step into
    fine actions. The wall-clock time of the whole call is recorded in the
    returned stats.
    """
    started = clock()
    report = validate_goal(goal, list(catalog.beams))
    if not report.ok:
        raise GoalError(
            "SEMANTIC_ERROR",
            f"goal {goal.goal_id} is invalid: {', '.join(report.codes)}",
            codes=report.codes,
        )

    instance = build_instance(goal)
    coarse_domain = ground(
        coarse, instance.coarse_constants, instance.coarse_statics, allow_empty_sorts=True
    )
    fine_domain = ground(
        fine, instance.fine_constants, instance.fine_statics, allow_empty_sorts=True
    )
    grounded_bridge = ground_bridge(bridge, coarse_domain, fine_domain, instance.bridge_statics)

    coarse_plan = plan_coarse(coarse_domain, instance.history, instance.goal, coarse_horizon)
    logger.info(
        "Goal %s: coarse plan of horizon %d", goal.goal_id, coarse_plan.horizon
    )

    fine_init = close(fine_domain, instance.fine_init)
    coarse_init = abstract(grounded_bridge, fine_init)
    expected_init = coarse_plan.steps[0].pre if coarse_plan.steps else None
    if expected_init is not None and coarse_init != expected_init:
        raise PlanningError(
            "INVALID_INIT",
            f"fine initial state does not abstract to the coarse one: "
            f"{describe_difference(expected_init, coarse_init)}",
        )

    refiner = Refiner(fine, instance, fine_domain, grounded_bridge, fine_horizon)
    segments = []
    state = fine_init
    for index, step in enumerate(coarse_plan.steps, start=1):
        zoomed = refiner.zoom(step)
        actions, state = refiner.refine_transition(step, state, zoomed)
        segments.append(
            FineSegment(
                coarse_index=index,
                actions=actions,
                end_state=state,
                zoomed_action_count=len(zoomed.ground_actions),
            )
        )

    fine_plan = FinePlan(
        goal_id=goal.goal_id,
        coarse=coarse_plan,
        segments=tuple(segments),
        fine_domain=fine_domain,
        initial_state=fine_init,
    )
    fastens = sum(1 for action in fine_plan.flattened if action[0] == "fasten")
    if fastens != len(goal.peg_connections):
        raise PlanningError(
            "REFINEMENT_FAILED",
            f"plan fastens {fastens} links, goal has {len(goal.peg_connections)}",
        )

    stats = PlanningStats(
        planning_time_s=clock() - started,
        nodes_expanded=coarse_plan.nodes_expanded + refiner.nodes_expanded,
        coarse_horizon=coarse_plan.horizon,
        fine_length=len(fine_plan.flattened),
    )
    logger.info(
        "Goal %s: %d fine actions in %.2fs", goal.goal_id, stats.fine_length, stats.planning_time_s
    )
    return fine_plan, stats


def plan_bytes(plan: FinePlan, stats: Optional[PlanningStats] = None) -> bytes:
    return orjson.dumps(PlanDocument.from_plan(plan, stats).model_dump(mode="json"), option=JSON_OPTIONS)


def plan_hash(plan: FinePlan) -> str:
    """SHA-256 of the plan's actions, independent of timing."""
    return hashlib.sha256(plan_bytes(plan)).hexdigest()


def write_plan(plan: FinePlan, stats: PlanningStats, path: Path):
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_bytes(plan_bytes(plan, stats) + b"\n")
    except OSError as e:
        raise PlanningError("IO_ERROR", f"cannot write {path}: {e}", path=str(path)) from e
