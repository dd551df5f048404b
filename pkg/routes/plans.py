from functools import lru_cache
from typing import Tuple

from fastapi import APIRouter
from fastapi.concurrency import run_in_threadpool

from assembly.assembly_models import AssemblyCatalog, GoalConfiguration
from assembly.errors import GoalError
from assembly.goal_io import load_catalog, parse_goal
from planning.planner import load_domains, plan
from planning.planning_models import Domains, PlanDocument
from settings import get_settings

from .request_models import PlanRequest

router = APIRouter()


@lru_cache
def workcell() -> Tuple[AssemblyCatalog, Domains]:
    settings = get_settings()
    return load_catalog(settings.catalog), load_domains(settings.domains)


def catalog_goal(catalog: AssemblyCatalog, goal_id: str) -> GoalConfiguration:
    goal = catalog.goal(goal_id)
    if goal is None:
        raise GoalError("UNKNOWN_GOAL", f"no goal {goal_id} in the catalog", goal_id=goal_id)
    return goal


@router.post("/plan")
async def post_plan(request: PlanRequest) -> PlanDocument:
    catalog, domains = workcell()
    if request.goal_xml is not None:
        goal = parse_goal(request.goal_xml.encode("utf-8"), list(catalog.beams))
    elif request.goal_id is not None:
        goal = catalog_goal(catalog, request.goal_id)
    else:
        raise GoalError("MISSING_GOAL", "give goal_id or goal_xml")

    settings = get_settings()
    fine_plan, stats = await run_in_threadpool(
        plan,
        goal,
        catalog,
        domains.coarse,
        domains.fine,
        domains.bridge,
        coarse_horizon=settings.coarse_horizon,
        fine_horizon=settings.fine_horizon,
    )
    return PlanDocument.from_plan(fine_plan, stats)
