from fastapi import APIRouter

from execution.simulator import replay
from execution.trace_io import parse_trace

from .plans import catalog_goal, workcell
from .request_models import ReplayRequest

router = APIRouter()


@router.post("/replay")
async def post_replay(request: ReplayRequest):
    catalog, _ = workcell()
    goal = catalog_goal(catalog, request.goal_id)
    trace = parse_trace(request.trace.encode("utf-8"))
    curve = replay(trace, goal, catalog.layout)
    return {"goal_id": goal.goal_id, "curve": [point.model_dump() for point in curve]}
