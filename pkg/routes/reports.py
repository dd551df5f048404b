from fastapi import APIRouter

from bench.report import load_report, recompute_summary, summaries_agree

from .results import under_results_root

router = APIRouter()


@router.get("/report")
async def get_report(directory: str):
    path = under_results_root(directory)
    stored = load_report(path).summary
    recomputed = recompute_summary(path)
    return {
        "report": stored.model_dump(),
        "traces": recomputed.model_dump(),
        "agree": summaries_agree(stored, recomputed),
    }
