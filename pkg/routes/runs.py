import asyncio
from pathlib import Path

from fastapi import APIRouter

from bench.bench_models import BenchmarkReport
from bench.protocol import run_protocol
from execution.config import load_config, loads_config
from settings import get_settings

from .plans import workcell
from .results import under_results_root
from .request_models import RunRequest

router = APIRouter()

DEFAULT_CONFIG = Path(__file__).resolve().parent.parent / "configs" / "baseline_emulation.toml"


@router.post("/run")
async def post_run(request: RunRequest) -> BenchmarkReport:
    catalog, domains = workcell()
    if request.config_toml is not None:
        config = loads_config(request.config_toml)
    else:
        config = load_config(DEFAULT_CONFIG)
    if request.seed is not None:
        config = config.with_seed(request.seed)

    settings = get_settings()
    # the protocol is CPU bound; keep the event loop free while it runs
    return await asyncio.to_thread(
        run_protocol,
        request.assembly_class,
        catalog,
        domains,
        config,
        under_results_root(request.out_dir),
        grid_dt_s=settings.grid_dt_s,
        coarse_horizon=settings.coarse_horizon,
        fine_horizon=settings.fine_horizon,
        parallel_goals=request.parallel_goals,
    )
