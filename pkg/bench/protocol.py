import asyncio
import logging
import time
from pathlib import Path
from typing import List, Optional, Tuple

from tqdm import tqdm

from assembly.assembly_models import (
    AssemblyCatalog,
    AssemblyClass,
    EventKind,
    ExecutionEvent,
    GoalConfiguration,
)
from assembly.errors import HarnessError, PlanningError
from assembly.world import apply_event, initial_world_state
from execution.config import config_hash
from execution.sim_models import ExecutionTrace, SimConfig, TraceHeader
from execution.simulator import execute, final_completion, replay
from execution.trace_io import write_trace
from planning.planner import plan
from planning.planning_models import Domains

from .bench_models import TRIALS_PER_GOAL, BenchmarkReport, GoalResult, TrialResult
from .report import emit_report
from .stats import goal_result, summarize

logger = logging.getLogger(__name__)

GOALS_PER_CLASS = 3
UNPLANNED = "none"


def trial_seed(seed: int, goal_position: int, repeat_index: int) -> int:
    return seed + goal_position * TRIALS_PER_GOAL + repeat_index - 1


def trace_file(goal_id: str, repeat_index: int) -> str:
    return f"traces/{goal_id}-r{repeat_index}.jsonl"


def _unplanned_trace(
    goal: GoalConfiguration, catalog: AssemblyCatalog, config: SimConfig, planning_time_s: float
) -> ExecutionTrace:
    """A run that never starts: the clock stops when planning gives up."""
    ended = ExecutionEvent(t_s=planning_time_s, kind=EventKind.RUN_ENDED)
    return ExecutionTrace(
        header=TraceHeader(
            goal_id=goal.goal_id,
            seed=config.seed,
            config_hash=config_hash(config),
            plan_hash=UNPLANNED,
            peg_count=len(goal.peg_connections),
            planning_time_s=planning_time_s,
        ),
        events=(ended,),
        final_state=apply_event(initial_world_state(goal, catalog.layout), ended),
    )


class ProtocolRunner:
    """
    Runs the five-repeat protocol for the goals of one class with a single
    simulator config. Every trial plans from scratch.
    """

    def __init__(
        self,
        catalog: AssemblyCatalog,
        domains: Domains,
        config: SimConfig,
        out_dir: Path,
        grid_dt_s: float = 1.0,
        coarse_horizon: int = 40,
        fine_horizon: int = 10,
        progress: bool = False,
    ):
        self.catalog = catalog
        self.domains = domains
        self.config = config
        self.config_hash = config_hash(config)
        self.out_dir = Path(out_dir)
        self.grid_dt_s = grid_dt_s
        self.coarse_horizon = coarse_horizon
        self.fine_horizon = fine_horizon
        self.progress = progress

    def run_trial(
        self, goal: GoalConfiguration, position: int, repeat_index: int
    ) -> Tuple[TrialResult, Optional[str]]:
        config = self.config.with_seed(trial_seed(self.config.seed, position, repeat_index))
        started = time.perf_counter()
        error = None
        try:
            fine_plan, stats = plan(
                goal,
                self.catalog,
                self.domains.coarse,
                self.domains.fine,
                self.domains.bridge,
                coarse_horizon=self.coarse_horizon,
                fine_horizon=self.fine_horizon,
            )
        except PlanningError as e:
            if e.code != "NO_PLAN":
                raise
            error = e.code
            logger.warning("Goal %s has no plan: %s", goal.goal_id, e.message)
            measured = time.perf_counter() - started
            planning_time = config.planning_time_override_s or measured
            trace = _unplanned_trace(goal, self.catalog, config, planning_time)
        else:
            trace = execute(fine_plan, goal, self.catalog, config, stats.planning_time_s)

        if trace.header.config_hash != self.config_hash:
            raise HarnessError("PROTOCOL_ERROR", f"trial of {goal.goal_id} ran with another config")
        path = trace_file(goal.goal_id, repeat_index)
        write_trace(trace, self.out_dir / path)
        curve = replay(trace, goal, self.catalog.layout)
        result = TrialResult(
            goal_id=goal.goal_id,
            repeat_index=repeat_index,
            seed=config.seed,
            trace_file=path,
            curve=curve,
            final_completion_pct=final_completion(curve),
            total_time_s=trace.end_time_s,
            planned=error is None,
            trace=trace,
        )
        logger.info(
            "%s repeat %d: %.1f%% in %.1fs",
            goal.goal_id,
            repeat_index,
            result.final_completion_pct,
            result.total_time_s,
        )
        return result, error

    def run_goal(self, goal: GoalConfiguration, position: int) -> GoalResult:
        trials: List[TrialResult] = []
        error = None
        repeats = tqdm(
            range(1, TRIALS_PER_GOAL + 1),
            desc=goal.goal_id,
            unit="trial",
            disable=not self.progress,
            leave=False,
        )
        for repeat_index in repeats:
            result, error = self.run_trial(goal, position, repeat_index)
            trials.append(result)
        return goal_result(goal.goal_id, trials, self.grid_dt_s, error)

    async def run_goal_async(self, goal: GoalConfiguration, position: int) -> GoalResult:
        return await asyncio.to_thread(self.run_goal, goal, position)

    async def run_goals_async(self, goals: List[GoalConfiguration]) -> List[GoalResult]:
        tasks = [self.run_goal_async(goal, position) for position, goal in enumerate(goals)]
        return list(await asyncio.gather(*tasks))

    def goals(self, assembly_class: AssemblyClass) -> List[GoalConfiguration]:
        goals = self.catalog.goals_of(assembly_class)
        if len(goals) != GOALS_PER_CLASS:
            raise HarnessError(
                "PROTOCOL_ERROR",
                f"class {assembly_class.value} has {len(goals)} goals, expected {GOALS_PER_CLASS}",
            )
        return goals

    def report(self, assembly_class: AssemblyClass, results: List[GoalResult]) -> BenchmarkReport:
        return BenchmarkReport(
            assembly_class=assembly_class,
            seed=self.config.seed,
            config_hash=self.config_hash,
            grid_dt_s=self.grid_dt_s,
            goals=results,
            summary=summarize(results),
        )


def run_protocol(
    assembly_class: AssemblyClass,
    catalog: AssemblyCatalog,
    domains: Domains,
    config: SimConfig,
    out_dir: Path,
    grid_dt_s: float = 1.0,
    coarse_horizon: int = 40,
    fine_horizon: int = 10,
    parallel_goals: bool = False,
    progress: bool = False,
) -> BenchmarkReport:
    """
    Plan, execute and score every goal of ``assembly_class`` five times in a
    row, then write traces, report.json and the CSVs to ``out_dir``.
    """
    runner = ProtocolRunner(
        catalog, domains, config, out_dir, grid_dt_s, coarse_horizon, fine_horizon, progress
    )
    goals = runner.goals(assembly_class)
    if parallel_goals:
        results = asyncio.run(runner.run_goals_async(goals))
    else:
        results = [runner.run_goal(goal, position) for position, goal in enumerate(goals)]
    report = runner.report(assembly_class, results)
    emit_report(report, out_dir)
    logger.info(
        "Class %s: %.1f%% mean success, %.1fs mean time",
        assembly_class.value,
        report.summary.mean_success_pct,
        report.summary.mean_time_s,
    )
    return report
