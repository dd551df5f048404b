import math
from typing import List, Sequence

import numpy as np

from assembly.errors import HarnessError
from execution.sim_models import CompletionPoint

from .bench_models import TRIALS_PER_GOAL, CurveStats, GoalResult, Summary, TrialResult


def sample(curve: Sequence[CompletionPoint], times: np.ndarray) -> np.ndarray:
    """Value of a step function at each of ``times`` (right-continuous)."""
    breakpoints = np.array([point.t_s for point in curve])
    values = np.array([point.completion_pct for point in curve])
    index = np.searchsorted(breakpoints, times, side="right") - 1
    return np.where(index >= 0, values[np.clip(index, 0, None)], 0.0)


def best_trial(trials: Sequence[TrialResult]) -> TrialResult:
    """Highest final completion, ties broken by the shorter total time."""
    return min(
        trials,
        key=lambda t: (-t.final_completion_pct, t.total_time_s, t.repeat_index),
    )


def grid(max_time_s: float, grid_dt_s: float) -> np.ndarray:
    if not grid_dt_s > 0:
        raise HarnessError("GRID_ERROR", f"grid step must be positive, got {grid_dt_s}")
    rows = math.ceil(max_time_s / grid_dt_s) + 1
    return np.arange(rows) * grid_dt_s


def curve_stats(trials: Sequence[TrialResult], grid_dt_s: float) -> CurveStats:
    """
    Mean, population standard deviation and best curve of the trials of one
    goal, all sampled on a grid from 0 to the longest trial.
    """
    if len(trials) != TRIALS_PER_GOAL:
        raise HarnessError(
            "PROTOCOL_ERROR", f"expected {TRIALS_PER_GOAL} trials, got {len(trials)}"
        )
    times = grid(max(t.total_time_s for t in trials), grid_dt_s)
    samples = np.stack([sample(t.curve, times) for t in trials])
    best = best_trial(trials)
    return CurveStats(
        time_s=times.tolist(),
        mean_pct=samples.mean(axis=0).tolist(),
        std_pct=samples.std(axis=0).tolist(),
        best_pct=sample(best.curve, times).tolist(),
    )


def goal_result(goal_id: str, trials: List[TrialResult], grid_dt_s: float, error=None) -> GoalResult:
    return GoalResult(
        goal_id=goal_id,
        trials=trials,
        curves=curve_stats(trials, grid_dt_s),
        best_trial=best_trial(trials).repeat_index,
        mean_success_pct=float(np.mean([t.final_completion_pct for t in trials])),
        mean_time_s=float(np.mean([t.total_time_s for t in trials])),
        error=error,
    )


def summarize(goals: Sequence[GoalResult]) -> Summary:
    return Summary(
        mean_success_pct=float(np.mean([g.mean_success_pct for g in goals])),
        mean_time_s=float(np.mean([g.mean_time_s for g in goals])),
    )
