from typing import List, Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator

from assembly.assembly_models import AssemblyClass
from execution.sim_models import CompletionPoint, ExecutionTrace

TRIALS_PER_GOAL = 5


class TrialResult(BaseModel):
    """One of the five consecutive repeats of a goal"""

    goal_id: str
    repeat_index: int = Field(ge=1, le=TRIALS_PER_GOAL)
    seed: int
    trace_file: str = Field(description="Trace path relative to the output directory.")
    curve: List[CompletionPoint]
    final_completion_pct: float = Field(ge=0, le=100)
    total_time_s: float = Field(ge=0, description="Planning plus execution, seconds.")
    planned: bool = Field(default=True, description="False when no plan was found.")
    trace: Optional[ExecutionTrace] = Field(default=None, exclude=True)

    @model_validator(mode="after")
    def check_time(self) -> "TrialResult":
        if self.trace is not None and self.trace.end_time_s != self.total_time_s:
            raise ValueError("total time must be the run_ended timestamp")
        return self


class CurveStats(BaseModel):
    """Completion curves sampled on a common time grid"""

    time_s: List[float]
    mean_pct: List[float]
    std_pct: List[float]
    best_pct: List[float]


class GoalResult(BaseModel):
    goal_id: str
    trials: List[TrialResult] = Field(min_length=TRIALS_PER_GOAL, max_length=TRIALS_PER_GOAL)
    curves: CurveStats
    best_trial: int = Field(ge=1, le=TRIALS_PER_GOAL)
    mean_success_pct: float
    mean_time_s: float
    error: Optional[str] = Field(default=None, description="Planner error code, if any.")


class Summary(BaseModel):
    model_config = ConfigDict(frozen=True)

    mean_success_pct: float
    mean_time_s: float


class BenchmarkReport(BaseModel):
    assembly_class: AssemblyClass
    seed: int
    config_hash: str
    grid_dt_s: float = Field(gt=0)
    goals: List[GoalResult]
    summary: Summary
