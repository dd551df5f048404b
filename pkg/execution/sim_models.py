from enum import Enum
from typing import Dict, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, model_validator

from assembly.assembly_models import ExecutionEvent, Skill, WorldState

# skills whose recovery is a search followed by a re-attempt
RETRY_SKILLS = frozenset({Skill.FASTEN, Skill.ASSEMBLE_SQUARE})


class FailurePropagation(str, Enum):
    STRICT = "strict"
    INDEPENDENT = "independent"


class SkillModel(BaseModel):
    """Duration and reliability of one baseline skill"""

    model_config = ConfigDict(frozen=True, extra="forbid")

    skill: Skill
    base_duration_s: float = Field(gt=0, description="Nominal duration of the first attempt.")
    duration_jitter_s: float = Field(
        default=0.0, ge=0, description="Half-width of the uniform jitter on every attempt."
    )
    success_prob: float = Field(ge=0, le=1)
    retries: int = Field(default=0, ge=0)
    retry_duration_s: Optional[float] = Field(
        default=None, gt=0, description="Duration of each retry; the base duration if unset."
    )
    retry_success_prob: float = Field(default=0.0, ge=0, le=1)

    @model_validator(mode="after")
    def check_retries(self) -> "SkillModel":
        if self.retries > 0 and self.skill not in RETRY_SKILLS:
            raise ValueError(f"{self.skill.value} has no recovery behaviour, retries must be 0")
        if self.duration_jitter_s > self.base_duration_s:
            raise ValueError("jitter may not exceed the base duration")
        if self.retry_duration_s is not None and self.duration_jitter_s > self.retry_duration_s:
            raise ValueError("jitter may not exceed the retry duration")
        return self

    def duration(self, attempt: int) -> float:
        if attempt == 0 or self.retry_duration_s is None:
            return self.base_duration_s
        return self.retry_duration_s

    def probability(self, attempt: int) -> float:
        return self.success_prob if attempt == 0 else self.retry_success_prob

    @property
    def attempts(self) -> int:
        return 1 + self.retries


class SimConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    seed: int = Field(ge=0, lt=2**64)
    models: Dict[Skill, SkillModel]
    planning_time_override_s: Optional[float] = Field(
        default=None,
        gt=0,
        description="Replaces the measured planning time in traces.",
    )
    failure_propagation: FailurePropagation = FailurePropagation.STRICT
    peg_drop_prob: float = Field(
        default=0.5, ge=0, le=1, description="Chance a failed fasten drops its peg."
    )

    @model_validator(mode="after")
    def check_models(self) -> "SimConfig":
        missing = [skill.value for skill in Skill if skill not in self.models]
        if missing:
            raise ValueError(f"no model for skills: {', '.join(missing)}")
        for skill, model in self.models.items():
            if model.skill != skill:
                raise ValueError(f"models.{skill.value} describes {model.skill.value}")
        return self

    def with_seed(self, seed: int) -> "SimConfig":
        return self.model_copy(update={"seed": seed})


class TraceHeader(BaseModel):
    """First line of a trace file"""

    model_config = ConfigDict(frozen=True)

    goal_id: str
    seed: int
    config_hash: str
    plan_hash: str
    peg_count: int = Field(ge=0)
    planning_time_s: float = Field(ge=0)


class ExecutionTrace(BaseModel):
    model_config = ConfigDict(frozen=True)

    header: TraceHeader
    events: Tuple[ExecutionEvent, ...]
    final_state: WorldState

    @property
    def planning_time_s(self) -> float:
        return self.header.planning_time_s

    @property
    def end_time_s(self) -> float:
        return self.events[-1].t_s if self.events else self.planning_time_s


class CompletionPoint(BaseModel):
    """A breakpoint of the completion step function"""

    model_config = ConfigDict(frozen=True)

    t_s: float = Field(ge=0)
    completion_pct: float = Field(ge=0, le=100)
