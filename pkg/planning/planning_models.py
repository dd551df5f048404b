from dataclasses import dataclass
from typing import List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field

from reasoning.language_models import (
    BridgeMap,
    GroundAtom,
    GroundedDomain,
    GroundLiteral,
    SymbolicState,
    SystemDescription,
    format_atom,
)


@dataclass(frozen=True)
class Domains:
    """The two descriptions of one workcell and the bridge between them"""

    coarse: SystemDescription
    fine: SystemDescription
    bridge: BridgeMap


class History(BaseModel):
    """Initial observations: fluent literals at step 0 plus static facts"""

    model_config = ConfigDict(frozen=True)

    init: Tuple[GroundLiteral, ...] = Field(
        description="Fluent literals known at step 0; unlisted atoms are false."
    )
    statics: Tuple[GroundAtom, ...] = Field(default=())


@dataclass(frozen=True)
class CoarseStep:
    action: GroundAtom
    pre: SymbolicState
    post: SymbolicState


@dataclass(frozen=True)
class CoarsePlan:
    steps: Tuple[CoarseStep, ...]
    nodes_expanded: int = 0

    @property
    def horizon(self) -> int:
        return len(self.steps)

    @property
    def actions(self) -> List[GroundAtom]:
        return [step.action for step in self.steps]


@dataclass(frozen=True)
class FineSegment:
    coarse_index: int  # 1-based
    actions: Tuple[GroundAtom, ...]
    end_state: SymbolicState
    zoomed_action_count: int = 0


@dataclass(frozen=True)
class FinePlan:
    """
    A coarse plan with every transition expanded into fine actions.

    Carries the full fine grounding so executions can audit preconditions.
    """

    goal_id: str
    coarse: CoarsePlan
    segments: Tuple[FineSegment, ...]
    fine_domain: GroundedDomain
    initial_state: SymbolicState

    @property
    def flattened(self) -> List[GroundAtom]:
        return [action for segment in self.segments for action in segment.actions]

    def parents(self) -> List[int]:
        return [segment.coarse_index for segment in self.segments for _ in segment.actions]


class PlanningStats(BaseModel):
    planning_time_s: float = Field(ge=0, description="Wall-clock seconds spent planning.")
    nodes_expanded: int = Field(ge=0, description="States expanded by every search.")
    coarse_horizon: int = Field(ge=0)
    fine_length: int = Field(ge=0)


class PlannedAction(BaseModel):
    index: int
    action: str
    args: List[str]
    coarse_step: int
    text: str


class PlanDocument(BaseModel):
    """The plan file"""

    goal_id: str
    actions: List[PlannedAction]
    coarse_actions: List[str]
    stats: Optional[PlanningStats] = None

    @classmethod
    def from_plan(cls, plan: FinePlan, stats: Optional[PlanningStats] = None) -> "PlanDocument":
        actions = [
            PlannedAction(
                index=index,
                action=action[0],
                args=list(action[1:]),
                coarse_step=parent,
                text=format_atom(action),
            )
            for index, (action, parent) in enumerate(zip(plan.flattened, plan.parents()))
        ]
        return cls(
            goal_id=plan.goal_id,
            actions=actions,
            coarse_actions=[format_atom(a) for a in plan.coarse.actions],
            stats=stats,
        )
