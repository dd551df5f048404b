import logging
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from assembly.assembly_models import (
    AssemblyCatalog,
    BeamStatus,
    Connection,
    EventKind,
    ExecutionEvent,
    GoalConfiguration,
    LayoutTemplate,
    Skill,
    WorldState,
)
from assembly.errors import IllegalEventError, SimulationError
from assembly.world import apply_event, initial_world_state
from planning.instance import joint_id
from planning.planner import plan_hash
from planning.planning_models import FinePlan
from reasoning.language_models import GroundAtom, GroundedDomain, SymbolicState, format_atom
from reasoning.semantics import applicable, close, successor

from .config import config_hash
from .sim_models import (
    CompletionPoint,
    ExecutionTrace,
    FailurePropagation,
    SimConfig,
    TraceHeader,
)

logger = logging.getLogger(__name__)

ATTEMPT_STREAM = 0
DROP_STREAM = 1

# Called after a failed action with the world, the fine state and the actions
# still to run; a returned sequence replaces them.
Replanner = Callable[[WorldState, SymbolicState, Tuple[GroundAtom, ...]], Optional[Sequence[GroundAtom]]]


def generator(seed: int, ordinal: int, attempt: int, stream: int = ATTEMPT_STREAM) -> np.random.Generator:
    """
    The generator of one attempt of one action. Every attempt owns its stream,
    so changing one probability never shifts the draws of another action.
    Per attempt the draw order is: duration jitter, then success.
    """
    return np.random.default_rng(
        np.random.SeedSequence(entropy=seed, spawn_key=(ordinal, attempt, stream))
    )


class _ActionContext:
    """Maps fine actions onto the goal's beams, pegs and connections."""

    def __init__(self, goal: GoalConfiguration, domain: GroundedDomain):
        self.goal = goal
        self.joint_beam = {
            atom[1]: atom[2] for atom in domain.statics if atom[0] == "part_of"
        }
        self.pinned_by: Dict[Tuple[str, str], Connection] = {}
        for connection in goal.peg_connections:
            a, b = joint_id(*connection.joint_a), joint_id(*connection.joint_b)
            self.pinned_by[(a, b)] = self.pinned_by[(b, a)] = connection

    def subject(self, action: GroundAtom) -> Optional[str]:
        name, args = action[0], action[1:]
        if name in ("pick_up", "put_down", "push"):
            return args[1]
        if name in ("assemble_square", "assemble_cap"):
            return self.joint_beam.get(args[1])
        if name == "fasten":
            return args[3]
        return None

    def connections(self, action: GroundAtom, world: WorldState) -> Tuple[Connection, ...]:
        name = action[0]
        if name == "fasten":
            connection = self.pinned_by.get((action[2], action[3]))
            return (connection,) if connection is not None else ()
        if name in ("assemble_square", "assemble_cap"):
            beam = self.subject(action)
            return tuple(
                connection
                for connection in self.goal.connections
                if beam in connection.beams
                and world.beam_at.get(connection.other_beam(beam)) is not None
                and world.beam_at[connection.other_beam(beam)].status == BeamStatus.ASSEMBLED
            )
        return ()


class _Run:
    def __init__(self, goal: GoalConfiguration, layout: LayoutTemplate, start_s: float):
        self.world = initial_world_state(goal, layout)
        self.events: List[ExecutionEvent] = []
        self.t = start_s

    def emit(self, **fields) -> ExecutionEvent:
        event = ExecutionEvent(t_s=self.t, **fields)
        self.events.append(event)
        self.world = apply_event(self.world, event)
        return event


def execute(
    plan: FinePlan,
    goal: GoalConfiguration,
    catalog: AssemblyCatalog,
    config: SimConfig,
    planning_time_s: Optional[float] = None,
    replanner: Optional[Replanner] = None,
) -> ExecutionTrace:
    """
    Run ``plan`` open loop against the skill models of ``config``.

    Runtime failures are recorded in the trace, never raised. The clock starts
    at planning start, so the first action begins at the planning time (the
    config override when set, else ``planning_time_s``).
    """
    if plan.goal_id != goal.goal_id:
        raise SimulationError(
            "CONFIG_ERROR", f"plan is for {plan.goal_id}, not {goal.goal_id}"
        )
    planning_time = (
        config.planning_time_override_s
        if config.planning_time_override_s is not None
        else planning_time_s
    )
    if planning_time is None or planning_time <= 0:
        raise SimulationError(
            "CONFIG_ERROR", "planning time must be positive", planning_time_s=planning_time
        )
    domain = plan.fine_domain
    context = _ActionContext(goal, domain)
    run = _Run(goal, catalog.layout, planning_time)
    state = plan.initial_state
    strict = config.failure_propagation == FailurePropagation.STRICT

    queue = list(plan.flattened)
    ordinal = 0
    while queue:
        action = queue.pop(0)
        skill = Skill(action[0])
        model = config.models[skill]
        subject = context.subject(action)
        args = tuple(action[1:])
        possible = applicable(state, action, domain)

        if strict and not possible:
            logger.debug("Skipping %s: precondition does not hold", format_atom(action))
            run.emit(kind=EventKind.SKILL_FAILED, skill=skill, args=args, subject=subject)
            ordinal += 1
            continue

        succeeded = False
        attempt = 0
        for attempt in range(model.attempts):
            rng = generator(config.seed, ordinal, attempt)
            jitter = rng.uniform(-model.duration_jitter_s, model.duration_jitter_s)
            drawn = rng.random() < model.probability(attempt)
            run.emit(
                kind=EventKind.SKILL_STARTED,
                skill=skill,
                args=args,
                attempt_index=attempt,
                subject=subject,
            )
            run.t += model.duration(attempt) + jitter
            if drawn and possible:
                succeeded = True
                break

        if succeeded:
            connections = context.connections(action, run.world)
            run.emit(
                kind=EventKind.SKILL_SUCCEEDED,
                skill=skill,
                args=args,
                attempt_index=attempt,
                subject=subject,
                connections=connections,
            )
            if skill == Skill.FASTEN:
                run.emit(kind=EventKind.PEG_INSERTED, subject=subject, connections=connections)
            state = successor(state, action, domain)
        else:
            run.emit(
                kind=EventKind.SKILL_FAILED,
                skill=skill,
                args=args,
                attempt_index=attempt,
                subject=subject,
            )
            if skill == Skill.FASTEN and run.world.hand == subject:
                if generator(config.seed, ordinal, 0, DROP_STREAM).random() < config.peg_drop_prob:
                    run.emit(kind=EventKind.PEG_DROPPED, subject=subject)
                    held = ("in_hand", action[1], subject)
                    state = close(domain, (state.true - {held}) | {("spent", subject)})
            if replanner is not None:
                replacement = replanner(run.world, state, tuple(queue))
                if replacement is not None:
                    logger.info("Replanned %d remaining actions", len(replacement))
                    queue = list(replacement)
        ordinal += 1

    run.emit(kind=EventKind.RUN_ENDED)
    header = TraceHeader(
        goal_id=goal.goal_id,
        seed=config.seed,
        config_hash=config_hash(config),
        plan_hash=plan_hash(plan),
        peg_count=len(goal.peg_connections),
        planning_time_s=planning_time,
    )
    inserted = sum(1 for e in run.events if e.kind == EventKind.PEG_INSERTED)
    logger.debug(
        "Executed %s (seed %d): %d/%d pegs by t=%.1fs",
        goal.goal_id,
        config.seed,
        inserted,
        header.peg_count,
        run.t,
    )
    return ExecutionTrace(header=header, events=tuple(run.events), final_state=run.world)


def _malformed(message: str, **context) -> SimulationError:
    return SimulationError("MALFORMED_TRACE", message, **context)


def replay(
    trace: ExecutionTrace,
    goal: GoalConfiguration,
    layout: Optional[LayoutTemplate] = None,
) -> List[CompletionPoint]:
    """
    Completion over time as a step function: the 0% point at planning start
    followed by one breakpoint per peg insertion.

    When ``layout`` is given the events are also folded from the initial world
    state and the fold must reproduce the trace's final state.
    """
    required = goal.peg_connections
    points = [CompletionPoint(t_s=0.0, completion_pct=0.0 if required else 100.0)]
    pinned = set()
    previous = 0.0
    for position, event in enumerate(trace.events):
        if event.t_s < previous:
            raise _malformed(
                f"event {position} at {event.t_s}s precedes {previous}s", position=position
            )
        previous = event.t_s
        if event.kind == EventKind.RUN_ENDED and position != len(trace.events) - 1:
            raise _malformed("run_ended is not the last event", position=position)
        if event.kind != EventKind.PEG_INSERTED:
            continue
        connection = event.connections[0]
        if connection not in required:
            raise _malformed(f"{connection.key} is not a peg connection of {goal.goal_id}")
        if connection in pinned:
            raise _malformed(f"{connection.key} is pinned twice")
        pinned.add(connection)
        pct = 100.0 * len(pinned) / len(required)
        points.append(CompletionPoint(t_s=event.t_s, completion_pct=pct))

    if layout is not None:
        world = initial_world_state(goal, layout)
        try:
            for event in trace.events:
                world = apply_event(world, event)
        except IllegalEventError as e:
            raise _malformed(f"illegal event in trace: {e.message}") from e
        if world != trace.final_state:
            raise _malformed("final state does not match the events")
    return points


def final_completion(points: Sequence[CompletionPoint]) -> float:
    return points[-1].completion_pct if points else 0.0


def successful_skills(trace: ExecutionTrace) -> int:
    return sum(1 for e in trace.events if e.kind == EventKind.SKILL_SUCCEEDED)
