import logging
from collections import deque
from dataclasses import dataclass
from typing import Callable, Dict, FrozenSet, Iterable, List, Optional, Sequence, Set, Tuple

from assembly.errors import PlanningError, TransitionError
from reasoning.language_models import (
    GroundAtom,
    GroundedDomain,
    GroundLiteral,
    SymbolicState,
    format_literal,
)
from reasoning.semantics import applicable, close, successor

from .planning_models import CoarsePlan, CoarseStep, History

logger = logging.getLogger(__name__)

ORACLE_STATE_LIMIT = 10**6


@dataclass
class SearchResult:
    steps: Optional[List[CoarseStep]]
    nodes_expanded: int
    horizon_searched: int


def always_blocked(domain: GroundedDomain) -> FrozenSet[GroundAtom]:
    """Actions with an executability condition that holds in every state."""
    return frozenset(
        blocker.action for blocker in domain.executability if not blocker.body
    )


def initial_state(domain: GroundedDomain, history: History) -> SymbolicState:
    known = dict()
    for atom, positive in history.init:
        atom = tuple(atom)
        if known.get(atom, positive) != positive:
            raise PlanningError("INVALID_INIT", f"{format_literal((atom, positive))} contradicts history")
        known[atom] = positive
    unknown = sorted(a for a in known if a not in domain.atom_set)
    if unknown:
        raise PlanningError("INVALID_INIT", f"history mentions unknown atoms {unknown}")
    try:
        return close(domain, (a for a, v in known.items() if v), fixed=known)
    except TransitionError as e:
        raise PlanningError("INVALID_INIT", f"history has no closed completion: {e.message}") from e


def relaxed_reachable(domain: GroundedDomain, init: SymbolicState) -> Set[GroundAtom]:
    """
    Atoms that can become true when negative preconditions, negative effects and
    every fluent-dependent executability condition are ignored.
    """
    blocked = always_blocked(domain)
    rules = [
        (law.head, law.body)
        for law in domain.causal_laws
        if law.head[1] and law.action not in blocked
    ]
    rules += [(c.head, c.body) for c in domain.constraints if c.head[1]]
    reached = set(init.true)
    changed = True
    while changed:
        changed = False
        for (atom, _), body in rules:
            if atom not in reached and all(a in reached for a, positive in body if positive):
                reached.add(atom)
                changed = True
    return reached


def relevant_actions(
    domain: GroundedDomain, goal: Iterable[GroundLiteral]
) -> Tuple[GroundAtom, ...]:
    """
    Ground actions that can influence the goal: an action is kept when one of
    its causal laws touches an atom in the goal's cone of influence.
    """
    relevant = {atom for atom, _ in goal}
    changed = True
    while changed:
        changed = False
        for law in domain.causal_laws:
            if law.head[0] in relevant:
                needed = {a for a, _ in law.body}
                for blocker in domain.blockers_by_action.get(law.action, ()):
                    needed |= {a for a, _ in blocker.body}
                if not needed <= relevant:
                    relevant |= needed
                    changed = True
        for constraint in domain.constraints:
            if constraint.head[0] in relevant:
                needed = {a for a, _ in constraint.body}
                if not needed <= relevant:
                    relevant |= needed
                    changed = True
    blocked = always_blocked(domain)
    return tuple(
        action
        for action in domain.ground_actions
        if action not in blocked
        and any(law.head[0] in relevant for law in domain.laws_by_action.get(action, ()))
    )


def breadth_first(
    domain: GroundedDomain,
    init: SymbolicState,
    is_goal: Callable[[SymbolicState], bool],
    max_horizon: int,
    actions: Sequence[GroundAtom],
) -> SearchResult:
    """
    Layered breadth-first search. Actions are tried in the given (sorted) order
    and goals are detected on generation, so the first plan found is the
    lexicographically least among the shortest ones.
    """
    if is_goal(init):
        return SearchResult(steps=[], nodes_expanded=0, horizon_searched=0)

    parents: Dict[SymbolicState, Optional[Tuple[SymbolicState, GroundAtom]]] = {init: None}
    frontier = [init]
    nodes = 0
    depth = 0
    while frontier and depth < max_horizon:
        depth += 1
        layer = []
        for state in frontier:
            nodes += 1
            for action in actions:
                if not applicable(state, action, domain):
                    continue
                try:
                    reached = successor(state, action, domain)
                except TransitionError as e:
                    if e.code == "INCONSISTENT":
                        continue
                    raise
                if reached in parents:
                    continue
                parents[reached] = (state, action)
                if is_goal(reached):
                    return SearchResult(
                        steps=_unwind(parents, reached),
                        nodes_expanded=nodes,
                        horizon_searched=depth,
                    )
                layer.append(reached)
        logger.debug("Depth %d: %d new states, %d expanded", depth, len(layer), nodes)
        frontier = layer
    return SearchResult(steps=None, nodes_expanded=nodes, horizon_searched=depth)


def _unwind(parents, state: SymbolicState) -> List[CoarseStep]:
    steps = []
    while parents[state] is not None:
        previous, action = parents[state]
        steps.append(CoarseStep(action=action, pre=previous, post=state))
        state = previous
    steps.reverse()
    return steps


def plan_coarse(
    domain: GroundedDomain,
    history: History,
    goal: Sequence[GroundLiteral],
    max_horizon: int = 40,
) -> CoarsePlan:
    """
    Shortest plan reaching ``goal`` from the state ``history`` induces.

    Raises PlanningError NO_PLAN, reporting the horizon searched, when no plan
    of at most ``max_horizon`` steps exists, and INVALID_INIT when the history
    does not describe a state.
    """
    if max_horizon < 0:
        raise PlanningError("INVALID_HORIZON", f"max_horizon must be >= 0, got {max_horizon}")
    init = initial_state(domain, history)
    goal = tuple((tuple(atom), positive) for atom, positive in goal)
    if init.satisfies(goal):
        return CoarsePlan(steps=(), nodes_expanded=0)

    reachable = relaxed_reachable(domain, init)
    unreachable = [
        literal for literal in goal if literal[1] and literal[0] not in reachable
    ]
    if unreachable:
        raise PlanningError(
            "NO_PLAN",
            f"{format_literal(unreachable[0])} can never hold "
            f"(no plan within horizon {max_horizon})",
            horizon=max_horizon,
            unreachable=[format_literal(l) for l in unreachable],
        )

    result = breadth_first(
        domain, init, lambda state: state.satisfies(goal), max_horizon, relevant_actions(domain, goal)
    )
    if result.steps is None:
        raise PlanningError(
            "NO_PLAN",
            f"no plan within horizon {max_horizon} (searched to {result.horizon_searched})",
            horizon=result.horizon_searched,
            nodes_expanded=result.nodes_expanded,
        )
    logger.debug(
        "Coarse plan of horizon %d after %d expansions", len(result.steps), result.nodes_expanded
    )
    return CoarsePlan(steps=tuple(result.steps), nodes_expanded=result.nodes_expanded)


def bfs_oracle(
    domain: GroundedDomain, init: SymbolicState, goal: Sequence[GroundLiteral]
) -> int:
    """Exact minimal plan length by exhaustive breadth-first search (for tests)."""
    goal = tuple((tuple(atom), positive) for atom, positive in goal)
    depth_of = {init: 0}
    queue = deque([init])
    while queue:
        state = queue.popleft()
        if state.satisfies(goal):
            return depth_of[state]
        for action in domain.ground_actions:
            try:
                reached = successor(state, action, domain)
            except TransitionError as e:
                if e.code in ("NOT_APPLICABLE", "INCONSISTENT"):
                    continue
                raise
            if reached not in depth_of:
                if len(depth_of) >= ORACLE_STATE_LIMIT:
                    raise PlanningError(
                        "STATE_SPACE_TOO_LARGE",
                        f"more than {ORACLE_STATE_LIMIT} reachable states",
                    )
                depth_of[reached] = depth_of[state] + 1
                queue.append(reached)
    raise PlanningError("NO_PLAN", "goal is unreachable", states=len(depth_of))
