import logging
from typing import Optional, Set, Tuple

from assembly.errors import PlanningError
from reasoning.bridge import abstract, describe_difference
from reasoning.grounding import ground
from reasoning.language_models import (
    GroundAtom,
    GroundedBridge,
    GroundedDomain,
    SymbolicState,
    SystemDescription,
    format_atom,
)
from reasoning.semantics import is_closed

from .instance import DomainInstance
from .planning_models import CoarseStep
from .search import always_blocked, breadth_first

logger = logging.getLogger(__name__)


class Refiner:
    """
    Expands coarse transitions into fine action sequences, one transition at a
    time, each within a fine domain zoomed to the transition's constants.
    """

    def __init__(
        self,
        fine_desc: SystemDescription,
        instance: DomainInstance,
        fine_domain: GroundedDomain,
        bridge: GroundedBridge,
        max_horizon: int = 10,
    ):
        self.fine_desc = fine_desc
        self.instance = instance
        self.fine_domain = fine_domain
        self.bridge = bridge
        self.max_horizon = max_horizon
        self.nodes_expanded = 0

    def _place_of(self, state: SymbolicState, thing: str) -> Optional[str]:
        for place in self.instance.refinements:
            if ("loc", thing, place) in state.true:
                return place
        return None

    def relevant_constants(self, step: CoarseStep) -> Set[str]:
        """Constants a coarse transition can touch at the fine resolution."""
        instance = self.instance
        robots = set(instance.fine_constants["robot"])
        things = set(robots)
        for state in (step.pre, step.post):
            things |= {atom[2] for atom in state.true if atom[0] == "in_hand"}

        beams = set()
        joints = set()
        args = step.action[1:]
        for arg in args:
            if arg in instance.coarse_constants["beam"]:
                beams.add(arg)
            elif arg in instance.coarse_constants["peg"]:
                things.add(arg)
            elif arg in instance.link_joints:
                link_joints = instance.link_joints[arg]
                joints |= set(link_joints)
                beams |= {instance.joint_beam[j] for j in link_joints}
        for beam in sorted(beams):
            for joint in instance.joints_of(beam):
                joints.add(joint)
                mate = instance.mates.get(joint)
                if mate is not None:
                    joints.add(mate)
                    things.add(instance.joint_beam[mate])
        things |= beams

        places = set()
        for state in (step.pre, step.post):
            for thing in things:
                place = self._place_of(state, thing)
                if place is not None:
                    places.add(place)
        for arg in args:
            if arg in instance.refinements:
                places.add(arg)
        fine_places = {p for place in places for p in instance.refinements[place]}
        return things | joints | fine_places

    def zoom(self, step: CoarseStep) -> GroundedDomain:
        """Ground the fine description over the constants relevant to ``step``."""
        keep = self.relevant_constants(step)
        constants = {
            sort: tuple(c for c in members if c in keep)
            for sort, members in self.instance.fine_constants.items()
        }
        statics = [atom for atom in self.instance.fine_statics if set(atom[1:]) <= keep]
        zoomed = ground(self.fine_desc, constants, statics, allow_empty_sorts=True)
        logger.debug(
            "Zoomed %s to %d of %d ground actions",
            format_atom(step.action),
            len(zoomed.ground_actions),
            len(self.fine_domain.ground_actions),
        )
        return zoomed

    def refine_transition(
        self,
        step: CoarseStep,
        fine_state: SymbolicState,
        zoomed: Optional[GroundedDomain] = None,
        max_horizon: Optional[int] = None,
    ) -> Tuple[Tuple[GroundAtom, ...], SymbolicState]:
        """
        Shortest fine sequence, within the zoomed domain, whose end state
        abstracts to the coarse post-state. Returns the sequence and the full
        fine end state.
        """
        zoomed = zoomed if zoomed is not None else self.zoom(step)
        horizon = self.max_horizon if max_horizon is None else max_horizon
        outside = frozenset(a for a in fine_state.true if a not in zoomed.atom_set)
        start = SymbolicState(
            true=frozenset(a for a in fine_state.true if a in zoomed.atom_set),
            statics=zoomed.statics,
        )
        target = step.post.true

        def merged(state: SymbolicState) -> SymbolicState:
            return SymbolicState(true=outside | state.true, statics=self.fine_domain.statics)

        def is_goal(state: SymbolicState) -> bool:
            return abstract(self.bridge, merged(state)).true == target

        blocked = always_blocked(zoomed)
        actions = [a for a in zoomed.ground_actions if a not in blocked]
        result = breadth_first(zoomed, start, is_goal, horizon, actions)
        self.nodes_expanded += result.nodes_expanded
        if result.steps is None:
            raise PlanningError(
                "REFINEMENT_FAILED",
                f"no fine sequence of at most {horizon} actions refines "
                f"{format_atom(step.action)}",
                action=format_atom(step.action),
                horizon=horizon,
            )
        if not result.steps:
            # a coarse step must change the coarse state, so this is a model mismatch
            raise PlanningError(
                "REFINEMENT_FAILED",
                f"{format_atom(step.action)} has no fine counterpart",
                action=format_atom(step.action),
            )

        end = merged(result.steps[-1].post)
        if not is_closed(end, self.fine_domain):
            raise PlanningError(
                "REFINEMENT_FAILED",
                f"refining {format_atom(step.action)} leaves the fine state unclosed",
                action=format_atom(step.action),
            )
        coarse_end = abstract(self.bridge, end)
        if coarse_end.true != target:
            raise PlanningError(
                "REFINEMENT_FAILED",
                f"refining {format_atom(step.action)}: "
                f"{describe_difference(step.post, coarse_end)}",
                action=format_atom(step.action),
            )
        return tuple(s.action for s in result.steps), end
