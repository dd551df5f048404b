from dataclasses import dataclass, field
from itertools import permutations
from typing import Dict, FrozenSet, List, Tuple

from assembly.assembly_models import Connection, GoalConfiguration, Insertion, JointKind
from reasoning.language_models import GroundAtom, GroundLiteral

from .planning_models import History

ROBOT = "rob"
HOME = "home"
NEAR_TEMPLATE = "near_template"
NEAR_ASSEMBLY = "near_assembly"
PLACES = (HOME, NEAR_TEMPLATE, NEAR_ASSEMBLY)
POSES = ("approach", "engage")


def joint_id(beam_id: str, index: int) -> str:
    return f"{beam_id}_j{index}"


def pose(place: str, kind: str) -> str:
    return f"{place}_{kind}"


@dataclass(frozen=True)
class DomainInstance:
    """Constants and facts that pose one goal to the coarse and fine descriptions."""

    goal_id: str
    coarse_constants: Dict[str, Tuple[str, ...]]
    coarse_statics: FrozenSet[GroundAtom]
    coarse_init: FrozenSet[GroundAtom]
    goal: Tuple[GroundLiteral, ...]
    fine_constants: Dict[str, Tuple[str, ...]]
    fine_statics: FrozenSet[GroundAtom]
    fine_init: FrozenSet[GroundAtom]
    bridge_statics: FrozenSet[GroundAtom]
    joint_beam: Dict[str, str] = field(default_factory=dict)
    mates: Dict[str, str] = field(default_factory=dict)
    link_joints: Dict[str, Tuple[str, str]] = field(default_factory=dict)
    link_connection: Dict[str, Connection] = field(default_factory=dict)
    refinements: Dict[str, Tuple[str, ...]] = field(default_factory=dict)

    @property
    def history(self) -> History:
        return History(
            init=tuple((atom, True) for atom in sorted(self.coarse_init)),
            statics=tuple(sorted(self.coarse_statics)),
        )

    def joints_of(self, beam_id: str) -> List[str]:
        return sorted(j for j, b in self.joint_beam.items() if b == beam_id)


def _cap_side(goal: GoalConfiguration, connection: Connection):
    """The (cap joint ref, other joint ref) of a capping connection, else None."""
    kinds = [
        goal.beam(beam_id).joint(index).kind
        for beam_id, index in (connection.joint_a, connection.joint_b)
    ]
    if kinds[0] == JointKind.CAP and kinds[1] != JointKind.CAP:
        return connection.joint_a, connection.joint_b
    if kinds[1] == JointKind.CAP and kinds[0] != JointKind.CAP:
        return connection.joint_b, connection.joint_a
    return None


def build_instance(goal: GoalConfiguration) -> DomainInstance:
    """Pose ``goal`` (already validated) to the shipped descriptions."""
    beams = sorted(goal.beams_used)
    fixed = [beam.beam_id for beam in goal.beams if beam.fixed]
    movable = [b for b in beams if b not in fixed]
    peg_connections = sorted(goal.peg_connections, key=Connection.sort_key)
    links = [f"l{n}" for n in range(1, len(peg_connections) + 1)]
    pegs = [f"p{n}" for n in range(1, len(peg_connections) + 1)]

    coarse_statics = set()
    fine_statics = set()
    bridge_statics = set()

    for a, b in permutations(PLACES, 2):
        coarse_statics.add(("next_to", a, b))
    coarse_statics |= {("workspace", NEAR_ASSEMBLY), ("storage", NEAR_TEMPLATE)}

    fine_places = []
    refinements = {}
    for place in PLACES:
        approach, engage = pose(place, "approach"), pose(place, "engage")
        fine_places += [approach, engage]
        refinements[place] = (approach, engage)
        fine_statics |= {("next_to", approach, engage), ("next_to", engage, approach)}
        fine_statics.add(("engage", engage))
        bridge_statics |= {("refines", approach, place), ("refines", engage, place)}
    for a, b in permutations(PLACES, 2):
        fine_statics.add(("next_to", pose(a, "approach"), pose(b, "approach")))
    for kind in POSES:
        fine_statics.add(("workspace", pose(NEAR_ASSEMBLY, kind)))
        fine_statics.add(("storage", pose(NEAR_TEMPLATE, kind)))

    joint_beam = {}
    for beam in goal.beams:
        for joint in beam.joints:
            jid = joint_id(beam.beam_id, joint.index)
            joint_beam[jid] = beam.beam_id
            fine_statics.add(("part_of", jid, beam.beam_id))

    mates = {}
    special = set()
    for connection in goal.connections:
        a, b = joint_id(*connection.joint_a), joint_id(*connection.joint_b)
        mates[a], mates[b] = b, a
        fine_statics |= {("mates", a, b), ("mates", b, a)}
        beam_a, beam_b = connection.beams
        coarse_statics |= {("adjacent", beam_a, beam_b), ("adjacent", beam_b, beam_a)}
        capping = _cap_side(goal, connection)
        if capping is None:
            fine_statics |= {("square_joint", a), ("square_joint", b)}
        else:
            (cap_beam, cap_index), (other_beam, _) = capping
            coarse_statics |= {("cap_beam", cap_beam), ("cap_partner", cap_beam, other_beam)}
            fine_statics |= {("cap_beam", cap_beam), ("cap_joint", joint_id(cap_beam, cap_index))}
        if connection.insertion != Insertion.STANDARD:
            special |= {beam for beam in connection.beams if beam not in fixed}
    for beam in special:
        coarse_statics.add(("special", beam))
        fine_statics.add(("special", beam))

    link_joints = {}
    link_connection = {}
    for link, connection in zip(links, peg_connections):
        a, b = joint_id(*connection.joint_a), joint_id(*connection.joint_b)
        link_joints[link] = (a, b)
        link_connection[link] = connection
        coarse_statics |= {
            ("link_of", link, connection.joint_a[0]),
            ("link_of", link, connection.joint_b[0]),
        }
        fine_statics.add(("pin_pair", a, b))
        bridge_statics.add(("link_joints", link, a, b))

    for earlier, later in zip(pegs, pegs[1:]):
        coarse_statics.add(("precedes", earlier, later))
        fine_statics.add(("precedes", earlier, later))

    coarse_init = {("loc", ROBOT, HOME)}
    fine_init = {("loc", ROBOT, pose(HOME, "approach"))}
    for beam in beams:
        if beam in fixed:
            coarse_init |= {("loc", beam, NEAR_ASSEMBLY), ("assembled", beam)}
            fine_init |= {("loc", beam, pose(NEAR_ASSEMBLY, "engage")), ("placed", beam)}
        else:
            coarse_init.add(("loc", beam, NEAR_TEMPLATE))
            fine_init.add(("loc", beam, pose(NEAR_TEMPLATE, "engage")))
    for peg in pegs:
        coarse_init.add(("loc", peg, NEAR_TEMPLATE))
        fine_init.add(("loc", peg, pose(NEAR_TEMPLATE, "engage")))

    goal_literals = [(("assembled", beam), True) for beam in beams]
    goal_literals += [(("fastened", link), True) for link in links]
    goal_literals += [(("needs_push", beam), False) for beam in beams]

    return DomainInstance(
        goal_id=goal.goal_id,
        coarse_constants={
            "robot": (ROBOT,),
            "beam": tuple(beams),
            "peg": tuple(pegs),
            "place": PLACES,
            "link": tuple(links),
        },
        coarse_statics=frozenset(coarse_statics),
        coarse_init=frozenset(coarse_init),
        goal=tuple(goal_literals),
        fine_constants={
            "robot": (ROBOT,),
            "beam": tuple(beams),
            "peg": tuple(pegs),
            "place": tuple(fine_places),
            "joint": tuple(sorted(joint_beam)),
        },
        fine_statics=frozenset(fine_statics),
        fine_init=frozenset(fine_init),
        bridge_statics=frozenset(bridge_statics),
        joint_beam=joint_beam,
        mates=mates,
        link_joints=link_joints,
        link_connection=link_connection,
        refinements=refinements,
    )
