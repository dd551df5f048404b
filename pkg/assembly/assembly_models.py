from enum import Enum
from typing import Dict, FrozenSet, List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

JointRef = Tuple[str, int]

IDENTIFIER_PATTERN = r"^[a-z0-9_-]+$"
MAX_PEGS = 15


class JointKind(str, Enum):
    SOCKET = "socket"
    TAB = "tab"
    CAP = "cap"


class Insertion(str, Enum):
    STANDARD = "standard"
    ANGLED = "angled"
    SLIDE = "slide"


class AssemblyClass(str, Enum):
    EASY = "easy"
    MEDIUM = "medium"
    HARD = "hard"


# inclusive peg-requiring connection bounds per class
CLASS_PEG_RANGE = {
    AssemblyClass.EASY: (3, 4),
    AssemblyClass.MEDIUM: (4, 8),
    AssemblyClass.HARD: (0, MAX_PEGS),
}


class JointSpec(BaseModel):
    """One 3D-printed joint on a beam"""

    model_config = ConfigDict(frozen=True)

    index: int = Field(ge=0, description="Position of the joint along the beam.")
    kind: JointKind = Field(description="Mating kind of the joint.")
    peg_hole: bool = Field(description="Whether a peg can pin this joint.")


class BeamSpec(BaseModel):
    """A base beam of the benchmark kit"""

    model_config = ConfigDict(frozen=True)

    beam_id: str = Field(pattern=IDENTIFIER_PATTERN)
    joints: Tuple[JointSpec, ...] = Field(description="Joints ordered by index.")
    fixed: bool = Field(
        default=False, description="True for the beam fixed rigidly to the table."
    )

    @field_validator("joints")
    @classmethod
    def check_joints(cls, joints: Tuple[JointSpec, ...]) -> Tuple[JointSpec, ...]:
        if len(joints) < 2:
            raise ValueError("a beam needs at least 2 joints")
        indices = [joint.index for joint in joints]
        if len(set(indices)) != len(indices):
            raise ValueError("joint indices must be distinct")
        return tuple(sorted(joints, key=lambda joint: joint.index))

    def joint(self, index: int) -> Optional[JointSpec]:
        for joint in self.joints:
            if joint.index == index:
                return joint
        return None


class Connection(BaseModel):
    """Two joints of different beams that mate in the goal"""

    model_config = ConfigDict(frozen=True)

    joint_a: JointRef
    joint_b: JointRef
    requires_peg: bool = True
    insertion: Insertion = Insertion.STANDARD

    @model_validator(mode="after")
    def normalise(self) -> "Connection":
        if self.joint_a == self.joint_b:
            raise ValueError("a connection needs two distinct joints")
        if self.joint_b < self.joint_a:
            a, b = self.joint_b, self.joint_a
            object.__setattr__(self, "joint_a", a)
            object.__setattr__(self, "joint_b", b)
        return self

    @property
    def key(self) -> str:
        return (
            f"{self.joint_a[0]}:{self.joint_a[1]}-{self.joint_b[0]}:{self.joint_b[1]}"
        )

    @property
    def beams(self) -> Tuple[str, str]:
        return self.joint_a[0], self.joint_b[0]

    def other_beam(self, beam_id: str) -> str:
        return self.joint_b[0] if self.joint_a[0] == beam_id else self.joint_a[0]

    def sort_key(self) -> Tuple[JointRef, JointRef]:
        return self.joint_a, self.joint_b


class GoalConfiguration(BaseModel):
    """A target assembly, as described by one goal file"""

    model_config = ConfigDict(frozen=True)

    goal_id: str = Field(pattern=IDENTIFIER_PATTERN)
    assembly_class: AssemblyClass
    beams: Tuple[BeamSpec, ...]
    connections: Tuple[Connection, ...]

    @property
    def beams_used(self) -> frozenset:
        return frozenset(beam.beam_id for beam in self.beams)

    @property
    def peg_connections(self) -> Tuple[Connection, ...]:
        return tuple(c for c in self.connections if c.requires_peg)

    def beam(self, beam_id: str) -> Optional[BeamSpec]:
        for beam in self.beams:
            if beam.beam_id == beam_id:
                return beam
        return None


class LayoutTemplate(BaseModel):
    """Starting slots on the A2 template"""

    model_config = ConfigDict(frozen=True)

    slots: Dict[str, str] = Field(description="beam_id -> slot identifier")
    peg_slots: Tuple[str, ...] = Field(description="Peg holder slots, in order.")

    @model_validator(mode="after")
    def check_slots(self) -> "LayoutTemplate":
        every = list(self.slots.values()) + list(self.peg_slots)
        if len(set(every)) != len(every):
            raise ValueError("slot identifiers must be unique")
        if len(self.peg_slots) > MAX_PEGS:
            raise ValueError(f"at most {MAX_PEGS} peg slots")
        return self

    @property
    def peg_ids(self) -> Tuple[str, ...]:
        return tuple(f"p{n}" for n in range(1, len(self.peg_slots) + 1))

    def peg_slot(self, peg_id: str) -> str:
        return self.peg_slots[self.peg_ids.index(peg_id)]


class AssemblyCatalog(BaseModel):
    model_config = ConfigDict(frozen=True)

    beams: Tuple[BeamSpec, ...]
    goals: Tuple[GoalConfiguration, ...]
    layout: LayoutTemplate

    def goal(self, goal_id: str) -> Optional[GoalConfiguration]:
        for goal in self.goals:
            if goal.goal_id == goal_id:
                return goal
        return None

    def goals_of(self, assembly_class: AssemblyClass) -> List[GoalConfiguration]:
        return sorted(
            (g for g in self.goals if g.assembly_class == assembly_class),
            key=lambda g: g.goal_id,
        )


class ValidationIssue(BaseModel):
    code: str
    message: str


class ValidationReport(BaseModel):
    errors: List[ValidationIssue] = Field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.errors

    @property
    def codes(self) -> List[str]:
        return [issue.code for issue in self.errors]


class BeamStatus(str, Enum):
    ON_TEMPLATE = "on_template"
    IN_HAND = "in_hand"
    ASSEMBLED = "assembled"


class PegStatus(str, Enum):
    IN_HOLDER = "in_holder"
    IN_HAND = "in_hand"
    INSERTED = "inserted"
    DROPPED = "dropped"


class BeamPlacement(BaseModel):
    model_config = ConfigDict(frozen=True)

    status: BeamStatus
    slot: Optional[str] = None


class PegPlacement(BaseModel):
    model_config = ConfigDict(frozen=True)

    status: PegStatus
    slot: Optional[str] = None
    connection: Optional[Connection] = None


class WorldState(BaseModel):
    """Symbolic state of beams, pegs and the robot at one step"""

    model_config = ConfigDict(frozen=True)

    beam_at: Dict[str, BeamPlacement]
    peg_at: Dict[str, PegPlacement]
    robot_loc: str
    hand: Optional[str] = Field(default=None, description="Held thing, None if empty.")
    mated: FrozenSet[Connection] = Field(default_factory=frozenset)
    step: int = Field(default=0, ge=0)

    def fastened(self) -> frozenset:
        return frozenset(
            placement.connection
            for placement in self.peg_at.values()
            if placement.status == PegStatus.INSERTED
        )


class ConnectionStatus(str, Enum):
    UNSATISFIED = "unsatisfied"
    MATED_ONLY = "mated_only"
    FASTENED = "fastened"


class SatisfactionReport(BaseModel):
    per_connection: Dict[str, ConnectionStatus] = Field(
        description="Connection key -> status."
    )
    completion_pct: float = Field(ge=0, le=100)


class Skill(str, Enum):
    MOVE = "move"
    PICK_UP = "pick_up"
    PUT_DOWN = "put_down"
    ASSEMBLE_SQUARE = "assemble_square"
    ASSEMBLE_CAP = "assemble_cap"
    FASTEN = "fasten"
    PUSH = "push"


class EventKind(str, Enum):
    SKILL_STARTED = "skill_started"
    SKILL_SUCCEEDED = "skill_succeeded"
    SKILL_FAILED = "skill_failed"
    PEG_INSERTED = "peg_inserted"
    PEG_DROPPED = "peg_dropped"
    RUN_ENDED = "run_ended"


class ExecutionEvent(BaseModel):
    """One timestamped event of a simulated run"""

    model_config = ConfigDict(frozen=True)

    t_s: float = Field(ge=0)
    kind: EventKind
    skill: Optional[Skill] = None
    args: Tuple[str, ...] = ()
    attempt_index: int = Field(default=0, ge=0)
    subject: Optional[str] = Field(
        default=None, description="Beam or peg the event acts on."
    )
    connections: Tuple[Connection, ...] = ()

    @model_validator(mode="after")
    def check_kind(self) -> "ExecutionEvent":
        if self.kind == EventKind.PEG_INSERTED and len(self.connections) != 1:
            raise ValueError("peg_inserted carries exactly the fastened connection")
        return self
