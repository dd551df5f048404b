from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, FrozenSet, Iterable, List, Mapping, Optional, Tuple

# ground atoms and ground actions are plain tuples: ("loc", "rob", "home")
GroundAtom = Tuple[str, ...]
GroundLiteral = Tuple[GroundAtom, bool]


class Resolution(str, Enum):
    COARSE = "coarse"
    FINE = "fine"


class AxiomKind(str, Enum):
    CAUSAL_LAW = "causal_law"
    STATE_CONSTRAINT = "state_constraint"
    EXECUTABILITY = "executability"


@dataclass(frozen=True)
class Term:
    name: str

    @property
    def is_variable(self) -> bool:
        return self.name[:1].isupper()


@dataclass(frozen=True)
class Atom:
    predicate: str
    args: Tuple[Term, ...] = ()

    def __str__(self) -> str:
        if not self.args:
            return self.predicate
        return f"{self.predicate}({', '.join(t.name for t in self.args)})"


@dataclass(frozen=True)
class Literal:
    atom: Atom
    positive: bool = True

    def __str__(self) -> str:
        return ("" if self.positive else "-") + str(self.atom)


@dataclass(frozen=True)
class Inequality:
    left: Term
    right: Term

    def __str__(self) -> str:
        return f"{self.left.name} != {self.right.name}"


@dataclass(frozen=True)
class Position:
    line: int
    column: int = 1


@dataclass(frozen=True)
class Axiom:
    """causal_law: trigger causes head if body; state_constraint: head if body;
    executability: impossible trigger if body."""

    kind: AxiomKind
    head: Optional[Literal]
    body: Tuple[object, ...]
    trigger: Optional[Atom] = None
    position: Optional[Position] = None

    def literals(self) -> Iterable[Literal]:
        if self.head is not None:
            yield self.head
        for item in self.body:
            if isinstance(item, Literal):
                yield item

    def atoms(self) -> Iterable[Atom]:
        if self.trigger is not None:
            yield self.trigger
        for lit in self.literals():
            yield lit.atom


@dataclass(frozen=True)
class Declaration:
    name: str
    sorts: Tuple[str, ...]
    position: Optional[Position] = None


@dataclass(frozen=True)
class SystemDescription:
    resolution: Resolution
    sort_parents: Mapping[str, Optional[str]]
    statics: Mapping[str, Declaration]
    fluents: Mapping[str, Declaration]
    actions: Mapping[str, Declaration]
    axioms: Tuple[Axiom, ...]

    @property
    def sorts(self) -> Tuple[str, ...]:
        return tuple(self.sort_parents)

    def children(self, sort: str) -> List[str]:
        return [s for s, parent in self.sort_parents.items() if parent == sort]

    def leaves_under(self, sort: str) -> FrozenSet[str]:
        kids = self.children(sort)
        if not kids:
            return frozenset({sort})
        found = set()
        for kid in kids:
            found |= self.leaves_under(kid)
        return frozenset(found)

    @property
    def leaf_sorts(self) -> FrozenSet[str]:
        return frozenset(s for s in self.sort_parents if not self.children(s))

    def declaration(self, name: str) -> Optional[Declaration]:
        for table in (self.fluents, self.statics, self.actions):
            if name in table:
                return table[name]
        return None


@dataclass(frozen=True)
class GroundCausalLaw:
    action: GroundAtom
    head: GroundLiteral
    body: Tuple[GroundLiteral, ...]


@dataclass(frozen=True)
class GroundConstraint:
    head: GroundLiteral
    body: Tuple[GroundLiteral, ...]


@dataclass(frozen=True)
class GroundExecutability:
    action: GroundAtom
    body: Tuple[GroundLiteral, ...]


@dataclass
class GroundedDomain:
    """A description grounded over one set of constants. Treat as read-only."""

    description: SystemDescription
    constants: Dict[str, Tuple[str, ...]]
    statics: FrozenSet[GroundAtom]
    atoms: Tuple[GroundAtom, ...]
    ground_actions: Tuple[GroundAtom, ...]
    causal_laws: Tuple[GroundCausalLaw, ...]
    constraints: Tuple[GroundConstraint, ...]
    executability: Tuple[GroundExecutability, ...]
    laws_by_action: Dict[GroundAtom, Tuple[GroundCausalLaw, ...]] = field(
        default_factory=dict
    )
    blockers_by_action: Dict[GroundAtom, Tuple[GroundExecutability, ...]] = field(
        default_factory=dict
    )
    constraints_by_atom: Dict[GroundAtom, Tuple[GroundConstraint, ...]] = field(
        default_factory=dict
    )
    atom_set: FrozenSet[GroundAtom] = frozenset()
    action_set: FrozenSet[GroundAtom] = frozenset()

    @property
    def ground_axioms(self) -> Tuple[object, ...]:
        return self.causal_laws + self.constraints + self.executability


@dataclass(frozen=True)
class SymbolicState:
    """Complete assignment: atoms in ``true`` hold, every other fluent atom is false."""

    true: FrozenSet[GroundAtom]
    statics: FrozenSet[GroundAtom] = frozenset()

    def holds(self, atom: GroundAtom) -> bool:
        return atom in self.true

    def satisfies(self, literals: Iterable[GroundLiteral]) -> bool:
        true = self.true
        return all((atom in true) == positive for atom, positive in literals)

    def __hash__(self) -> int:
        return hash(self.true)

    def __eq__(self, other) -> bool:
        return isinstance(other, SymbolicState) and self.true == other.true


def format_atom(atom: GroundAtom) -> str:
    if len(atom) == 1:
        return atom[0]
    return f"{atom[0]}({', '.join(atom[1:])})"


def format_literal(literal: GroundLiteral) -> str:
    atom, positive = literal
    return ("" if positive else "-") + format_atom(atom)


@dataclass(frozen=True)
class BridgeRule:
    head: Atom
    body: Tuple[object, ...]
    position: Optional[Position] = None


@dataclass(frozen=True)
class BridgeMap:
    """Rules tying every coarse fluent to a formula over fine atoms."""

    statics: Mapping[str, Declaration]
    rules: Tuple[BridgeRule, ...]

    def rule_for(self, predicate: str) -> Optional[BridgeRule]:
        for rule in self.rules:
            if rule.head.predicate == predicate:
                return rule
        return None


@dataclass
class GroundedBridge:
    """Per coarse atom, a disjunction of conjunctions of fine fluent literals."""

    bridge: BridgeMap
    coarse: "GroundedDomain"
    fine: "GroundedDomain"
    statics: FrozenSet[GroundAtom]
    formulas: Dict[GroundAtom, Tuple[Tuple[GroundLiteral, ...], ...]]
