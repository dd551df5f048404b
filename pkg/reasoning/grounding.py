import itertools
import logging
from collections import defaultdict
from typing import Dict, FrozenSet, Iterable, Iterator, List, Mapping, Tuple

from assembly.errors import GroundingError

from .language_models import (
    Atom,
    Axiom,
    AxiomKind,
    GroundAtom,
    GroundCausalLaw,
    GroundConstraint,
    GroundedDomain,
    GroundExecutability,
    GroundLiteral,
    Inequality,
    Literal,
    SystemDescription,
    Term,
)
from .parser import variable_sorts

logger = logging.getLogger(__name__)

Binding = Dict[str, str]


def sort_members(
    desc: SystemDescription, constants: Mapping[str, Iterable[str]]
) -> Dict[str, Tuple[str, ...]]:
    """Constants of every declared sort; a parent sort holds the union of its leaves."""
    leaves = desc.leaf_sorts
    for sort in constants:
        if sort not in desc.sort_parents:
            raise GroundingError(
                "UNDECLARED_SYMBOL", f"constants given for unknown sort {sort}", sort=sort
            )
        if sort not in leaves:
            raise GroundingError(
                "SORT_ERROR",
                f"constants must belong to leaf sorts, {sort} has sub-sorts",
                sort=sort,
            )
    owner: Dict[str, str] = {}
    for sort, names in constants.items():
        for name in names:
            if name in owner and owner[name] != sort:
                raise GroundingError(
                    "SORT_ERROR",
                    f"constant {name} belongs to both {owner[name]} and {sort}",
                    constant=name,
                )
            owner[name] = sort
    members = {}
    for sort in desc.sort_parents:
        names = set()
        for leaf in desc.leaves_under(sort):
            names.update(constants.get(leaf, ()))
        members[sort] = tuple(sorted(names))
    return members


def instances(
    name: str, sorts: Tuple[str, ...], members: Mapping[str, Tuple[str, ...]]
) -> Iterator[GroundAtom]:
    for args in itertools.product(*(members[sort] for sort in sorts)):
        yield (name,) + args


def _check_statics(
    desc: SystemDescription,
    statics: Iterable[GroundAtom],
    members: Mapping[str, Tuple[str, ...]],
) -> FrozenSet[GroundAtom]:
    checked = set()
    for atom in statics:
        declaration = desc.statics.get(atom[0])
        if declaration is None:
            raise GroundingError(
                "UNDECLARED_SYMBOL", f"{atom[0]} is not a declared static", symbol=atom[0]
            )
        args = atom[1:]
        if len(args) != len(declaration.sorts) or any(
            arg not in members[sort] for arg, sort in zip(args, declaration.sorts)
        ):
            raise GroundingError(
                "SORT_ERROR", f"static fact {atom} does not match {declaration.sorts}"
            )
        checked.add(tuple(atom))
    return frozenset(checked)


def _resolve(atom: Atom, binding: Binding) -> GroundAtom:
    return (atom.predicate,) + tuple(
        binding[t.name] if t.is_variable else t.name for t in atom.args
    )


class _AxiomGrounder:
    """Enumerates the bindings of one axiom, pruning on statics and inequalities."""

    def __init__(
        self,
        axiom: Axiom,
        desc: SystemDescription,
        members: Mapping[str, Tuple[str, ...]],
        statics: FrozenSet[GroundAtom],
    ):
        self.axiom = axiom
        self.statics = statics
        allowed = variable_sorts(axiom, desc)
        self.domains = {
            name: tuple(sorted({c for leaf in leaves for c in members[leaf]}))
            for name, leaves in allowed.items()
        }
        self._check_constants(desc, members)

        # variables of static literals are bound first so pruning starts early
        order: List[str] = []
        static_items = [
            item
            for item in axiom.body
            if isinstance(item, Inequality) or item.atom.predicate in desc.statics
        ]
        for item in static_items:
            terms = (item.left, item.right) if isinstance(item, Inequality) else item.atom.args
            for term in terms:
                if term.is_variable and term.name not in order:
                    order.append(term.name)
        for atom in axiom.atoms():
            for term in atom.args:
                if term.is_variable and term.name not in order:
                    order.append(term.name)
        self.order = order

        # each static check fires at the depth where its last variable is bound
        self.checks_at: Dict[int, list] = defaultdict(list)
        for item in static_items:
            terms = (item.left, item.right) if isinstance(item, Inequality) else item.atom.args
            depth = max(
                (order.index(t.name) for t in terms if t.is_variable), default=-1
            )
            self.checks_at[depth].append(item)

    def _check_constants(self, desc: SystemDescription, members):
        for atom in self.axiom.atoms():
            declaration = desc.declaration(atom.predicate)
            for term, sort in zip(atom.args, declaration.sorts):
                if not term.is_variable and term.name not in members[sort]:
                    raise GroundingError(
                        "SORT_ERROR",
                        f"constant {term.name} in {atom} is not a {sort}",
                        constant=term.name,
                    )

    def _holds(self, item, binding: Binding) -> bool:
        if isinstance(item, Inequality):
            return self._value(item.left, binding) != self._value(item.right, binding)
        return (_resolve(item.atom, binding) in self.statics) == item.positive

    @staticmethod
    def _value(term: Term, binding: Binding) -> str:
        return binding[term.name] if term.is_variable else term.name

    def bindings(self) -> Iterator[Binding]:
        binding: Binding = {}
        if not all(self._holds(item, binding) for item in self.checks_at.get(-1, ())):
            return

        def extend(depth: int) -> Iterator[Binding]:
            if depth == len(self.order):
                yield dict(binding)
                return
            name = self.order[depth]
            for value in self.domains[name]:
                binding[name] = value
                if all(self._holds(item, binding) for item in self.checks_at.get(depth, ())):
                    yield from extend(depth + 1)
            binding.pop(name, None)

        yield from extend(0)


def _fluent_body(
    axiom: Axiom, desc: SystemDescription, binding: Binding
) -> Tuple[GroundLiteral, ...]:
    body = []
    for item in axiom.body:
        if isinstance(item, Literal) and item.atom.predicate in desc.fluents:
            literal = (_resolve(item.atom, binding), item.positive)
            if literal not in body:
                body.append(literal)
    return tuple(body)


def ground(
    desc: SystemDescription,
    constants: Mapping[str, Iterable[str]],
    statics: Iterable[GroundAtom] = (),
    allow_empty_sorts: bool = False,
) -> GroundedDomain:
    """
    Ground ``desc`` over sort memberships.

    Static body literals and inequalities are decided here, so the ground
    axioms only mention fluents. An executability condition left with an
    empty body blocks its action in every state.
    """
    members = sort_members(desc, constants)
    if not allow_empty_sorts:
        empty = sorted(sort for sort in desc.leaf_sorts if not members[sort])
        if empty:
            raise GroundingError(
                "EMPTY_SORT", f"no constants for sorts {', '.join(empty)}", sorts=empty
            )
    static_atoms = _check_statics(desc, statics, members)

    atoms = tuple(
        sorted(
            atom
            for name, declaration in desc.fluents.items()
            for atom in instances(name, declaration.sorts, members)
        )
    )
    ground_actions = tuple(
        sorted(
            action
            for name, declaration in desc.actions.items()
            for action in instances(name, declaration.sorts, members)
        )
    )

    causal_laws = set()
    constraints = set()
    executability = set()
    for axiom in desc.axioms:
        grounder = _AxiomGrounder(axiom, desc, members, static_atoms)
        for binding in grounder.bindings():
            body = _fluent_body(axiom, desc, binding)
            if axiom.kind == AxiomKind.CAUSAL_LAW:
                head = (_resolve(axiom.head.atom, binding), axiom.head.positive)
                causal_laws.add(
                    GroundCausalLaw(_resolve(axiom.trigger, binding), head, body)
                )
            elif axiom.kind == AxiomKind.STATE_CONSTRAINT:
                head = (_resolve(axiom.head.atom, binding), axiom.head.positive)
                if head not in body:
                    constraints.add(GroundConstraint(head, body))
            else:
                executability.add(
                    GroundExecutability(_resolve(axiom.trigger, binding), body)
                )

    causal_laws = tuple(sorted(causal_laws, key=lambda a: (a.action, a.head, a.body)))
    constraints = tuple(sorted(constraints, key=lambda a: (a.head, a.body)))
    executability = tuple(sorted(executability, key=lambda a: (a.action, a.body)))

    laws_by_action = defaultdict(list)
    for law in causal_laws:
        laws_by_action[law.action].append(law)
    blockers_by_action = defaultdict(list)
    for blocker in executability:
        blockers_by_action[blocker.action].append(blocker)
    constraints_by_atom = defaultdict(list)
    for constraint in constraints:
        touched = {constraint.head[0]} | {atom for atom, _ in constraint.body}
        for atom in sorted(touched):
            constraints_by_atom[atom].append(constraint)

    domain = GroundedDomain(
        description=desc,
        constants={sort: members[sort] for sort in desc.sort_parents},
        statics=static_atoms,
        atoms=atoms,
        ground_actions=ground_actions,
        causal_laws=causal_laws,
        constraints=constraints,
        executability=executability,
        laws_by_action={k: tuple(v) for k, v in laws_by_action.items()},
        blockers_by_action={k: tuple(v) for k, v in blockers_by_action.items()},
        constraints_by_atom={k: tuple(v) for k, v in constraints_by_atom.items()},
        atom_set=frozenset(atoms),
        action_set=frozenset(ground_actions),
    )
    logger.debug(
        "Grounded %s description: %d atoms, %d actions, %d axioms",
        desc.resolution.value,
        len(atoms),
        len(ground_actions),
        len(domain.ground_axioms),
    )
    return domain


def expected_action_count(desc: SystemDescription, members: Mapping[str, Tuple[str, ...]]) -> int:
    total = 0
    for declaration in desc.actions.values():
        count = 1
        for sort in declaration.sorts:
            count *= len(members[sort])
        total += count
    return total
