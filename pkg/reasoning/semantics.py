from typing import Dict, Iterable, List, Mapping, Optional, Set

from assembly.errors import TransitionError

from .language_models import (
    GroundAtom,
    GroundConstraint,
    GroundedDomain,
    SymbolicState,
    format_atom,
)


def applicable(state: SymbolicState, action: GroundAtom, domain: GroundedDomain) -> bool:
    """False iff the body of some executability condition for ``action`` holds."""
    if action not in domain.action_set:
        return False
    return not any(
        state.satisfies(blocker.body)
        for blocker in domain.blockers_by_action.get(action, ())
    )


def _settle(
    domain: GroundedDomain,
    true: Set[GroundAtom],
    forced: Dict[GroundAtom, bool],
    worklist: List[GroundConstraint],
    origin: str,
):
    """
    Propagate state constraints from ``worklist`` until nothing changes.

    ``forced`` holds values that may not be flipped again: direct effects and
    everything a constraint derived. Inertial values may be overridden once.
    """
    queued = set(worklist)
    budget = 4 * (len(domain.atoms) + 1) * (len(domain.constraints) + 1)
    while worklist:
        budget -= 1
        if budget < 0:
            raise TransitionError(
                "AMBIGUOUS_CLOSURE", f"constraint closure does not converge after {origin}"
            )
        constraint = worklist.pop()
        queued.discard(constraint)
        if not all((atom in true) == positive for atom, positive in constraint.body):
            continue
        atom, positive = constraint.head
        previous = forced.get(atom)
        if previous is not None and previous != positive:
            raise TransitionError(
                "INCONSISTENT",
                f"{format_atom(atom)} is forced both ways after {origin}",
                atom=atom,
            )
        forced[atom] = positive
        if (atom in true) == positive:
            continue
        if positive:
            true.add(atom)
        else:
            true.discard(atom)
        for follower in domain.constraints_by_atom.get(atom, ()):
            if follower not in queued:
                queued.add(follower)
                worklist.append(follower)


def _check_closed(
    domain: GroundedDomain,
    true: Set[GroundAtom],
    constraints: Iterable[GroundConstraint],
    origin: str,
):
    for constraint in constraints:
        if all((atom in true) == positive for atom, positive in constraint.body):
            atom, positive = constraint.head
            if (atom in true) != positive:
                raise TransitionError(
                    "AMBIGUOUS_CLOSURE",
                    f"closure after {origin} leaves {format_atom(atom)} unsupported",
                    atom=atom,
                )


def successor(
    state: SymbolicState, action: GroundAtom, domain: GroundedDomain
) -> SymbolicState:
    """
    Apply ``action``: direct effects from the causal laws whose bodies hold in
    ``state``, inertia for everything else, then closure under the state
    constraints.
    """
    origin = format_atom(action)
    if action not in domain.action_set:
        raise TransitionError("NOT_APPLICABLE", f"{origin} is not a ground action of the domain")
    if not applicable(state, action, domain):
        raise TransitionError("NOT_APPLICABLE", f"{origin} is not executable", action=action)

    effects: Dict[GroundAtom, bool] = {}
    for law in domain.laws_by_action.get(action, ()):
        if not state.satisfies(law.body):
            continue
        atom, positive = law.head
        if effects.get(atom, positive) != positive:
            raise TransitionError(
                "INCONSISTENT", f"{origin} causes {format_atom(atom)} both ways", atom=atom
            )
        effects[atom] = positive

    true = set(state.true)
    worklist: List[GroundConstraint] = []
    seen = set()
    for atom, positive in effects.items():
        if positive:
            true.add(atom)
        else:
            true.discard(atom)
        for constraint in domain.constraints_by_atom.get(atom, ()):
            if constraint not in seen:
                seen.add(constraint)
                worklist.append(constraint)

    forced = dict(effects)
    _settle(domain, true, forced, worklist, origin)

    touched = set()
    for atom in set(state.true) ^ true:
        touched.update(domain.constraints_by_atom.get(atom, ()))
    _check_closed(domain, true, touched, origin)
    return SymbolicState(true=frozenset(true), statics=state.statics)


def close(
    domain: GroundedDomain,
    true: Iterable[GroundAtom],
    fixed: Optional[Mapping[GroundAtom, bool]] = None,
) -> SymbolicState:
    """
    Closure of an initial assignment: ``true`` atoms hold, all other fluent
    atoms are false, then every state constraint is applied to a fixpoint.
    Values in ``fixed`` may not be overridden by the constraints.
    """
    true = set(true)
    unknown = true - domain.atom_set
    if unknown:
        raise TransitionError(
            "INCONSISTENT",
            f"not fluent atoms of the domain: {sorted(format_atom(a) for a in unknown)}",
        )
    forced = dict(fixed or {})
    for atom, positive in forced.items():
        if positive:
            true.add(atom)
        else:
            true.discard(atom)
    _settle(domain, true, forced, list(reversed(domain.constraints)), "the initial state")
    _check_closed(domain, true, domain.constraints, "the initial state")
    return SymbolicState(true=frozenset(true), statics=domain.statics)


def is_closed(state: SymbolicState, domain: GroundedDomain) -> bool:
    """Exhaustive re-check of every ground state constraint."""
    try:
        _check_closed(domain, set(state.true), domain.constraints, "check")
    except TransitionError:
        return False
    return True
