import logging
from collections import defaultdict
from pathlib import Path
from typing import Dict, Iterable, Iterator, List, Union

from assembly.errors import DescriptionError

from .language_models import (
    BridgeMap,
    BridgeRule,
    Declaration,
    GroundAtom,
    GroundedBridge,
    GroundedDomain,
    Inequality,
    Literal,
    Position,
    SymbolicState,
    Term,
    format_atom,
)
from .parser import (
    DECLARATION_STATEMENT,
    RULE_STATEMENT,
    SECTION_PATTERN,
    parse_statement,
    split_lines,
    to_atom,
    to_body,
)

logger = logging.getLogger(__name__)

BRIDGE_SECTIONS = ("statics", "rules")


def parse_bridge(text: Union[str, bytes]) -> BridgeMap:
    """Parse a bridge file: bridge-only statics plus ``coarse_atom iff body.`` rules."""
    section = None
    statics: Dict[str, Declaration] = {}
    rules: List[BridgeRule] = []
    for line, offset, statement in split_lines(text):
        header = SECTION_PATTERN.match(statement)
        if header:
            section = header.group(1)
            if section not in BRIDGE_SECTIONS:
                raise DescriptionError(
                    "PARSE_ERROR", f"line {line}: unknown section {section!r}", line=line
                )
            continue
        if section is None:
            raise DescriptionError(
                "PARSE_ERROR", f"line {line}: statement outside a section", line=line
            )
        position = Position(line=line, column=offset + 1)
        if section == "statics":
            result = parse_statement(DECLARATION_STATEMENT, statement, line, offset)
            statics[result["name"]] = Declaration(
                name=result["name"],
                sorts=tuple(result.get("sorts") or ()),
                position=position,
            )
        else:
            result = parse_statement(RULE_STATEMENT, statement, line, offset)
            head = to_atom(result["head"])
            if any(rule.head.predicate == head.predicate for rule in rules):
                raise DescriptionError(
                    "BRIDGE_ERROR",
                    f"line {line}: second rule for {head.predicate}",
                    symbol=head.predicate,
                )
            rules.append(
                BridgeRule(head=head, body=to_body(result.get("body")), position=position)
            )
    return BridgeMap(statics=statics, rules=tuple(rules))


def load_bridge(path: Path) -> BridgeMap:
    path = Path(path)
    if not path.is_file():
        raise DescriptionError("MISSING_FILE", f"{path} does not exist", path=str(path))
    try:
        return parse_bridge(path.read_text(encoding="utf-8"))
    except OSError as e:
        raise DescriptionError("IO_ERROR", f"cannot read {path}: {e}", path=str(path)) from e


def _check(bridge: BridgeMap, coarse: GroundedDomain, fine: GroundedDomain):
    coarse_desc = coarse.description
    fine_desc = fine.description
    for predicate in coarse_desc.fluents:
        if bridge.rule_for(predicate) is None:
            raise DescriptionError(
                "BRIDGE_ERROR", f"no bridge rule for coarse fluent {predicate}", symbol=predicate
            )
    for rule in bridge.rules:
        declaration = coarse_desc.fluents.get(rule.head.predicate)
        if declaration is None or len(declaration.sorts) != len(rule.head.args):
            raise DescriptionError(
                "BRIDGE_ERROR",
                f"{rule.head} is not a coarse fluent atom",
                symbol=rule.head.predicate,
            )
        for item in rule.body:
            if isinstance(item, Inequality):
                continue
            name = item.atom.predicate
            found = (
                fine_desc.fluents.get(name)
                or fine_desc.statics.get(name)
                or bridge.statics.get(name)
            )
            if found is None:
                raise DescriptionError(
                    "UNDECLARED_SYMBOL", f"bridge rule uses undeclared {name}", symbol=name
                )
            if len(found.sorts) != len(item.atom.args):
                raise DescriptionError(
                    "SORT_ERROR", f"{item.atom} takes {len(found.sorts)} arguments", symbol=name
                )


class _RuleGrounder:
    def __init__(self, rule: BridgeRule, fine: GroundedDomain, facts: Dict[str, List[tuple]]):
        self.rule = rule
        self.fine = fine
        self.facts = facts
        fine_fluents = fine.description.fluents
        self.joins = [
            item
            for item in rule.body
            if isinstance(item, Literal) and item.positive and item.atom.predicate not in fine_fluents
        ]
        self.checks = [
            item
            for item in rule.body
            if isinstance(item, Inequality)
            or (not item.positive and item.atom.predicate not in fine_fluents)
        ]
        self.fluents = [
            item
            for item in rule.body
            if isinstance(item, Literal) and item.atom.predicate in fine_fluents
        ]
        self.domains: Dict[str, set] = {}
        for item in self.fluents:
            sorts = fine.description.fluents[item.atom.predicate].sorts
            for term, sort in zip(item.atom.args, sorts):
                if term.is_variable:
                    members = set(fine.constants.get(sort, ()))
                    self.domains[term.name] = self.domains.get(term.name, members) & members

    @staticmethod
    def _value(term: Term, binding: Dict[str, str]):
        return binding.get(term.name) if term.is_variable else term.name

    def _join(self, index: int, binding: Dict[str, str]) -> Iterator[Dict[str, str]]:
        if index == len(self.joins):
            yield from self._enumerate(binding)
            return
        atom = self.joins[index].atom
        for fact in self.facts.get(atom.predicate, ()):
            extended = dict(binding)
            for term, value in zip(atom.args, fact[1:]):
                known = self._value(term, extended)
                if known is None:
                    extended[term.name] = value
                elif known != value:
                    break
            else:
                yield from self._join(index + 1, extended)

    def _enumerate(self, binding: Dict[str, str]) -> Iterator[Dict[str, str]]:
        free = sorted(name for name in self.domains if name not in binding)
        if not free:
            yield binding
            return
        name = free[0]
        for value in sorted(self.domains[name]):
            yield from self._enumerate({**binding, name: value})

    def formula(self, atom: GroundAtom) -> tuple:
        binding: Dict[str, str] = {}
        for term, value in zip(self.rule.head.args, atom[1:]):
            known = self._value(term, binding)
            if known is not None and known != value:
                return ()
            if term.is_variable:
                binding[term.name] = value

        conjunctions = set()
        for full in self._join(0, binding):
            if not all(self._holds(item, full) for item in self.checks):
                continue
            conjunction = []
            possible = True
            for item in self.fluents:
                ground = (item.atom.predicate,) + tuple(
                    self._value(t, full) for t in item.atom.args
                )
                if ground not in self.fine.atom_set:
                    if item.positive:
                        possible = False
                        break
                    continue
                conjunction.append((ground, item.positive))
            if possible:
                conjunctions.add(tuple(sorted(set(conjunction))))
        return tuple(sorted(conjunctions))

    def _holds(self, item, binding: Dict[str, str]) -> bool:
        if isinstance(item, Inequality):
            return self._value(item.left, binding) != self._value(item.right, binding)
        ground = (item.atom.predicate,) + tuple(self._value(t, binding) for t in item.atom.args)
        return ground not in self.facts.get(item.atom.predicate, ())


def ground_bridge(
    bridge: BridgeMap,
    coarse: GroundedDomain,
    fine: GroundedDomain,
    statics: Iterable[GroundAtom] = (),
) -> GroundedBridge:
    _check(bridge, coarse, fine)
    bridge_statics = frozenset(tuple(atom) for atom in statics)
    for atom in bridge_statics:
        if atom[0] not in bridge.statics:
            raise DescriptionError(
                "UNDECLARED_SYMBOL", f"{atom[0]} is not a bridge static", symbol=atom[0]
            )
    facts: Dict[str, List[tuple]] = defaultdict(list)
    for atom in sorted(bridge_statics | fine.statics):
        facts[atom[0]].append(atom)

    grounders = {rule.head.predicate: _RuleGrounder(rule, fine, facts) for rule in bridge.rules}
    formulas = {atom: grounders[atom[0]].formula(atom) for atom in coarse.atoms}
    logger.debug("Grounded bridge over %d coarse atoms", len(formulas))
    return GroundedBridge(
        bridge=bridge, coarse=coarse, fine=fine, statics=bridge_statics, formulas=formulas
    )


def abstract(bridge: GroundedBridge, fine_state: SymbolicState) -> SymbolicState:
    """The coarse state a fine state stands for."""
    true = fine_state.true
    holding = frozenset(
        atom
        for atom, formula in bridge.formulas.items()
        if any(all((a in true) == positive for a, positive in conj) for conj in formula)
    )
    return SymbolicState(true=holding, statics=bridge.coarse.statics)


def describe_difference(expected: SymbolicState, actual: SymbolicState) -> str:
    missing = sorted(format_atom(a) for a in expected.true - actual.true)
    extra = sorted(format_atom(a) for a in actual.true - expected.true)
    return f"missing {missing}, unexpected {extra}"

