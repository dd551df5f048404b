import logging
import re
from collections import defaultdict
from pathlib import Path
from typing import Dict, FrozenSet, List, Optional, Tuple, Union

from pyparsing import (
    Group,
    Keyword,
    Literal as Lit,
    Optional as Opt,
    ParseException,
    ParseResults,
    Suppress,
    Word,
    ZeroOrMore,
    alphanums,
    alphas,
)

from assembly.errors import DescriptionError

from .language_models import (
    Atom,
    Axiom,
    AxiomKind,
    Declaration,
    Inequality,
    Literal,
    Position,
    Resolution,
    SystemDescription,
    Term,
)

logger = logging.getLogger(__name__)

CAUSES = Keyword("causes")
IF = Keyword("if")
IFF = Keyword("iff")
IMPOSSIBLE = Keyword("impossible")

RESERVED = frozenset({"causes", "if", "iff", "impossible"})
NAME = Word(alphas, alphanums + "_").add_condition(lambda tokens: tokens[0] not in RESERVED)
PERIOD = Suppress(".")


def _comma_list(expr):
    return expr + ZeroOrMore(Suppress(",") + expr)


ATOM = Group(
    NAME("predicate")
    + Opt(Suppress("(") + Group(_comma_list(NAME))("args") + Suppress(")"))
)
LITERAL = Group(Opt(Lit("-"))("negated") + ATOM("atom"))
INEQUALITY = Group(NAME("left") + Suppress("!=") + NAME("right"))
BODY = Group(_comma_list(INEQUALITY | LITERAL))

SORT_STATEMENT = NAME("sort") + Opt(Suppress("<") + NAME("parent")) + PERIOD
DECLARATION_STATEMENT = (
    NAME("name")
    + Opt(Suppress("(") + Group(_comma_list(NAME))("sorts") + Suppress(")"))
    + PERIOD
)
CAUSAL_STATEMENT = ATOM("trigger") + CAUSES + LITERAL("head") + Opt(IF + BODY("body")) + PERIOD
EXECUTABILITY_STATEMENT = IMPOSSIBLE + ATOM("trigger") + Opt(IF + BODY("body")) + PERIOD
CONSTRAINT_STATEMENT = LITERAL("head") + Opt(IF + BODY("body")) + PERIOD
RULE_STATEMENT = ATOM("head") + IFF + BODY("body") + PERIOD

SECTION_PATTERN = re.compile(r"^([a-z_]+)\s*:$")
DESCRIPTION_SECTIONS = ("sorts", "statics", "fluents", "actions", "axioms")

BodyItem = Union[Literal, Inequality]


def split_lines(text: Union[str, bytes]):
    """Yield (line number, column offset, statement) for every non-blank line."""
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    for number, raw in enumerate(text.splitlines(), start=1):
        raw = raw.split("%", 1)[0].rstrip()
        statement = raw.strip()
        if statement:
            yield number, len(raw) - len(raw.lstrip()), statement


def parse_statement(grammar, statement: str, line: int, offset: int) -> ParseResults:
    try:
        return grammar.parse_string(statement, parse_all=True)
    except ParseException as e:
        raise DescriptionError(
            "PARSE_ERROR",
            f"line {line}, column {e.col + offset}: {e.msg} in {statement!r}",
            line=line,
            column=e.col + offset,
        ) from e


def to_atom(result: ParseResults) -> Atom:
    args = result.get("args")
    return Atom(
        predicate=result["predicate"],
        args=tuple(Term(name) for name in args) if args else (),
    )


def to_literal(result: ParseResults) -> Literal:
    return Literal(atom=to_atom(result["atom"]), positive=not result.get("negated"))


def to_body(result: Optional[ParseResults]) -> Tuple[BodyItem, ...]:
    if not result:
        return ()
    items = []
    for item in result:
        if "left" in item:
            items.append(Inequality(Term(item["left"]), Term(item["right"])))
        else:
            items.append(to_literal(item))
    return tuple(items)


def _axiom(statement: str, line: int, offset: int) -> Axiom:
    position = Position(line=line, column=offset + 1)
    if re.match(r"impossible\b", statement):
        result = parse_statement(EXECUTABILITY_STATEMENT, statement, line, offset)
        return Axiom(
            kind=AxiomKind.EXECUTABILITY,
            head=None,
            body=to_body(result.get("body")),
            trigger=to_atom(result["trigger"]),
            position=position,
        )
    if re.search(r"\bcauses\b", statement):
        result = parse_statement(CAUSAL_STATEMENT, statement, line, offset)
        return Axiom(
            kind=AxiomKind.CAUSAL_LAW,
            head=to_literal(result["head"]),
            body=to_body(result.get("body")),
            trigger=to_atom(result["trigger"]),
            position=position,
        )
    result = parse_statement(CONSTRAINT_STATEMENT, statement, line, offset)
    return Axiom(
        kind=AxiomKind.STATE_CONSTRAINT,
        head=to_literal(result["head"]),
        body=to_body(result.get("body")),
        position=position,
    )


def _where(position: Optional[Position]) -> str:
    return f"line {position.line}" if position else "unknown line"


def _check_sorts(sort_parents: Dict[str, Optional[str]], positions: Dict[str, Position]):
    for sort, parent in sort_parents.items():
        if parent is not None and parent not in sort_parents:
            raise DescriptionError(
                "UNDECLARED_SYMBOL",
                f"{_where(positions.get(sort))}: sort {sort} extends undeclared sort {parent}",
                symbol=parent,
            )
    for sort in sort_parents:
        seen = {sort}
        parent = sort_parents[sort]
        while parent is not None:
            if parent in seen:
                raise DescriptionError(
                    "SORT_ERROR", f"sort hierarchy has a cycle through {sort}", symbol=sort
                )
            seen.add(parent)
            parent = sort_parents[parent]


def variable_sorts(axiom: Axiom, desc: SystemDescription) -> Dict[str, FrozenSet[str]]:
    """
    Leaf sorts each variable of ``axiom`` may range over: the intersection of
    the sorts of every argument position it occupies.
    """
    allowed: Dict[str, FrozenSet[str]] = {}
    for atom in axiom.atoms():
        declaration = desc.declaration(atom.predicate)
        for term, sort in zip(atom.args, declaration.sorts):
            if not term.is_variable:
                continue
            leaves = desc.leaves_under(sort)
            allowed[term.name] = allowed.get(term.name, leaves) & leaves
    return allowed


def _check_axiom(axiom: Axiom, desc: SystemDescription):
    where = _where(axiom.position)

    def declared(atom: Atom, *tables: str):
        declaration = desc.declaration(atom.predicate)
        if declaration is None:
            raise DescriptionError(
                "UNDECLARED_SYMBOL",
                f"{where}: {atom.predicate} is not declared",
                symbol=atom.predicate,
                line=axiom.position.line if axiom.position else None,
            )
        if not any(atom.predicate in getattr(desc, table) for table in tables):
            raise DescriptionError(
                "MISPLACED_SYMBOL",
                f"{where}: {atom.predicate} cannot be used there",
                symbol=atom.predicate,
            )
        if len(atom.args) != len(declaration.sorts):
            raise DescriptionError(
                "SORT_ERROR",
                f"{where}: {atom} takes {len(declaration.sorts)} arguments",
                symbol=atom.predicate,
            )

    if axiom.trigger is not None:
        declared(axiom.trigger, "actions")
    if axiom.head is not None:
        declared(axiom.head.atom, "fluents")
    for item in axiom.body:
        if isinstance(item, Literal):
            declared(item.atom, "fluents", "statics")

    allowed = variable_sorts(axiom, desc)
    for name, leaves in allowed.items():
        if not leaves:
            raise DescriptionError(
                "SORT_ERROR",
                f"{where}: variable {name} is used with incompatible sorts",
                variable=name,
            )
    for item in axiom.body:
        if isinstance(item, Inequality):
            for term in (item.left, item.right):
                if term.is_variable and term.name not in allowed:
                    raise DescriptionError(
                        "SORT_ERROR",
                        f"{where}: variable {term.name} only occurs in {item}",
                        variable=term.name,
                    )


def _check_stratified(desc: SystemDescription):
    edges = defaultdict(set)
    negative = []
    for axiom in desc.axioms:
        if axiom.kind != AxiomKind.STATE_CONSTRAINT:
            continue
        head = axiom.head.atom.predicate
        for item in axiom.body:
            if isinstance(item, Literal) and item.atom.predicate in desc.fluents:
                edges[item.atom.predicate].add(head)
                if not item.positive:
                    negative.append((item.atom.predicate, head, axiom))

    def reaches(start: str, target: str) -> bool:
        stack, seen = [start], {start}
        while stack:
            node = stack.pop()
            if node == target:
                return True
            for nxt in edges[node] - seen:
                seen.add(nxt)
                stack.append(nxt)
        return False

    for source, head, axiom in negative:
        if reaches(head, source):
            raise DescriptionError(
                "NON_STRATIFIED",
                f"{_where(axiom.position)}: {head} depends on itself through -{source}",
                symbol=head,
            )


def parse_description(
    text: Union[str, bytes], resolution: Resolution = Resolution.COARSE
) -> SystemDescription:
    """
    Parse a system description written in the sectioned description language.

    Raises DescriptionError with PARSE_ERROR, UNDECLARED_SYMBOL, SORT_ERROR,
    MISPLACED_SYMBOL, DUPLICATE_SYMBOL or NON_STRATIFIED.
    """
    section = None
    sort_parents: Dict[str, Optional[str]] = {}
    sort_positions: Dict[str, Position] = {}
    tables: Dict[str, Dict[str, Declaration]] = {
        "statics": {},
        "fluents": {},
        "actions": {},
    }
    axioms: List[Axiom] = []

    for line, offset, statement in split_lines(text):
        header = SECTION_PATTERN.match(statement)
        if header:
            section = header.group(1)
            if section not in DESCRIPTION_SECTIONS:
                raise DescriptionError(
                    "PARSE_ERROR", f"line {line}: unknown section {section!r}", line=line
                )
            continue
        if section is None:
            raise DescriptionError(
                "PARSE_ERROR", f"line {line}: statement outside a section", line=line
            )
        position = Position(line=line, column=offset + 1)

        if section == "sorts":
            result = parse_statement(SORT_STATEMENT, statement, line, offset)
            sort = result["sort"]
            if sort in sort_parents:
                raise DescriptionError(
                    "DUPLICATE_SYMBOL", f"line {line}: sort {sort} declared twice", symbol=sort
                )
            sort_parents[sort] = result.get("parent")
            sort_positions[sort] = position
        elif section == "axioms":
            axioms.append(_axiom(statement, line, offset))
        else:
            result = parse_statement(DECLARATION_STATEMENT, statement, line, offset)
            name = result["name"]
            if any(name in table for table in tables.values()):
                raise DescriptionError(
                    "DUPLICATE_SYMBOL", f"line {line}: {name} declared twice", symbol=name
                )
            sorts = tuple(result.get("sorts") or ())
            for sort in sorts:
                if sort not in sort_parents:
                    raise DescriptionError(
                        "UNDECLARED_SYMBOL",
                        f"line {line}: {name} uses undeclared sort {sort}",
                        symbol=sort,
                        line=line,
                    )
            tables[section][name] = Declaration(name=name, sorts=sorts, position=position)

    _check_sorts(sort_parents, sort_positions)
    desc = SystemDescription(
        resolution=resolution,
        sort_parents=sort_parents,
        statics=tables["statics"],
        fluents=tables["fluents"],
        actions=tables["actions"],
        axioms=tuple(axioms),
    )
    for axiom in desc.axioms:
        _check_axiom(axiom, desc)
    _check_stratified(desc)

    logger.debug(
        "Parsed %s description: %d sorts, %d fluents, %d actions, %d axioms",
        resolution.value,
        len(sort_parents),
        len(desc.fluents),
        len(desc.actions),
        len(desc.axioms),
    )
    return desc


def load_description(path: Path, resolution: Resolution) -> SystemDescription:
    path = Path(path)
    if not path.is_file():
        raise DescriptionError("MISSING_FILE", f"{path} does not exist", path=str(path))
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise DescriptionError("IO_ERROR", f"cannot read {path}: {e}", path=str(path)) from e
    try:
        return parse_description(text, resolution)
    except DescriptionError as e:
        raise DescriptionError(e.code, f"{path.name}: {e.message}", path=str(path), **e.context) from e
