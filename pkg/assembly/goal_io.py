import logging
from pathlib import Path
from typing import List, Optional, Tuple, Union

from lxml import etree
from pydantic import ValidationError

from .assembly_models import (
    AssemblyCatalog,
    AssemblyClass,
    BeamSpec,
    Connection,
    GoalConfiguration,
    Insertion,
    JointSpec,
    LayoutTemplate,
)
from .errors import GoalError
from .world import validate_goal

logger = logging.getLogger(__name__)

CATALOG_BEAM_COUNT = 9
GOALS_PER_CLASS = 3

_ID_TYPE = """
  <xs:simpleType name="identifier">
    <xs:restriction base="xs:string">
      <xs:pattern value="[a-z0-9_\\-]+"/>
    </xs:restriction>
  </xs:simpleType>
"""

_BEAM_TYPES = """
  <xs:complexType name="joint">
    <xs:attribute name="index" type="xs:nonNegativeInteger" use="required"/>
    <xs:attribute name="kind" use="required">
      <xs:simpleType>
        <xs:restriction base="xs:string">
          <xs:enumeration value="socket"/>
          <xs:enumeration value="tab"/>
          <xs:enumeration value="cap"/>
        </xs:restriction>
      </xs:simpleType>
    </xs:attribute>
    <xs:attribute name="peg_hole" type="xs:boolean" use="required"/>
  </xs:complexType>
  <xs:complexType name="beam">
    <xs:sequence>
      <xs:element name="joint" type="joint" minOccurs="1" maxOccurs="unbounded"/>
    </xs:sequence>
    <xs:attribute name="id" type="identifier" use="required"/>
    <xs:attribute name="fixed" type="xs:boolean"/>
  </xs:complexType>
"""

GOAL_XSD = f"""<?xml version="1.0" encoding="UTF-8"?>
<xs:schema xmlns:xs="http://www.w3.org/2001/XMLSchema">
{_ID_TYPE}
{_BEAM_TYPES}
  <xs:complexType name="connection">
    <xs:attribute name="beam_a" type="identifier" use="required"/>
    <xs:attribute name="joint_a" type="xs:nonNegativeInteger" use="required"/>
    <xs:attribute name="beam_b" type="identifier" use="required"/>
    <xs:attribute name="joint_b" type="xs:nonNegativeInteger" use="required"/>
    <xs:attribute name="requires_peg" type="xs:boolean" use="required"/>
    <xs:attribute name="insertion">
      <xs:simpleType>
        <xs:restriction base="xs:string">
          <xs:enumeration value="standard"/>
          <xs:enumeration value="angled"/>
          <xs:enumeration value="slide"/>
        </xs:restriction>
      </xs:simpleType>
    </xs:attribute>
  </xs:complexType>
  <xs:element name="assembly">
    <xs:complexType>
      <xs:sequence>
        <xs:element name="beam" type="beam" minOccurs="1" maxOccurs="unbounded"/>
        <xs:element name="connection" type="connection" minOccurs="0" maxOccurs="unbounded"/>
      </xs:sequence>
      <xs:attribute name="id" type="identifier" use="required"/>
      <xs:attribute name="class" use="required">
        <xs:simpleType>
          <xs:restriction base="xs:string">
            <xs:enumeration value="easy"/>
            <xs:enumeration value="medium"/>
            <xs:enumeration value="hard"/>
          </xs:restriction>
        </xs:simpleType>
      </xs:attribute>
    </xs:complexType>
  </xs:element>
</xs:schema>
"""

BEAMS_XSD = f"""<?xml version="1.0" encoding="UTF-8"?>
<xs:schema xmlns:xs="http://www.w3.org/2001/XMLSchema">
{_ID_TYPE}
{_BEAM_TYPES}
  <xs:element name="beams">
    <xs:complexType>
      <xs:sequence>
        <xs:element name="beam" type="beam" minOccurs="1" maxOccurs="unbounded"/>
      </xs:sequence>
    </xs:complexType>
  </xs:element>
</xs:schema>
"""

LAYOUT_XSD = f"""<?xml version="1.0" encoding="UTF-8"?>
<xs:schema xmlns:xs="http://www.w3.org/2001/XMLSchema">
{_ID_TYPE}
  <xs:element name="layout">
    <xs:complexType>
      <xs:sequence>
        <xs:element name="slot" minOccurs="1" maxOccurs="unbounded">
          <xs:complexType>
            <xs:attribute name="beam" type="identifier" use="required"/>
            <xs:attribute name="id" type="identifier" use="required"/>
          </xs:complexType>
        </xs:element>
        <xs:element name="peg_slot" minOccurs="0" maxOccurs="15">
          <xs:complexType>
            <xs:attribute name="id" type="identifier" use="required"/>
          </xs:complexType>
        </xs:element>
      </xs:sequence>
    </xs:complexType>
  </xs:element>
</xs:schema>
"""

_schemas = {}


def _schema(source: str) -> etree.XMLSchema:
    if source not in _schemas:
        _schemas[source] = etree.XMLSchema(etree.fromstring(source.encode("utf-8")))
    return _schemas[source]


def _load_tree(text: bytes, xsd: str) -> etree._Element:
    """Parse bytes and validate them against ``xsd``, raising coded errors."""
    if isinstance(text, str):
        text = text.encode("utf-8")
    parser = etree.XMLParser(
        resolve_entities=False, no_network=True, remove_comments=True
    )
    try:
        root = etree.fromstring(text, parser)
    except etree.XMLSyntaxError as e:
        line, column = e.position
        raise GoalError("PARSE_ERROR", e.msg, line=line, column=column) from e

    schema = _schema(xsd)
    if not schema.validate(root):
        err = schema.error_log.last_error
        raise GoalError("SCHEMA_ERROR", err.message, line=err.line, column=err.column)
    return root


def _flag(value: Optional[str]) -> bool:
    return value in ("true", "1")


def _beam_from(element: etree._Element) -> BeamSpec:
    joints = tuple(
        JointSpec(
            index=int(j.get("index")),
            kind=j.get("kind"),
            peg_hole=_flag(j.get("peg_hole")),
        )
        for j in element.iterchildren("joint")
    )
    return BeamSpec(
        beam_id=element.get("id"), joints=joints, fixed=_flag(element.get("fixed"))
    )


def _semantic(e: ValidationError) -> GoalError:
    first = e.errors()[0]
    return GoalError("SEMANTIC_ERROR", first["msg"], location=list(first["loc"]))


def parse_goal(
    text: Union[bytes, str], catalog: Optional[List[BeamSpec]] = None
) -> GoalConfiguration:
    """
    Parse one goal file.

    Args:
        text: The goal file contents
        catalog: Beams to validate against; the goal's own beams when omitted

    Returns:
        GoalConfiguration: The validated goal

    Raises:
        GoalError: PARSE_ERROR, SCHEMA_ERROR or SEMANTIC_ERROR
    """
    root = _load_tree(text, GOAL_XSD)
    try:
        goal = GoalConfiguration(
            goal_id=root.get("id"),
            assembly_class=AssemblyClass(root.get("class")),
            beams=tuple(_beam_from(b) for b in root.iterchildren("beam")),
            connections=tuple(
                Connection(
                    joint_a=(c.get("beam_a"), int(c.get("joint_a"))),
                    joint_b=(c.get("beam_b"), int(c.get("joint_b"))),
                    requires_peg=_flag(c.get("requires_peg")),
                    insertion=Insertion(c.get("insertion", "standard")),
                )
                for c in root.iterchildren("connection")
            ),
        )
    except ValidationError as e:
        raise _semantic(e) from e

    _check(goal, catalog if catalog is not None else list(goal.beams))
    return goal


def _check(goal: GoalConfiguration, catalog: List[BeamSpec]):
    report = validate_goal(goal, catalog)
    if not report.ok:
        raise GoalError(
            "SEMANTIC_ERROR",
            "; ".join(f"{i.code}: {i.message}" for i in report.errors),
            codes=report.codes,
        )


def _beam_element(parent: etree._Element, beam: BeamSpec):
    element = etree.SubElement(parent, "beam", id=beam.beam_id)
    if beam.fixed:
        element.set("fixed", "true")
    for joint in beam.joints:
        etree.SubElement(
            element,
            "joint",
            index=str(joint.index),
            kind=joint.kind.value,
            peg_hole="true" if joint.peg_hole else "false",
        )


def _to_bytes(root: etree._Element) -> bytes:
    return etree.tostring(
        root, pretty_print=True, xml_declaration=True, encoding="UTF-8"
    )


def serialize_goal(goal: GoalConfiguration) -> bytes:
    """Canonical goal bytes: beams by id, connections by joint pair."""
    _check(goal, list(goal.beams))

    root = etree.Element("assembly", id=goal.goal_id)
    root.set("class", goal.assembly_class.value)
    for beam in sorted(goal.beams, key=lambda b: b.beam_id):
        _beam_element(root, beam)
    for c in sorted(goal.connections, key=Connection.sort_key):
        element = etree.SubElement(
            root,
            "connection",
            beam_a=c.joint_a[0],
            joint_a=str(c.joint_a[1]),
            beam_b=c.joint_b[0],
            joint_b=str(c.joint_b[1]),
            requires_peg="true" if c.requires_peg else "false",
        )
        if c.insertion != Insertion.STANDARD:
            element.set("insertion", c.insertion.value)
    return _to_bytes(root)


def parse_beams(text: Union[bytes, str]) -> Tuple[BeamSpec, ...]:
    root = _load_tree(text, BEAMS_XSD)
    try:
        beams = tuple(_beam_from(b) for b in root.iterchildren("beam"))
    except ValidationError as e:
        raise _semantic(e) from e
    ids = [beam.beam_id for beam in beams]
    if len(set(ids)) != len(ids):
        raise GoalError("SEMANTIC_ERROR", "beam identifiers must be unique")
    return beams


def serialize_beams(beams: Tuple[BeamSpec, ...]) -> bytes:
    root = etree.Element("beams")
    for beam in sorted(beams, key=lambda b: b.beam_id):
        _beam_element(root, beam)
    return _to_bytes(root)


def parse_layout(text: Union[bytes, str]) -> LayoutTemplate:
    root = _load_tree(text, LAYOUT_XSD)
    slots = {}
    for slot in root.iterchildren("slot"):
        if slot.get("beam") in slots:
            raise GoalError("SEMANTIC_ERROR", f"beam {slot.get('beam')} has two slots")
        slots[slot.get("beam")] = slot.get("id")
    try:
        return LayoutTemplate(
            slots=slots,
            peg_slots=tuple(p.get("id") for p in root.iterchildren("peg_slot")),
        )
    except ValidationError as e:
        raise _semantic(e) from e


def serialize_layout(layout: LayoutTemplate) -> bytes:
    root = etree.Element("layout")
    for beam_id in sorted(layout.slots):
        etree.SubElement(root, "slot", beam=beam_id, id=layout.slots[beam_id])
    for slot in layout.peg_slots:
        etree.SubElement(root, "peg_slot", id=slot)
    return _to_bytes(root)


def goal_file_names() -> List[str]:
    return [
        f"{cls.value}-{n}.xml"
        for cls in AssemblyClass
        for n in range(1, GOALS_PER_CLASS + 1)
    ]


def _read(path: Path) -> bytes:
    if not path.is_file():
        raise GoalError("MISSING_FILE", f"{path} does not exist", file=str(path))
    try:
        return path.read_bytes()
    except OSError as e:
        raise GoalError("IO_ERROR", str(e), file=str(path)) from e


def _in_file(path: Path, e: GoalError) -> GoalError:
    context = {**e.context, "file": str(path)}
    return GoalError(e.code, f"{path.name}: {e.message}", **context)


def load_goal(path: Union[str, Path], catalog: Optional[List[BeamSpec]] = None) -> GoalConfiguration:
    path = Path(path)
    try:
        return parse_goal(_read(path), catalog)
    except GoalError as e:
        raise _in_file(path, e) from e


def load_catalog(directory: Union[str, Path]) -> AssemblyCatalog:
    """
    Load beams, the nine goals and the layout from a catalog directory.

    Raises:
        GoalError: MISSING_FILE, or any parse/validation code, naming the file
    """
    directory = Path(directory)

    beams_path = directory / "beams.xml"
    try:
        beams = parse_beams(_read(beams_path))
    except GoalError as e:
        raise _in_file(beams_path, e) from e
    if len(beams) != CATALOG_BEAM_COUNT:
        raise GoalError(
            "SEMANTIC_ERROR",
            f"beams.xml: expected {CATALOG_BEAM_COUNT} beams, found {len(beams)}",
            file=str(beams_path),
        )

    layout_path = directory / "layout.xml"
    try:
        layout = parse_layout(_read(layout_path))
    except GoalError as e:
        raise _in_file(layout_path, e) from e
    if set(layout.slots) != {beam.beam_id for beam in beams}:
        raise GoalError(
            "SEMANTIC_ERROR",
            "layout.xml: every catalog beam needs exactly one slot",
            file=str(layout_path),
        )

    goals = []
    for name in goal_file_names():
        path = directory / "goals" / name
        try:
            goal = parse_goal(_read(path), catalog=list(beams))
        except GoalError as e:
            raise _in_file(path, e) from e
        stem = name[: -len(".xml")]
        if goal.goal_id != stem or not stem.startswith(goal.assembly_class.value):
            raise GoalError(
                "SEMANTIC_ERROR",
                f"{name}: id {goal.goal_id!r} / class {goal.assembly_class.value!r} "
                "do not match the file name",
                file=str(path),
            )
        if len(goal.peg_connections) > len(layout.peg_slots):
            raise GoalError(
                "SEMANTIC_ERROR",
                f"{name}: needs more pegs than the layout holds",
                file=str(path),
            )
        goals.append(goal)

    logger.info("loaded catalog %s: %d beams, %d goals", directory, len(beams), len(goals))
    return AssemblyCatalog(beams=beams, goals=tuple(goals), layout=layout)
