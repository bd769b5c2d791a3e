"""Xcos-compatible XML persistence.

The on-disk shape mirrors what desktop Xcos writes, reduced to the subset a
scalar block diagram needs::

    <?xml version="1.0" encoding="UTF-8"?>
    <XcosDiagram background="-1" title="...">
      <mxGraphModel as="model">
        <root>
          <mxCell id="0"/>
          <mxCell id="1" parent="0"/>
          <BasicBlock id="2" parent="1" interfaceFunctionName="GAINBLK" gain="2.0">
            <mxGeometry as="geometry" x="0.0" y="0.0" width="40.0" height="40.0"/>
          </BasicBlock>
          <mxCell id="3" parent="1" edge="1" source="2" sourcePort="0"
                  target="4" targetPort="0"/>
        </root>
      </mxGraphModel>
      <mxCell id="1" parent="0" as="defaultParent"/>
    </XcosDiagram>

Parameters travel as attribute text exactly as entered (including the "%s"
placeholder).  Attributes we do not model (style, blockType, simulation
function names, ...) ride along in ``attrs`` and are re-emitted verbatim.
Desktop exports that reference explicit port cells (ExplicitInputPort and
friends) are resolved on import; our own writer sticks to block-id plus
port-index references.
"""

from __future__ import annotations

import xml.etree.ElementTree as ET

from . import blocks as _palette
from .model import Block, Diagram, DuplicateIdError, Link, SimOptions
from .params import make_param_lenient

__all__ = [
    "XcosXmlError",
    "XmlSyntaxError",
    "MissingRootCellsError",
    "BadReferenceError",
    "parse_xcos_xml",
    "serialize_xcos_xml",
]

_DEFAULT_GEOMETRY_SIZE = 40.0
_STRUCTURAL_BLOCK_ATTRS = ("id", "parent", "interfaceFunctionName")
_SETTINGS_ATTRS = (
    ("simT0", "t0"),
    ("simTf", "tf"),
    ("simSolver", "solver"),
    ("simDt", "dt"),
    ("simRtol", "rtol"),
    ("simAtol", "atol"),
    ("simMaxStep", "max_step"),
)


class XcosXmlError(ValueError):
    """Base class for problems in the XML layer."""


class XmlSyntaxError(XcosXmlError):
    pass


class MissingRootCellsError(XcosXmlError):
    pass


class BadReferenceError(XcosXmlError):
    pass


def _float_attr(el: ET.Element, name: str, default: float) -> float:
    raw = el.attrib.get(name)
    if raw is None:
        return default
    try:
        return float(raw)
    except ValueError:
        raise XmlSyntaxError(
            f"attribute {name}={raw!r} on <{el.tag}> is not a number"
        ) from None


def _int_attr(el: ET.Element, name: str, default: int) -> int:
    raw = el.attrib.get(name)
    if raw is None:
        return default
    try:
        return int(raw)
    except ValueError:
        raise XmlSyntaxError(
            f"attribute {name}={raw!r} on <{el.tag}> is not an integer"
        ) from None


# ---------------------------------------------------------------------------
# parsing
# ---------------------------------------------------------------------------

def parse_xcos_xml(data: bytes | str) -> Diagram:
    """Parse an Xcos-style document into a Diagram.

    Unknown block kinds become opaque blocks (their arity inferred from port
    cells and incident links); unknown attributes are preserved verbatim.

    Raises:
        XmlSyntaxError: markup that does not parse, or a wrong root element.
        MissingRootCellsError: no mxGraphModel/root skeleton or cells 0/1.
        DuplicateIdError: an id used by more than one element.
        BadReferenceError: a link endpoint that cannot be resolved.
    """
    try:
        root = ET.fromstring(data)
    except (ET.ParseError, ValueError) as e:
        raise XmlSyntaxError(f"malformed XML: {e}") from None
    except LookupError as e:
        # a declared-but-unknown encoding surfaces as LookupError, not ParseError
        raise XmlSyntaxError(f"malformed XML: {e}") from None
    if root.tag != "XcosDiagram":
        raise XmlSyntaxError(f"expected root element XcosDiagram, got <{root.tag}>")

    diagram = Diagram(
        title=root.attrib.get("title", ""),
        background=_int_attr(root, "background", -1),
    )
    diagram.settings = _parse_settings(root)
    known_root_attrs = {"title", "background", *(xml_name for xml_name, _ in _SETTINGS_ATTRS)}
    diagram.attrs = {
        k: v for k, v in sorted(root.attrib.items()) if k not in known_root_attrs
    }

    model_el = root.find("mxGraphModel")
    if model_el is None:
        raise MissingRootCellsError("document has no <mxGraphModel> element")
    cells_el = model_el.find("root")
    if cells_el is None:
        raise MissingRootCellsError("<mxGraphModel> has no <root> element")

    seen_ids: set[str] = set()

    def claim(el_id: str | None, what: str) -> str:
        if not el_id:
            raise XmlSyntaxError(f"{what} element is missing an id")
        if el_id in seen_ids:
            raise DuplicateIdError(f"id {el_id!r} used by more than one element")
        seen_ids.add(el_id)
        return el_id

    port_map: dict[str, tuple[str, str, int]] = {}  # port cell id -> (block, dir, ordinal)
    pending_links: list[ET.Element] = []
    skeleton = set()

    for el in cells_el:
        if el.tag == "mxCell" and el.attrib.get("id") in ("0", "1") and "edge" not in el.attrib:
            skeleton.add(claim(el.attrib["id"], "root cell"))
            continue
        if "interfaceFunctionName" in el.attrib:
            _parse_block(el, diagram, claim, port_map)
            continue
        if el.attrib.get("edge") == "1" or "Link" in el.tag or (
            "source" in el.attrib and "target" in el.attrib
        ):
            claim(el.attrib.get("id"), "link")
            pending_links.append(el)
            continue
        # anything else (annotations, unknown vertex cells) is skipped

    if skeleton != {"0", "1"}:
        raise MissingRootCellsError('root cells id="0" and id="1" are required')

    for el in pending_links:
        _resolve_link(el, diagram, port_map)
    return diagram


def _parse_settings(root: ET.Element) -> SimOptions:
    settings = SimOptions()
    for xml_name, field_name in _SETTINGS_ATTRS:
        if xml_name not in root.attrib:
            continue
        if field_name == "solver":
            settings.solver = root.attrib[xml_name]
        else:
            setattr(settings, field_name, _float_attr(root, xml_name, 0.0))
    return settings


def _parse_block(el: ET.Element, diagram: Diagram, claim, port_map) -> None:
    block_id = claim(el.attrib.get("id"), "block")
    kind = el.attrib["interfaceFunctionName"]
    residue = {
        k: v for k, v in el.attrib.items() if k not in _STRUCTURAL_BLOCK_ATTRS
    }

    params = {}
    if _palette.is_known_kind(kind):
        for name, schema in _palette.block_spec(kind).params.items():
            raw = residue.pop(name, schema.default)
            params[name] = make_param_lenient(raw, schema.expect)

    position = (0.0, 0.0)
    n_ports = {"in": 0, "out": 0}
    for child in el:
        if child.tag == "mxGeometry":
            position = (_float_attr(child, "x", 0.0), _float_attr(child, "y", 0.0))
            for axis in ("width", "height"):
                raw = child.attrib.get(axis)
                if raw is None:
                    continue
                try:
                    is_default = float(raw) == _DEFAULT_GEOMETRY_SIZE
                except ValueError:
                    is_default = False
                if not is_default:
                    residue[f"geometry_{axis}"] = raw
        elif "Port" in child.tag:
            # desktop exports link against explicit port cells; remember them
            direction = "in" if ("Input" in child.tag or "Control" in child.tag) else "out"
            port_id = claim(child.attrib.get("id"), "port")
            port_map[port_id] = (block_id, direction, n_ports[direction])
            n_ports[direction] += 1

    if _palette.is_known_kind(kind):
        n_in, n_out = _palette.arity(kind, params)
    else:
        n_in, n_out = n_ports["in"], n_ports["out"]

    diagram.insert_block(
        Block(
            id=block_id,
            kind=kind,
            params=params,
            n_in=n_in,
            n_out=n_out,
            position=position,
            attrs=dict(sorted(residue.items())),
        )
    )


def _resolve_endpoint(
    ref: str | None,
    port_attr_value: int,
    direction: str,
    diagram: Diagram,
    port_map,
    link_id: str,
) -> tuple[str, int]:
    side = "source" if direction == "out" else "target"
    if ref is None:
        raise BadReferenceError(f"link {link_id!r} has no {side} attribute")
    if ref in port_map:
        block_id, port_dir, ordinal = port_map[ref]
        if port_dir != direction:
            raise BadReferenceError(
                f"link {link_id!r} {side} references a port of the wrong direction"
            )
        return block_id, ordinal
    if ref in diagram.blocks:
        return ref, port_attr_value
    raise BadReferenceError(f"link {link_id!r} {side} references unknown element {ref!r}")


def _resolve_link(el: ET.Element, diagram: Diagram, port_map) -> None:
    link_id = el.attrib["id"]
    src = _resolve_endpoint(
        el.attrib.get("source"), _int_attr(el, "sourcePort", 0), "out", diagram, port_map, link_id
    )
    dst = _resolve_endpoint(
        el.attrib.get("target"), _int_attr(el, "targetPort", 0), "in", diagram, port_map, link_id
    )

    # opaque blocks have no palette arity: grow to fit what the file references
    for (bid, port), bound in ((src, "n_out"), (dst, "n_in")):
        block = diagram.blocks[bid]
        if block.opaque and getattr(block, bound) <= port:
            setattr(block, bound, port + 1)
        if not 0 <= port < getattr(block, bound):
            raise BadReferenceError(
                f"link {link_id!r} references port {port} of block {bid!r}, "
                f"which has {bound}={getattr(block, bound)}"
            )
    if diagram.driver_of(*dst) is not None:
        raise BadReferenceError(
            f"link {link_id!r} drives input {dst[1]} of block {dst[0]!r}, "
            "which already has a driver"
        )
    diagram.links[link_id] = Link(id=link_id, src=src, dst=dst)


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------

def serialize_xcos_xml(diagram: Diagram) -> bytes:
    """Serialize a Diagram to the XML shape above (UTF-8, deterministic order)."""
    root = ET.Element("XcosDiagram")
    root.set("background", str(diagram.background))
    root.set("title", diagram.title)
    s = diagram.settings
    root.set("simT0", repr(float(s.t0)))
    root.set("simTf", repr(float(s.tf)))
    root.set("simSolver", s.solver)
    root.set("simDt", repr(float(s.dt)))
    root.set("simRtol", repr(float(s.rtol)))
    root.set("simAtol", repr(float(s.atol)))
    if s.max_step is not None:
        root.set("simMaxStep", repr(float(s.max_step)))
    for key in sorted(diagram.attrs):
        root.set(key, diagram.attrs[key])

    model_el = ET.SubElement(root, "mxGraphModel", {"as": "model"})
    cells_el = ET.SubElement(model_el, "root")
    ET.SubElement(cells_el, "mxCell", {"id": "0"})
    ET.SubElement(cells_el, "mxCell", {"id": "1", "parent": "0"})

    for bid in sorted(diagram.blocks):
        _emit_block(cells_el, diagram.blocks[bid])
    for lid in sorted(diagram.links):
        link = diagram.links[lid]
        ET.SubElement(
            cells_el,
            "mxCell",
            {
                "id": link.id,
                "parent": "1",
                "edge": "1",
                "source": link.src[0],
                "sourcePort": str(link.src[1]),
                "target": link.dst[0],
                "targetPort": str(link.dst[1]),
            },
        )

    ET.SubElement(root, "mxCell", {"id": "1", "parent": "0", "as": "defaultParent"})
    ET.indent(root, space="  ")
    body = ET.tostring(root, encoding="unicode")
    return ('<?xml version="1.0" encoding="UTF-8"?>\n' + body + "\n").encode("utf-8")


def _emit_block(cells_el: ET.Element, block: Block) -> None:
    el = ET.SubElement(
        cells_el,
        "BasicBlock",
        {"id": block.id, "parent": "1", "interfaceFunctionName": block.kind},
    )
    for name in sorted(block.params):
        el.set(name, block.params[name].raw)
    geometry = {
        "as": "geometry",
        "x": repr(float(block.position[0])),
        "y": repr(float(block.position[1])),
        "width": repr(_DEFAULT_GEOMETRY_SIZE),
        "height": repr(_DEFAULT_GEOMETRY_SIZE),
    }
    for key in sorted(block.attrs):
        if key in ("geometry_width", "geometry_height"):
            geometry[key.removeprefix("geometry_")] = block.attrs[key]
        elif key not in el.attrib:
            el.set(key, block.attrs[key])
    ET.SubElement(el, "mxGeometry", geometry)
