"""Loss-free JSON encoding of diagrams (the HTTP payload format).

Version 1 of the schema, documented in docs/interchange.md::

    {
      "format": 1,
      "title": "",             "background": -1,
      "settings": {"t0": 0.0, "tf": 10.0, "solver": "rk4", "dt": 0.001,
                   "rtol": 1e-6, "atol": 1e-9, "max_step": null},
      "blocks": [{"id": "2", "kind": "GAINBLK", "position": [0.0, 0.0],
                  "n_in": 1, "n_out": 1, "params": {"gain": "2.0"},
                  "attrs": {}}],
      "links":  [{"id": "3", "src": ["2", 0], "dst": ["4", 0]}],
      "attrs": {}
    }

Parameters are raw expression text, exactly as persisted in XML.  Validation
failures raise SchemaViolationError carrying a JSON path such as
``$.blocks[2].params.gain``.
"""

from __future__ import annotations

import json

from . import blocks as _palette
from .model import Block, Diagram, DiagramError, Link, SimOptions
from .params import make_param_lenient

__all__ = [
    "FORMAT_VERSION",
    "SchemaViolationError",
    "to_interchange",
    "from_interchange",
    "to_interchange_json",
    "from_interchange_json",
]

FORMAT_VERSION = 1

_SETTINGS_FIELDS = ("t0", "tf", "solver", "dt", "rtol", "atol", "max_step")


class SchemaViolationError(ValueError):
    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


def _require(condition: bool, path: str, message: str) -> None:
    if not condition:
        raise SchemaViolationError(path, message)


def _get_typed(obj: dict, key: str, types, default, path: str):
    if key not in obj:
        return default
    value = obj[key]
    type_names = "/".join(t.__name__ for t in types)
    _require(isinstance(value, types) and not isinstance(value, bool), f"{path}.{key}",
             f"expected {type_names}, got {type(value).__name__}")
    return value


# ---------------------------------------------------------------------------
# Diagram -> JSON
# ---------------------------------------------------------------------------

def to_interchange(diagram: Diagram) -> dict:
    """Plain-dict form of a diagram (stable field set, blocks/links by id)."""
    s = diagram.settings
    return {
        "format": FORMAT_VERSION,
        "title": diagram.title,
        "background": diagram.background,
        "settings": {
            "t0": s.t0,
            "tf": s.tf,
            "solver": s.solver,
            "dt": s.dt,
            "rtol": s.rtol,
            "atol": s.atol,
            "max_step": s.max_step,
        },
        "blocks": [
            {
                "id": b.id,
                "kind": b.kind,
                "position": [b.position[0], b.position[1]],
                "n_in": b.n_in,
                "n_out": b.n_out,
                "params": {name: pv.raw for name, pv in sorted(b.params.items())},
                "attrs": dict(sorted(b.attrs.items())),
            }
            for _, b in sorted(diagram.blocks.items())
        ],
        "links": [
            {"id": l.id, "src": [l.src[0], l.src[1]], "dst": [l.dst[0], l.dst[1]]}
            for _, l in sorted(diagram.links.items())
        ],
        "attrs": dict(sorted(diagram.attrs.items())),
    }


def to_interchange_json(diagram: Diagram) -> bytes:
    return json.dumps(to_interchange(diagram), sort_keys=True, indent=2).encode("utf-8")


# ---------------------------------------------------------------------------
# JSON -> Diagram
# ---------------------------------------------------------------------------

def from_interchange(obj) -> Diagram:
    """Build a Diagram from the dict form, validating shape along the way.

    Raises:
        SchemaViolationError: wrong types, bad references, duplicate ids —
            the exception's ``path`` points at the offending field.
    """
    _require(isinstance(obj, dict), "$", f"expected an object, got {type(obj).__name__}")
    _require("format" in obj, "$.format", "missing format version marker")
    version = _get_typed(obj, "format", (int,), FORMAT_VERSION, "$")
    _require(version == FORMAT_VERSION, "$.format",
             f"unsupported format version {version!r} (expected {FORMAT_VERSION})")

    diagram = Diagram(
        title=_get_typed(obj, "title", (str,), "", "$"),
        background=_get_typed(obj, "background", (int,), -1, "$"),
        settings=_parse_settings(obj.get("settings"), "$.settings"),
        attrs=_parse_attrs(obj.get("attrs"), "$.attrs"),
    )

    blocks = _get_typed(obj, "blocks", (list,), [], "$")
    for i, item in enumerate(blocks):
        _parse_block(item, diagram, f"$.blocks[{i}]")
    links = _get_typed(obj, "links", (list,), [], "$")
    for i, item in enumerate(links):
        _parse_link(item, diagram, f"$.links[{i}]")
    return diagram


def from_interchange_json(data: bytes | str) -> Diagram:
    try:
        obj = json.loads(data)
    except (json.JSONDecodeError, UnicodeDecodeError) as e:
        raise SchemaViolationError("$", f"not valid JSON: {e}") from None
    return from_interchange(obj)


def _parse_settings(obj, path: str) -> SimOptions:
    if obj is None:
        return SimOptions()
    _require(isinstance(obj, dict), path, "expected an object")
    for key in obj:
        _require(key in _SETTINGS_FIELDS, f"{path}.{key}", "unknown settings field")
    settings = SimOptions()
    for key, value in obj.items():
        if key == "solver":
            _require(isinstance(value, str), f"{path}.solver", "expected a string")
            settings.solver = value
        elif key == "max_step" and value is None:
            settings.max_step = None
        else:
            _require(
                isinstance(value, (int, float)) and not isinstance(value, bool),
                f"{path}.{key}",
                "expected a number",
            )
            setattr(settings, key, float(value))
    return settings


def _parse_attrs(obj, path: str) -> dict[str, str]:
    if obj is None:
        return {}
    _require(isinstance(obj, dict), path, "expected an object")
    out = {}
    for key, value in obj.items():
        _require(isinstance(value, str), f"{path}.{key}", "attribute values must be strings")
        out[key] = value
    return dict(sorted(out.items()))


def _parse_position(obj, path: str) -> tuple[float, float]:
    if obj is None:
        return (0.0, 0.0)
    _require(
        isinstance(obj, list) and len(obj) == 2
        and all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in obj),
        path,
        "expected [x, y] numbers",
    )
    return (float(obj[0]), float(obj[1]))


def _parse_block(item, diagram: Diagram, path: str) -> None:
    _require(isinstance(item, dict), path, "expected an object")
    block_id = item.get("id")
    _require(isinstance(block_id, str) and block_id != "", f"{path}.id",
             "blocks need a non-empty string id")
    kind = item.get("kind")
    _require(isinstance(kind, str) and kind != "", f"{path}.kind",
             "blocks need a non-empty kind")

    raw_params = item.get("params") or {}
    _require(isinstance(raw_params, dict), f"{path}.params", "expected an object")
    attrs = _parse_attrs(item.get("attrs"), f"{path}.attrs")

    params = {}
    if _palette.is_known_kind(kind):
        schemas = _palette.block_spec(kind).params
        for name, raw in raw_params.items():
            _require(name in schemas, f"{path}.params.{name}",
                     f"kind '{kind}' has no such parameter")
            _require(isinstance(raw, str), f"{path}.params.{name}",
                     "parameter values must be raw text")
            params[name] = make_param_lenient(raw, schemas[name].expect)
        for name, schema in schemas.items():
            params.setdefault(name, make_param_lenient(schema.default, schema.expect))
        n_in, n_out = _palette.arity(kind, params)
    else:
        # opaque kinds carry no schema: parameters ride in attrs instead
        for name, raw in raw_params.items():
            _require(isinstance(raw, str), f"{path}.params.{name}",
                     "parameter values must be raw text")
            attrs.setdefault(name, raw)
        n_in = _get_typed(item, "n_in", (int,), 0, path)
        n_out = _get_typed(item, "n_out", (int,), 0, path)
        _require(n_in >= 0 and n_out >= 0, f"{path}.n_in", "arity must be non-negative")

    block = Block(
        id=block_id,
        kind=kind,
        params={k: params[k] for k in sorted(params)},
        n_in=n_in,
        n_out=n_out,
        position=_parse_position(item.get("position"), f"{path}.position"),
        attrs=dict(sorted(attrs.items())),
    )
    try:
        diagram.insert_block(block)
    except DiagramError as e:
        raise SchemaViolationError(f"{path}.id", str(e)) from None


def _parse_endpoint(obj, diagram: Diagram, path: str, bound: str) -> tuple[str, int]:
    _require(
        isinstance(obj, list) and len(obj) == 2 and isinstance(obj[0], str)
        and isinstance(obj[1], int) and not isinstance(obj[1], bool) and obj[1] >= 0,
        path,
        'expected ["block-id", port-index]',
    )
    block_id, port = obj[0], obj[1]
    block = diagram.blocks.get(block_id)
    _require(block is not None, path, f"no block with id {block_id!r}")
    if block.opaque and getattr(block, bound) <= port:
        setattr(block, bound, port + 1)  # grow opaque arity to fit
    _require(port < getattr(block, bound), path,
             f"port {port} out of range for block {block_id!r}")
    return block_id, port


def _parse_link(item, diagram: Diagram, path: str) -> None:
    _require(isinstance(item, dict), path, "expected an object")
    link_id = item.get("id")
    _require(isinstance(link_id, str) and link_id != "", f"{path}.id",
             "links need a non-empty string id")
    _require(link_id not in diagram.links and link_id not in diagram.blocks,
             f"{path}.id", f"id {link_id!r} already in use")
    src = _parse_endpoint(item.get("src"), diagram, f"{path}.src", "n_out")
    dst = _parse_endpoint(item.get("dst"), diagram, f"{path}.dst", "n_in")
    _require(diagram.driver_of(*dst) is None, f"{path}.dst",
             f"input {dst[1]} of block {dst[0]!r} already has a driver")
    diagram.links[link_id] = Link(id=link_id, src=src, dst=dst)
