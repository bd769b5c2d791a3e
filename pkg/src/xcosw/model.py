"""In-memory block diagram: blocks, links, simulation settings.

A Diagram is a plain value.  Mutating helpers (``add_block``, ``connect``,
``remove_block``) enforce the structural invariants at call time — unique
ids, endpoint existence, at most one driver per input — so code downstream
(compiler, serializers) can assume a well-formed graph.

Ids are opaque text.  Imported ids (like the "2" of an Xcos file) are kept
verbatim; freshly minted ids are decimal counters above the highest numeric
id already present, skipping "0" and "1" which Xcos files reserve for the
root cells.
"""

from __future__ import annotations

import copy
from dataclasses import dataclass, field, replace

from . import blocks as _palette
from .params import ParamValue, make_param_lenient

__all__ = [
    "Diagram",
    "Block",
    "Link",
    "SimOptions",
    "DiagramError",
    "BadEndpointError",
    "PortOccupiedError",
    "DuplicateIdError",
    "OptionsError",
]

RESERVED_IDS = frozenset({"0", "1"})

SOLVERS = ("rk4", "adaptive")


class DiagramError(ValueError):
    """Structural problem while building or mutating a diagram."""


class BadEndpointError(DiagramError):
    pass


class PortOccupiedError(DiagramError):
    pass


class DuplicateIdError(DiagramError):
    pass


class OptionsError(ValueError):
    """Simulation options violate their invariants."""


@dataclass
class SimOptions:
    """Run settings: time span, solver choice, and its tuning knobs."""

    t0: float = 0.0
    tf: float = 10.0
    solver: str = "rk4"
    dt: float = 1e-3
    rtol: float = 1e-6
    atol: float = 1e-9
    max_step: float | None = None

    def check(self) -> None:
        problems = []
        if not self.tf > self.t0:
            problems.append(f"tf ({self.tf!r}) must be greater than t0 ({self.t0!r})")
        if self.solver not in SOLVERS:
            problems.append(f"solver must be one of {SOLVERS}, got {self.solver!r}")
        if not self.dt > 0:
            problems.append(f"dt must be positive, got {self.dt!r}")
        if not self.rtol > 0:
            problems.append(f"rtol must be positive, got {self.rtol!r}")
        if not self.atol > 0:
            problems.append(f"atol must be positive, got {self.atol!r}")
        if self.max_step is not None and not self.max_step > 0:
            problems.append(f"max_step must be positive, got {self.max_step!r}")
        if problems:
            raise OptionsError("; ".join(problems))

    def max_step_effective(self) -> float:
        return self.max_step if self.max_step is not None else (self.tf - self.t0) / 10.0

    def override(self, **changes) -> "SimOptions":
        """Copy with the given fields replaced (None values are ignored)."""
        changes = {k: v for k, v in changes.items() if v is not None}
        return replace(self, **changes)


@dataclass
class Block:
    id: str
    kind: str
    params: dict[str, ParamValue] = field(default_factory=dict)
    n_in: int = 0
    n_out: int = 0
    position: tuple[float, float] = (0.0, 0.0)
    attrs: dict[str, str] = field(default_factory=dict)

    @property
    def opaque(self) -> bool:
        """True for kinds outside the palette; they parse but never compile."""
        return not _palette.is_known_kind(self.kind)


@dataclass
class Link:
    id: str
    src: tuple[str, int]  # (block id, output port index)
    dst: tuple[str, int]  # (block id, input port index)


@dataclass
class Diagram:
    title: str = ""
    background: int = -1
    blocks: dict[str, Block] = field(default_factory=dict)
    links: dict[str, Link] = field(default_factory=dict)
    settings: SimOptions = field(default_factory=SimOptions)
    attrs: dict[str, str] = field(default_factory=dict)

    # -- id management -----------------------------------------------------

    def _fresh_id(self) -> str:
        top = 1
        for known in (*self.blocks, *self.links):
            if known.isdigit():
                top = max(top, int(known))
        return str(top + 1)

    def _claim_id(self, candidate: str | None) -> str:
        if candidate is None:
            return self._fresh_id()
        if not candidate or candidate in RESERVED_IDS:
            raise DiagramError(f"id {candidate!r} is reserved or empty")
        if candidate in self.blocks or candidate in self.links:
            raise DuplicateIdError(f"id {candidate!r} already in use")
        return candidate

    # -- construction ------------------------------------------------------

    def add_block(
        self,
        kind: str,
        params: dict | None = None,
        position: tuple[float, float] = (0.0, 0.0),
        id: str | None = None,
    ) -> str:
        """Append a palette block and return its id.

        Parameter values may be raw expression text or numbers; omitted
        parameters take their palette defaults.

        Raises:
            UnknownKindError: kind is not in the palette.
            ParamError: a supplied value does not parse or fit its slot.
        """
        merged = _palette.make_params(kind, params or {})
        n_in, n_out = _palette.arity(kind, merged)
        block_id = self._claim_id(id)
        self.blocks[block_id] = Block(
            id=block_id,
            kind=kind,
            params=merged,
            n_in=n_in,
            n_out=n_out,
            position=(float(position[0]), float(position[1])),
        )
        return block_id

    def insert_block(self, block: Block) -> None:
        """Parser-level insertion: id checks only, kind may be opaque."""
        block_id = self._claim_id(block.id)
        self.blocks[block_id] = block

    def connect(
        self,
        src: tuple[str, int],
        dst: tuple[str, int],
        id: str | None = None,
    ) -> str:
        """Create a link from an output port to a free input port.

        Raises:
            BadEndpointError: unknown block or port index out of range.
            PortOccupiedError: dst input already has a driver.
        """
        src_block, src_port = src[0], int(src[1])
        dst_block, dst_port = dst[0], int(dst[1])
        for bid, port, side, bound in (
            (src_block, src_port, "source", "n_out"),
            (dst_block, dst_port, "target", "n_in"),
        ):
            block = self.blocks.get(bid)
            if block is None:
                raise BadEndpointError(f"link {side} references unknown block {bid!r}")
            if not 0 <= port < getattr(block, bound):
                raise BadEndpointError(
                    f"{side} port {port} out of range for block {bid!r} "
                    f"({bound}={getattr(block, bound)})"
                )
        taken = self.driver_of(dst_block, dst_port)
        if taken is not None:
            raise PortOccupiedError(
                f"input {dst_port} of block {dst_block!r} is already driven by link {taken.id!r}"
            )
        link_id = self._claim_id(id)
        self.links[link_id] = Link(id=link_id, src=(src_block, src_port), dst=(dst_block, dst_port))
        return link_id

    def remove_link(self, link_id: str) -> None:
        if link_id not in self.links:
            raise BadEndpointError(f"no link with id {link_id!r}")
        del self.links[link_id]

    def remove_block(self, block_id: str) -> None:
        """Delete a block and every link touching it."""
        if block_id not in self.blocks:
            raise BadEndpointError(f"no block with id {block_id!r}")
        del self.blocks[block_id]
        for lid in [l.id for l in self.links.values() if block_id in (l.src[0], l.dst[0])]:
            del self.links[lid]

    def set_param(self, block_id: str, name: str, raw: str) -> None:
        """Write raw parameter text onto a block, reparsing leniently."""
        block = self.blocks.get(block_id)
        if block is None:
            raise BadEndpointError(f"no block with id {block_id!r}")
        if _palette.is_known_kind(block.kind):
            spec = _palette.block_spec(block.kind)
            if name not in spec.params:
                raise DiagramError(f"block kind '{block.kind}' has no parameter '{name}'")
            block.params[name] = make_param_lenient(str(raw), spec.params[name].expect)
            block.n_in, block.n_out = _palette.arity(block.kind, block.params)
        else:
            block.attrs[name] = str(raw)

    # -- queries -----------------------------------------------------------

    def driver_of(self, block_id: str, port: int) -> Link | None:
        for link in self.links.values():
            if link.dst == (block_id, port):
                return link
        return None

    def links_touching(self, block_id: str) -> list[Link]:
        return [l for l in self.links.values() if block_id in (l.src[0], l.dst[0])]

    # -- canonical form ----------------------------------------------------

    def canonicalize(self) -> "Diagram":
        """Value copy with blocks, links, params, and attrs in sorted order."""
        out = Diagram(
            title=self.title,
            background=self.background,
            settings=replace(self.settings),
            attrs={k: self.attrs[k] for k in sorted(self.attrs)},
        )
        for bid in sorted(self.blocks):
            b = self.blocks[bid]
            out.blocks[bid] = Block(
                id=b.id,
                kind=b.kind,
                params={k: b.params[k] for k in sorted(b.params)},
                n_in=b.n_in,
                n_out=b.n_out,
                position=b.position,
                attrs={k: b.attrs[k] for k in sorted(b.attrs)},
            )
        for lid in sorted(self.links):
            l = self.links[lid]
            out.links[lid] = Link(id=l.id, src=l.src, dst=l.dst)
        return out

    def copy(self) -> "Diagram":
        return copy.deepcopy(self)
