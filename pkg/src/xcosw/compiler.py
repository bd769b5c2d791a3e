"""Diagram validation and flattening into an executable system.

``validate`` turns every modeling mistake into a Diagnostic (unset "%s"
parameters, dangling inputs, unknown kinds, algebraic loops, ...).  Once a
diagram is clean, ``compile_diagram`` freezes parsed parameters, assigns each
stateful block a slice of the global state vector, computes a deterministic
evaluation order over the direct-feedthrough graph, and binds every scope to
the output port feeding it.  The resulting CompiledSystem is immutable; any
number of simulations may share one instance.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from . import blocks as _palette
from .model import Diagram
from .params import ParamError, UnsetParamError

__all__ = [
    "Diagnostic",
    "CompiledSystem",
    "AlgebraicLoopError",
    "NotValidatedError",
    "validate",
    "feedthrough_graph",
    "schedule",
    "compile_diagram",
]

ERROR = "error"
WARNING = "warning"


@dataclass(frozen=True)
class Diagnostic:
    severity: str
    code: str
    blocks: tuple[str, ...]
    message: str

    def format_line(self) -> str:
        parts = [self.severity, self.code]
        if self.blocks:
            parts.append(",".join(self.blocks))
        return " ".join(parts) + ": " + self.message

    def to_json(self) -> dict:
        return {
            "severity": self.severity,
            "code": self.code,
            "blocks": list(self.blocks),
            "message": self.message,
        }


class AlgebraicLoopError(ValueError):
    def __init__(self, nodes: Sequence[str]):
        self.nodes = tuple(nodes)
        super().__init__(f"algebraic loop through blocks {', '.join(self.nodes)}")


class NotValidatedError(ValueError):
    """compile_diagram was called while error diagnostics are outstanding."""

    def __init__(self, diagnostics: Sequence[Diagnostic]):
        self.diagnostics = list(diagnostics)
        lines = "; ".join(d.format_line() for d in self.diagnostics)
        super().__init__(f"diagram has {len(self.diagnostics)} error(s): {lines}")


def _err(code, blocks, message) -> Diagnostic:
    return Diagnostic(ERROR, code, tuple(blocks), message)


# ---------------------------------------------------------------------------
# validation
# ---------------------------------------------------------------------------

def validate(diagram: Diagram) -> list[Diagnostic]:
    """Collect every diagnostic for a diagram; an error-free list compiles.

    Structural checks run per block (unknown kind, broken or unset parameter
    text, parameter domain violations, dangling inputs).  Only when those all
    pass is the feedthrough graph analysed for algebraic loops — loop
    detection needs parsed parameters to know each block's feedthrough.
    """
    diags: list[Diagnostic] = []

    for bid in sorted(diagram.blocks):
        block = diagram.blocks[bid]
        if block.opaque:
            diags.append(_err("UNKNOWN_KIND", [bid],
                              f"block kind '{block.kind}' is not in the palette"))
            continue

        broken = [(n, pv.error) for n, pv in sorted(block.params.items()) if pv.error]
        for name, detail in broken:
            diags.append(_err("EXPR_SYNTAX", [bid], f"parameter '{name}': {detail}"))
        unset = [n for n, pv in sorted(block.params.items()) if pv.is_unset]
        if unset:
            diags.append(_err("UNSET_PARAM", [bid],
                              "parameter(s) not set: " + ", ".join(unset)))
        if not broken and not unset:
            diags.extend(_check_param_domains(block))

        for port in range(block.n_in):
            if diagram.driver_of(bid, port) is None:
                diags.append(_err("DANGLING_INPUT", [bid],
                                  f"input port {port} has no incoming link"))

    for lid in sorted(diagram.links):
        link = diagram.links[lid]
        for (bid, port), bound in ((link.src, "n_out"), (link.dst, "n_in")):
            block = diagram.blocks.get(bid)
            if block is None:
                diags.append(_err("BAD_LINK", [bid],
                                  f"link '{lid}' references missing block '{bid}'"))
            elif not 0 <= port < getattr(block, bound):
                diags.append(_err("BAD_LINK", [bid],
                                  f"link '{lid}' references port {port} of block "
                                  f"'{bid}' ({bound}={getattr(block, bound)})"))

    if not any(d.severity == ERROR for d in diags):
        for scc in _cyclic_components(feedthrough_graph(diagram)):
            diags.append(_err("ALGEBRAIC_LOOP", sorted(scc),
                              "blocks form an algebraic loop (every input on the "
                              "cycle is direct feedthrough): " + ", ".join(sorted(scc))))

    if diagram.blocks and not any(b.kind == "CSCOPE" for b in diagram.blocks.values()):
        diags.append(Diagnostic(WARNING, "NO_PROBES", (),
                                "diagram has no scope block; nothing will be recorded"))
    return diags


def _check_param_domains(block) -> list[Diagnostic]:
    diags = []
    if block.kind in ("DOLLAR", "SAMPHOLD"):
        ts = block.params["Ts"].parsed
        if not ts > 0:
            diags.append(_err("BAD_PARAM", [block.id],
                              f"sample period Ts must be positive, got {ts!r}"))
    elif block.kind == "CLR":
        num = block.params["num"].parsed
        den = block.params["den"].parsed
        try:
            combined = num / den
        except ParamError as e:
            return [_err("BAD_PARAM", [block.id], f"num/den is not a valid ratio: {e}")]
        if not combined.is_proper:
            diags.append(_err("BAD_PARAM", [block.id],
                              "transfer function is improper: numerator degree "
                              f"{combined.num_degree} exceeds denominator degree "
                              f"{combined.den_degree}"))
    elif block.kind == "SUMMATION" and len(block.params["signs"].parsed) != block.n_in:
        diags.append(_err("BAD_PARAM", [block.id],
                          "sign vector length does not match the input count"))
    return diags


# ---------------------------------------------------------------------------
# feedthrough graph and scheduling
# ---------------------------------------------------------------------------

def feedthrough_graph(diagram: Diagram) -> dict[str, set[str]]:
    """Adjacency over block ids: u→v iff u drives a direct-feedthrough input of v."""
    graph: dict[str, set[str]] = {bid: set() for bid in diagram.blocks}
    flags: dict[str, tuple[bool, ...]] = {}
    for bid, block in diagram.blocks.items():
        if block.opaque:
            raise _palette.UnknownKindError(block.kind)
        flags[bid] = _palette.feedthrough_flags(block.kind, block.params, bid)
    for link in diagram.links.values():
        src, dst = link.src[0], link.dst[0]
        port = link.dst[1]
        if port < len(flags[dst]) and flags[dst][port]:
            graph[src].add(dst)
    return graph


def _cyclic_components(graph: Mapping[str, set[str]]) -> list[tuple[str, ...]]:
    """Strongly connected components that actually contain a cycle.

    Iterative Tarjan (explicit stack) so 500-block diagrams cannot hit the
    recursion limit.  Components come back sorted by their smallest member.
    """
    index: dict[str, int] = {}
    low: dict[str, int] = {}
    on_stack: set[str] = set()
    stack: list[str] = []
    counter = 0
    components: list[tuple[str, ...]] = []

    for start in sorted(graph):
        if start in index:
            continue
        work = [(start, iter(sorted(graph[start])))]
        index[start] = low[start] = counter
        counter += 1
        stack.append(start)
        on_stack.add(start)
        while work:
            node, successors = work[-1]
            advanced = False
            for succ in successors:
                if succ not in index:
                    index[succ] = low[succ] = counter
                    counter += 1
                    stack.append(succ)
                    on_stack.add(succ)
                    work.append((succ, iter(sorted(graph[succ]))))
                    advanced = True
                    break
                if succ in on_stack:
                    low[node] = min(low[node], index[succ])
            if advanced:
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[node])
            if low[node] == index[node]:
                component = []
                while True:
                    member = stack.pop()
                    on_stack.discard(member)
                    component.append(member)
                    if member == node:
                        break
                if len(component) > 1 or node in graph[node]:
                    components.append(tuple(sorted(component)))
    return sorted(components, key=lambda c: c[0])


def schedule(graph: Mapping[str, set[str]]) -> list[str]:
    """Deterministic topological order (ascending-id tie-break).

    Raises:
        AlgebraicLoopError: the graph has a cycle; carries the first cyclic
            strongly connected component.
    """
    indegree = {node: 0 for node in graph}
    for node, succs in graph.items():
        for succ in succs:
            if succ != node:
                indegree[succ] += 1
        if node in succs:
            indegree[node] += 1  # self-loop can never reach indegree 0
    ready = [node for node, deg in indegree.items() if deg == 0]
    heapq.heapify(ready)
    order = []
    while ready:
        node = heapq.heappop(ready)
        order.append(node)
        for succ in sorted(graph[node]):
            indegree[succ] -= 1
            if indegree[succ] == 0:
                heapq.heappush(ready, succ)
    if len(order) != len(graph):
        cycles = _cyclic_components(graph)
        raise AlgebraicLoopError(cycles[0])
    return order


# ---------------------------------------------------------------------------
# the compiled system
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class CompiledSystem:
    """Flattened executable form of a validated diagram.

    The instance is immutable: simulations carry their own state vector and
    register dict and treat this object as shared read-only data.
    """

    state_dim: int
    layout: Mapping[str, slice]
    eval_order: tuple[str, ...]
    sample_grids: tuple[tuple[str, float], ...]
    probes: tuple[tuple[str, tuple[str, int]], ...]
    kinds: Mapping[str, str]
    frozen_params: Mapping[str, Mapping[str, object]]
    wiring: Mapping[str, tuple[tuple[str, int], ...]]
    stateful: tuple[str, ...]

    # -- initial conditions -------------------------------------------------

    def initial_state(self) -> np.ndarray:
        x = np.zeros(self.state_dim)
        for bid in self.stateful:
            x[self.layout[bid]] = _palette.initial_continuous_state(
                self.kinds[bid], self.frozen_params[bid], bid
            )
        return x

    def initial_registers(self) -> dict[str, tuple[float, ...]]:
        return {
            bid: _palette.initial_registers(self.kinds[bid], self.frozen_params[bid], bid)
            for bid, _ in self.sample_grids
        }

    # -- evaluation ---------------------------------------------------------

    def _block_state(self, bid: str, x, regs):
        if bid in self.layout:
            return x[self.layout[bid]]
        return regs.get(bid, ())

    def _inputs(self, bid: str, outs) -> tuple[float, ...]:
        # blocks scheduled before their (non-feedthrough) producers read 0.0;
        # feedthrough inputs are guaranteed computed by the evaluation order
        return tuple(
            outs[src][port] if src in outs else 0.0
            for src, port in self.wiring[bid]
        )

    def outputs(self, t: float, x, regs) -> dict[str, tuple[float, ...]]:
        """Every block's output tuple at time t, in evaluation order."""
        outs: dict[str, tuple[float, ...]] = {}
        for bid in self.eval_order:
            outs[bid] = _palette.block_output(
                self.kinds[bid],
                self.frozen_params[bid],
                self._block_state(bid, x, regs),
                self._inputs(bid, outs),
                t,
                bid,
            )
        return outs

    def derivative(self, t: float, x, regs) -> np.ndarray:
        outs = self.outputs(t, x, regs)
        dx = np.zeros(self.state_dim)
        for bid in self.stateful:
            dx[self.layout[bid]] = _palette.block_derivative(
                self.kinds[bid],
                self.frozen_params[bid],
                x[self.layout[bid]],
                self._inputs(bid, outs),
                t,
                bid,
            )
        return dx

    def probe_row(self, outs) -> tuple[float, ...]:
        return tuple(outs[src][port] for _, (src, port) in self.probes)

    def probe_ids(self) -> tuple[str, ...]:
        return tuple(pid for pid, _ in self.probes)

    # -- discrete events ----------------------------------------------------

    def hits_at(self, t: float) -> tuple[str, ...]:
        return tuple(
            bid for bid, ts in self.sample_grids if _palette.on_sample_grid(t, ts)
        )

    def apply_discrete(self, t: float, x, regs, outs) -> dict[str, tuple[float, ...]]:
        """Registers after the sample hits at t; inputs latch from ``outs``."""
        hits = self.hits_at(t)
        if not hits:
            return regs
        new_regs = dict(regs)
        for bid in hits:
            new_regs[bid] = _palette.block_discrete_update(
                self.kinds[bid],
                self.frozen_params[bid],
                regs[bid],
                self._inputs(bid, outs),
                t,
                bid,
            )
        return new_regs

    def locate_nonfinite(self, vec) -> str | None:
        """Block id owning the first non-finite entry of a state-sized vector."""
        bad = np.flatnonzero(~np.isfinite(np.asarray(vec)))
        if bad.size == 0:
            return None
        for bid in self.stateful:
            sl = self.layout[bid]
            if sl.start <= bad[0] < sl.stop:
                return bid
        return None


def _freeze_params(block) -> dict[str, object]:
    parsed = {name: pv.parsed for name, pv in block.params.items()}
    if block.kind == "CLR":
        combined = parsed["num"] / parsed["den"]
        return {"ss": _palette.tf_to_state_space(combined)}
    return parsed


def compile_diagram(diagram: Diagram) -> CompiledSystem:
    """Flatten a validated diagram.

    Raises:
        NotValidatedError: validate() still reports error diagnostics.
    """
    errors = [d for d in validate(diagram) if d.severity == ERROR]
    if errors:
        raise NotValidatedError(errors)

    order = tuple(schedule(feedthrough_graph(diagram)))

    kinds = {}
    frozen: dict[str, dict] = {}
    wiring: dict[str, tuple[tuple[str, int], ...]] = {}
    layout: dict[str, slice] = {}
    stateful = []
    offset = 0
    for bid in order:
        block = diagram.blocks[bid]
        kinds[bid] = block.kind
        frozen[bid] = _freeze_params(block)
        wiring[bid] = tuple(
            diagram.driver_of(bid, port).src for port in range(block.n_in)
        )
        n = _palette.state_count(block.kind, frozen[bid], bid)
        if n:
            layout[bid] = slice(offset, offset + n)
            stateful.append(bid)
            offset += n

    sample_grids = tuple(
        (bid, float(_palette.sample_period(kinds[bid], frozen[bid], bid)))
        for bid in sorted(diagram.blocks)
        if _palette.block_spec(kinds[bid]).is_discrete
    )
    probes = tuple(
        (bid, diagram.driver_of(bid, 0).src)
        for bid in sorted(diagram.blocks)
        if kinds[bid] == "CSCOPE"
    )

    return CompiledSystem(
        state_dim=offset,
        layout=layout,
        eval_order=order,
        sample_grids=sample_grids,
        probes=probes,
        kinds=kinds,
        frozen_params=frozen,
        wiring=wiring,
        stateful=tuple(stateful),
    )
