"""Random diagram generator for round-trip and fuzz testing.

Plain ``random.Random`` rather than hypothesis so the bulk round-trip tests
can crank through hundreds of diagrams quickly and reproducibly.
"""

from __future__ import annotations

import random

from xcosw import Diagram
from xcosw.blocks import palette
from xcosw.params import format_param

_TITLE_CHARS = "abcdefghijklmnopqrstuvwxyz ABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789_-()&<>'\"éµΩ"


def _scalar_text(rng: random.Random) -> str:
    style = rng.randrange(4)
    if style == 0:
        return str(rng.randint(-20, 20))
    if style == 1:
        return format_param(rng.uniform(-10, 10))
    if style == 2:
        return f"{rng.uniform(-1, 1):.3e}"
    return f"{rng.randint(1, 9)}*({rng.randint(-5, 5)}+{rng.randint(0, 5)})"


def _rational_text(rng: random.Random) -> str:
    den_deg = rng.randint(1, 3)
    num_deg = rng.randint(0, den_deg)

    def poly(deg: int) -> str:
        terms = [f"{rng.randint(1, 9)}"]
        for k in range(1, deg):
            terms.append(f"{rng.randint(-9, 9)}*s^{k}")
        terms.append(f"{rng.randint(1, 9)}*s^{deg}" if deg else f"{rng.randint(1, 9)}")
        return "+".join(terms).replace("+-", "-")

    return f"({poly(num_deg)})/({poly(den_deg)})"


def _param_text(rng: random.Random, expect: str) -> str:
    if rng.random() < 0.08:
        return "%s"
    if expect == "signs":
        return "[" + ";".join(rng.choice(["+1", "-1", "1"]) for _ in range(rng.randint(1, 4))) + "]"
    if expect == "rational":
        return _rational_text(rng)
    return _scalar_text(rng)


def random_diagram(rng: random.Random, max_blocks: int = 8) -> Diagram:
    d = Diagram(title="".join(rng.choice(_TITLE_CHARS) for _ in range(rng.randint(0, 24))))
    d.background = rng.choice([-1, 0, 0xFFFFFF, rng.randint(-10, 10)])
    d.settings.t0 = rng.choice([0.0, rng.uniform(-2, 2)])
    d.settings.tf = d.settings.t0 + rng.uniform(0.5, 20)
    d.settings.solver = rng.choice(["rk4", "adaptive"])
    d.settings.dt = rng.choice([1e-3, 0.05, rng.uniform(1e-4, 0.2)])
    d.settings.rtol = rng.choice([1e-6, 1e-4])
    d.settings.atol = rng.choice([1e-9, 1e-12])
    d.settings.max_step = rng.choice([None, rng.uniform(0.01, 1.0)])
    if rng.random() < 0.3:
        d.attrs["origin"] = rng.choice(["desktop", "web", "batch"])

    specs = {spec.kind: spec for spec in palette()}
    for _ in range(rng.randint(0, max_blocks)):
        kind = rng.choice(list(specs))
        params = {
            name: _param_text(rng, schema.expect)
            for name, schema in specs[kind].params.items()
            if rng.random() < 0.8
        }
        block_id = d.add_block(
            kind,
            params,
            position=(round(rng.uniform(0, 800), 1), round(rng.uniform(0, 600), 1)),
        )
        if rng.random() < 0.25:
            d.blocks[block_id].attrs["style"] = kind
        if rng.random() < 0.1:
            d.blocks[block_id].attrs["note"] = "generated"

    blocks = list(d.blocks.values())
    free = [(b.id, port) for b in blocks for port in range(b.n_in)]
    rng.shuffle(free)
    sources = [(b.id, port) for b in blocks for port in range(b.n_out)]
    for dst in free:
        if sources and rng.random() < 0.7:
            d.connect(rng.choice(sources), dst)
    return d
