#!/usr/bin/env python3
"""Regenerate the bundled example models in models/.

Run from the repository root:  python3 tools/make_fixtures.py
"""

from __future__ import annotations

import pathlib
import sys

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parents[1] / "src"))

from xcosw import Diagram, serialize_xcos_xml, to_interchange_json

OUT = pathlib.Path(__file__).resolve().parents[1] / "models"


def lag() -> Diagram:
    """Unit step into a first-order lag 1/(0.5 s + 1)."""
    d = Diagram(title="first-order lag")
    d.settings.tf = 3.0
    d.add_block("STEP_FUNCTION", {"step_time": 0.0}, position=(40, 80), id="step1")
    d.add_block("CLR", {"num": "1", "den": "1+0.5*s"}, position=(160, 80), id="lag1")
    d.add_block("CSCOPE", position=(280, 80), id="scope1")
    d.connect(("step1", 0), ("lag1", 0))
    d.connect(("lag1", 0), ("scope1", 0))
    return d


def dc_motor(unset: bool = False) -> Diagram:
    """Voltage step driving a DC motor: electrical lag, torque gain,
    mechanical lag, and back-EMF feedback (R=1, L=0.5, K=0.01, J=0.01, b=0.1).
    """
    d = Diagram(title="dc motor")
    d.add_block("STEP_FUNCTION", {"step_time": 0.0}, position=(40, 100), id="step1")
    d.add_block("SUMMATION", {"signs": "[+1;-1]"}, position=(150, 100), id="sum1")
    d.add_block(
        "CLR",
        {"num": "%s" if unset else "1", "den": "1+0.5*s"},
        position=(260, 100),
        id="elec1",
    )
    d.add_block("GAINBLK", {"gain": "%s" if unset else "0.01"}, position=(370, 100), id="kgain1")
    d.add_block("CLR", {"num": "1", "den": "0.1+0.01*s"}, position=(480, 100), id="mech1")
    d.add_block("CSCOPE", position=(600, 100), id="scope1")
    d.add_block("GAINBLK", {"gain": "0.01"}, position=(370, 220), id="emf1")
    d.connect(("step1", 0), ("sum1", 0))
    d.connect(("sum1", 0), ("elec1", 0))
    d.connect(("elec1", 0), ("kgain1", 0))
    d.connect(("kgain1", 0), ("mech1", 0))
    d.connect(("mech1", 0), ("scope1", 0))
    d.connect(("mech1", 0), ("emf1", 0))
    d.connect(("emf1", 0), ("sum1", 1))
    return d


def unit_delay_demo() -> Diagram:
    d = Diagram(title="unit delay")
    d.settings.tf = 3.0
    d.settings.dt = 0.05
    d.add_block("CONST_m", {"value": 3}, position=(40, 80), id="const1")
    d.add_block("DOLLAR", {"Ts": 0.5, "x0": 0}, position=(160, 80), id="delay1")
    d.add_block("CSCOPE", position=(280, 80), id="scope1")
    d.connect(("const1", 0), ("delay1", 0))
    d.connect(("delay1", 0), ("scope1", 0))
    return d


# the step-source listing as exported by the original desktop tool, completed
# with the content its published excerpt elided
MAVXCOS_STEP = """<?xml version="1.0" encoding="UTF-8"?>
<XcosDiagram background="-1" title="MavXcos">
  <mxGraphModel as="model">
    <root>
      <mxCell id="0"/>
      <mxCell id="1" parent="0"/>
      <BasicBlock blockType="c" id="2" interfaceFunctionName="STEP_FUNCTION" parent="1" simulationFunctionName="csuper" simulationFunctionType="DEFAULT" style="STEP_FUNCTION">
        <mxGeometry as="geometry" x="120.0" y="80.0" width="40.0" height="40.0"/>
      </BasicBlock>
    </root>
  </mxGraphModel>
  <mxCell id="1" parent="0" as="defaultParent"/>
</XcosDiagram>
"""


def main() -> None:
    OUT.mkdir(exist_ok=True)
    (OUT / "lag.xcosw.xml").write_bytes(serialize_xcos_xml(lag()))
    (OUT / "lag.json").write_bytes(to_interchange_json(lag()) + b"\n")
    (OUT / "dc_motor.xcosw.xml").write_bytes(serialize_xcos_xml(dc_motor()))
    (OUT / "dc_motor_unset.xcosw.xml").write_bytes(serialize_xcos_xml(dc_motor(unset=True)))
    (OUT / "unit_delay.xcosw.xml").write_bytes(serialize_xcos_xml(unit_delay_demo()))
    (OUT / "mavxcos_step.xcosw.xml").write_text(MAVXCOS_STEP, encoding="utf-8")
    for p in sorted(OUT.iterdir()):
        print(f"wrote {p}")


if __name__ == "__main__":
    main()
