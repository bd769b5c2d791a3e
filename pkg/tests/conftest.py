"""Shared fixtures: canonical little models used across the suite."""

from __future__ import annotations

import pathlib

import pytest

from xcosw import Diagram

MODELS = pathlib.Path(__file__).resolve().parents[1] / "models"


def build_lag(step_time: float = 0.0, tau: float = 0.5) -> Diagram:
    """step -> 1/(tau*s + 1) -> scope, with ids step1/lag1/scope1."""
    d = Diagram(title="first-order lag")
    d.add_block("STEP_FUNCTION", {"step_time": step_time}, id="step1")
    d.add_block("CLR", {"num": "1", "den": f"1+{tau!r}*s"}, id="lag1")
    d.add_block("CSCOPE", id="scope1")
    d.connect(("step1", 0), ("lag1", 0))
    d.connect(("lag1", 0), ("scope1", 0))
    return d


def build_dc_motor(unset: bool = False) -> Diagram:
    """Closed-loop DC motor (R=1, L=0.5, K=0.01, J=0.01, b=0.1)."""
    d = Diagram(title="dc motor")
    d.add_block("STEP_FUNCTION", {"step_time": 0.0}, id="step1")
    d.add_block("SUMMATION", {"signs": "[+1;-1]"}, id="sum1")
    d.add_block("CLR", {"num": "%s" if unset else "1", "den": "1+0.5*s"}, id="elec1")
    d.add_block("GAINBLK", {"gain": "%s" if unset else "0.01"}, id="kgain1")
    d.add_block("CLR", {"num": "1", "den": "0.1+0.01*s"}, id="mech1")
    d.add_block("CSCOPE", id="scope1")
    d.add_block("GAINBLK", {"gain": "0.01"}, id="emf1")
    d.connect(("step1", 0), ("sum1", 0))
    d.connect(("sum1", 0), ("elec1", 0))
    d.connect(("elec1", 0), ("kgain1", 0))
    d.connect(("kgain1", 0), ("mech1", 0))
    d.connect(("mech1", 0), ("scope1", 0))
    d.connect(("mech1", 0), ("emf1", 0))
    d.connect(("emf1", 0), ("sum1", 1))
    return d


def build_decay(x0: float = 1.0, rate: float = 1.0) -> Diagram:
    """xdot = -rate * x via an integrator closed through a gain.

    The cycle is broken by the integrator's state, so it compiles.
    """
    d = Diagram(title="decay")
    d.add_block("INTEGRAL_f", {"x0": x0}, id="int1")
    d.add_block("GAINBLK", {"gain": -rate}, id="gain1")
    d.add_block("CSCOPE", id="scope1")
    d.connect(("int1", 0), ("gain1", 0))
    d.connect(("gain1", 0), ("int1", 0))
    d.connect(("int1", 0), ("scope1", 0))
    return d


def build_delay(value: float = 3.0, ts: float = 0.5, x0: float = 0.0) -> Diagram:
    d = Diagram(title="unit delay")
    d.add_block("CONST_m", {"value": value}, id="const1")
    d.add_block("DOLLAR", {"Ts": ts, "x0": x0}, id="delay1")
    d.add_block("CSCOPE", id="scope1")
    d.connect(("const1", 0), ("delay1", 0))
    d.connect(("delay1", 0), ("scope1", 0))
    return d


@pytest.fixture
def lag_diagram() -> Diagram:
    return build_lag()


@pytest.fixture
def dc_motor_diagram() -> Diagram:
    return build_dc_motor()


@pytest.fixture
def decay_diagram() -> Diagram:
    return build_decay()
