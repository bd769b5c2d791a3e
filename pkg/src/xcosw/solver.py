"""Time integration of compiled systems.

Two integrators share one event loop: classical fixed-step RK4 and an
embedded Dormand–Prince 4(5) pair with the usual proportional step control.
Discrete sample times are handled by truncating whatever step would cross
the next event so the solver lands on it exactly; at an event instant the
pending register updates latch their inputs from the pre-update outputs,
then the probe row is recorded from the post-update outputs, so a scope
wired to a unit delay sees the new value from the hit onward.

The output grid is every accepted step — there is no dense interpolation.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .compiler import CompiledSystem
from .model import SimOptions

__all__ = [
    "SimulationResult",
    "SolverError",
    "NonFiniteError",
    "StepUnderflowError",
    "SimulationTimeout",
    "sample_schedule",
    "rk4_step",
    "simulate_fixed",
    "simulate_adaptive",
    "simulate",
]

# fraction of a step considered "close enough" to fold into the event target
_STEP_SLACK = 1e-12
_UNDERFLOW_FRACTION = 1e-14
_MIN_SHRINK = 0.2
_MAX_GROWTH = 5.0
_SAFETY = 0.9


class SolverError(RuntimeError):
    pass


class NonFiniteError(SolverError):
    def __init__(self, t: float, block_id: str | None):
        where = f" (first non-finite state in block '{block_id}')" if block_id else ""
        super().__init__(f"solution became non-finite at t={t!r}{where}")
        self.t = t
        self.block_id = block_id


class StepUnderflowError(SolverError):
    pass


class SimulationTimeout(SolverError):
    pass


@dataclass
class SimulationResult:
    """An immutable recording: probe values on the solver's output grid."""

    times: tuple[float, ...]
    signals: dict[str, tuple[float, ...]]
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.times = tuple(float(t) for t in self.times)
        self.signals = {k: tuple(float(v) for v in vs) for k, vs in self.signals.items()}


def sample_schedule(sys: CompiledSystem, t0: float, tf: float) -> list[float]:
    """Sorted union of every block's sample instants k·Ts inside [t0, tf].

    Instants from different grids that coincide within 1e-12·Ts are merged
    (the earlier representative wins).
    """
    instants: list[float] = []
    max_ts = 0.0
    for _, ts in sys.sample_grids:
        max_ts = max(max_ts, ts)
        k = math.ceil(t0 / ts - _STEP_SLACK)
        while True:
            t = k * ts
            if t > tf + _STEP_SLACK * ts:
                break
            instants.append(min(t, tf))
            k += 1
    instants.sort()
    merged: list[float] = []
    tol = _STEP_SLACK * max_ts
    for t in instants:
        if not merged or t - merged[-1] > tol:
            merged.append(t)
    return merged


def _stage(sys, t, x, regs):
    dx = sys.derivative(t, x, regs)
    if not np.all(np.isfinite(dx)):
        raise NonFiniteError(t, sys.locate_nonfinite(dx))
    return dx


def rk4_step(sys: CompiledSystem, t: float, h: float, x, regs=None) -> np.ndarray:
    """One classical Runge–Kutta step of size h from (t, x)."""
    if regs is None:
        regs = {}
    x = np.asarray(x, dtype=float)
    k1 = _stage(sys, t, x, regs)
    k2 = _stage(sys, t + h / 2, x + (h / 2) * k1, regs)
    k3 = _stage(sys, t + h / 2, x + (h / 2) * k2, regs)
    k4 = _stage(sys, t + h, x + h * k3, regs)
    return x + (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4)


# ---------------------------------------------------------------------------
# shared event-loop plumbing
# ---------------------------------------------------------------------------

class _Recorder:
    """Accumulates the output grid and applies event-time register updates."""

    def __init__(self, sys: CompiledSystem, t0: float, x0, regs):
        self.sys = sys
        self.regs = regs
        self.times: list[float] = []
        self.rows: list[tuple[float, ...]] = []
        self._capture(t0, x0, event=bool(sys.hits_at(t0)))

    def _capture(self, t, x, event: bool):
        outs = self.sys.outputs(t, x, self.regs)
        if event:
            self.regs = self.sys.apply_discrete(t, x, self.regs, outs)
            outs = self.sys.outputs(t, x, self.regs)
        self.times.append(t)
        self.rows.append(self.sys.probe_row(outs))

    def step_done(self, t, x, at_event: bool):
        self._capture(t, x, event=at_event and bool(self.sys.hits_at(t)))

    def result(self, solver: str, accepted: int, rejected: int) -> SimulationResult:
        signals = {
            pid: [row[i] for row in self.rows]
            for i, pid in enumerate(self.sys.probe_ids())
        }
        return SimulationResult(
            times=self.times,
            signals=signals,
            metadata={
                "solver": solver,
                "steps_accepted": accepted,
                "steps_rejected": rejected,
            },
        )


def _event_targets(sys, t0, tf) -> list[float]:
    inner = [e for e in sample_schedule(sys, t0, tf) if t0 < e < tf]
    return inner + [tf]


class _Deadline:
    def __init__(self, budget_s):
        self.at = None if budget_s is None else time.monotonic() + budget_s
        self.budget_s = budget_s

    def check(self, t):
        if self.at is not None and time.monotonic() > self.at:
            raise SimulationTimeout(
                f"simulation exceeded its {self.budget_s:g}s budget at t={t:g}"
            )


# ---------------------------------------------------------------------------
# fixed-step RK4
# ---------------------------------------------------------------------------

def simulate_fixed(sys: CompiledSystem, opts: SimOptions, budget_s=None) -> SimulationResult:
    """Integrate with constant steps of opts.dt, truncated at events and tf."""
    opts.check()
    t0, tf, dt = opts.t0, opts.tf, opts.dt
    x = sys.initial_state()
    rec = _Recorder(sys, t0, x, sys.initial_registers())
    deadline = _Deadline(budget_s)
    accepted = 0
    t = t0
    for target in _event_targets(sys, t0, tf):
        # walk base + k·dt instead of accumulating t += dt, so long runs do
        # not drift and near-multiples of dt collapse onto the target exactly
        base = t
        k = 0
        while t < target:
            k += 1
            t_next = base + k * dt
            if t_next >= target - dt * _STEP_SLACK:
                t_next = target
            x = rk4_step(sys, t, t_next - t, x, rec.regs)
            if not np.all(np.isfinite(x)):
                raise NonFiniteError(t_next, sys.locate_nonfinite(x))
            t = t_next
            accepted += 1
            rec.step_done(t, x, at_event=(t == target))
            deadline.check(t)
    return rec.result("rk4", accepted, 0)


# ---------------------------------------------------------------------------
# adaptive Dormand–Prince 4(5)
# ---------------------------------------------------------------------------

_DOPRI_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
_DOPRI_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
# 5th-order propagation weights (FSAL pair: identical to the last A row)
_DOPRI_B = (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0)
# difference between 5th- and 4th-order weights: the error estimator
_DOPRI_E = (
    71 / 57600,
    0.0,
    -71 / 16695,
    71 / 1920,
    -17253 / 339200,
    22 / 525,
    -1 / 40,
)


def _dopri_step(sys, t, h, x, regs):
    ks = []
    for c, row in zip(_DOPRI_C, _DOPRI_A):
        xi = x
        if row:
            xi = x + h * sum(a * k for a, k in zip(row, ks) if a)
        ks.append(_stage(sys, t + c * h, xi, regs))
    x_next = x + h * sum(b * k for b, k in zip(_DOPRI_B, ks) if b)
    err = h * sum(e * k for e, k in zip(_DOPRI_E, ks) if e)
    return x_next, err


def simulate_adaptive(sys: CompiledSystem, opts: SimOptions, budget_s=None) -> SimulationResult:
    """Integrate with the embedded 4(5) pair and proportional step control.

    A step is accepted when the scaled RMS of the embedded error estimate is
    at most one, with per-component scale atol + rtol·max(|x|, |x_next|); the
    next step size is h·clamp(0.9·errnorm^(−1/5), 0.2, 5), capped by max_step.

    Raises:
        StepUnderflowError: the controller pushed h below 1e−14·(tf−t0).
        NonFiniteError, SimulationTimeout: as for the fixed-step solver.
    """
    opts.check()
    t0, tf = opts.t0, opts.tf
    span = tf - t0
    max_h = opts.max_step_effective()
    x = sys.initial_state()
    rec = _Recorder(sys, t0, x, sys.initial_registers())
    deadline = _Deadline(budget_s)
    accepted = rejected = 0
    t = t0
    h = min(max_h, span / 100)
    for target in _event_targets(sys, t0, tf):
        while t < target:
            h = min(h, max_h, target - t)
            if h < _UNDERFLOW_FRACTION * span:
                raise StepUnderflowError(
                    f"step size underflow (h={h:g}) at t={t:g}; "
                    "the system may be too stiff for an explicit solver"
                )
            x_next, err = _dopri_step(sys, t, h, x, rec.regs)
            if not np.all(np.isfinite(x_next)):
                raise NonFiniteError(t, sys.locate_nonfinite(x_next))
            scale = opts.atol + opts.rtol * np.maximum(np.abs(x), np.abs(x_next))
            errnorm = 0.0
            if scale.size:
                errnorm = float(np.sqrt(np.mean((err / scale) ** 2)))
            if errnorm <= 1.0:
                landed = h == target - t or t + h >= target
                t = target if landed else t + h
                x = x_next
                accepted += 1
                rec.step_done(t, x, at_event=landed)
                factor = _MAX_GROWTH if errnorm == 0.0 else min(
                    _MAX_GROWTH, max(_MIN_SHRINK, _SAFETY * errnorm ** -0.2)
                )
            else:
                rejected += 1
                factor = max(_MIN_SHRINK, _SAFETY * errnorm ** -0.2)
            h *= factor
            deadline.check(t)
    return rec.result("adaptive", accepted, rejected)


def simulate(sys: CompiledSystem, opts: SimOptions | None = None, budget_s=None) -> SimulationResult:
    """Run the solver selected by opts.solver (see SimOptions)."""
    opts = opts or SimOptions()
    opts.check()
    if opts.solver == "rk4":
        return simulate_fixed(sys, opts, budget_s=budget_s)
    return simulate_adaptive(sys, opts, budget_s=budget_s)
