"""Numerical integration: fixed and adaptive stepping, events, failure modes."""

from __future__ import annotations

import math

import numpy as np
import pytest

from xcosw.compiler import compile_diagram
from xcosw.model import Diagram, SimOptions
from xcosw.solver import (
    NonFiniteError,
    SimulationTimeout,
    StepUnderflowError,
    rk4_step,
    sample_schedule,
    simulate,
    simulate_adaptive,
    simulate_fixed,
)

from conftest import build_dc_motor, build_decay, build_delay, build_lag


def compile_built(diagram):
    return compile_diagram(diagram)


class TestRk4Step:
    def test_matches_the_taylor_polynomial_for_exponential_decay(self):
        # xdot = -x over one step: RK4 reproduces the quartic Taylor series,
        # 1 - h + h^2/2 - h^3/6 + h^4/24 = 0.9048375 exactly for h = 0.1
        sys = compile_built(build_decay(x0=1.0, rate=1.0))
        x1 = rk4_step(sys, 0.0, 0.1, sys.initial_state())
        assert abs(x1[0] - 0.9048375) < 1e-15

    def test_exact_for_cubic_quadrature(self):
        # xdot = t^3 has quartic solution; RK4 integrates cubics exactly:
        # the ramp t is built from an integrator fed by a constant
        d = Diagram()
        d.add_block("CONST_m", {"value": 1.0}, id="c1")
        d.add_block("INTEGRAL_f", {"x0": 0.0}, id="ramp")  # t
        d.add_block("GAINBLK", {"gain": 1.0}, id="g1")
        d.add_block("CSCOPE", id="scope1")
        d.connect(("c1", 0), ("ramp", 0))
        d.connect(("ramp", 0), ("g1", 0))
        d.connect(("g1", 0), ("scope1", 0))
        sys = compile_built(d)
        x = sys.initial_state()
        x1 = rk4_step(sys, 0.0, 0.5, x)
        assert x1[0] == pytest.approx(0.5, abs=1e-15)


class TestFixedStep:
    def test_lag_step_response_to_machine_noise_levels(self):
        sys = compile_built(build_lag(step_time=0.0, tau=0.5))
        res = simulate_fixed(sys, SimOptions(t0=0.0, tf=3.0, dt=1e-3))
        times = np.asarray(res.times)
        y = np.asarray(res.signals["scope1"])
        exact = 1.0 - np.exp(-2.0 * times)
        assert len(times) == 3001
        assert times[0] == 0.0 and times[-1] == 3.0
        assert np.max(np.abs(y - exact)) < 1e-7

    def test_grid_has_no_drift_or_sliver_steps(self):
        sys = compile_built(build_lag())
        res = simulate_fixed(sys, SimOptions(t0=0.0, tf=1.0, dt=0.1))
        assert res.times == pytest.approx([0.1 * k for k in range(11)], abs=1e-12)
        diffs = np.diff(res.times)
        assert diffs.min() > 0.05  # no tiny remainder step before tf

    def test_times_are_strictly_increasing_and_span_the_window(self):
        sys = compile_built(build_dc_motor())
        res = simulate_fixed(sys, SimOptions(t0=0.5, tf=2.5, dt=1e-3))
        t = np.asarray(res.times)
        assert t[0] == 0.5 and t[-1] == 2.5
        assert np.all(np.diff(t) > 0)
        assert len(res.signals["scope1"]) == len(res.times)

    def test_fourth_order_convergence(self):
        # halving dt must cut the global error by about 2^4
        exact = math.exp(-1.0)
        errs = []
        for dt in (0.1, 0.05, 0.025):
            sys = compile_built(build_decay(x0=1.0, rate=1.0))
            res = simulate_fixed(sys, SimOptions(t0=0.0, tf=1.0, dt=dt))
            errs.append(abs(res.signals["scope1"][-1] - exact))
        assert 12.0 <= errs[0] / errs[1] <= 20.0
        assert 12.0 <= errs[1] / errs[2] <= 20.0

    def test_equilibrium_is_preserved(self):
        # integrator feedback lag starting at its fixed point stays put
        d = Diagram()
        d.add_block("CONST_m", {"value": 1.0}, id="u")
        d.add_block("SUMMATION", {"signs": "[+1;-1]"}, id="e")
        d.add_block("INTEGRAL_f", {"x0": 1.0}, id="x")
        d.add_block("CSCOPE", id="scope1")
        d.connect(("u", 0), ("e", 0))
        d.connect(("x", 0), ("e", 1))
        d.connect(("e", 0), ("x", 0))
        d.connect(("x", 0), ("scope1", 0))
        sys = compile_built(d)
        res = simulate_fixed(sys, SimOptions(t0=0.0, tf=10.0, dt=0.01))
        assert max(abs(v - 1.0) for v in res.signals["scope1"]) < 1e-9

    def test_scaling_input_scales_linear_response(self):
        base = simulate_fixed(
            compile_built(build_lag()), SimOptions(tf=2.0, dt=1e-3)
        ).signals["scope1"]
        d = build_lag()
        d.set_param("step1", "final", "3.0")
        tripled = simulate_fixed(compile_built(d), SimOptions(tf=2.0, dt=1e-3)).signals[
            "scope1"
        ]
        assert np.allclose(np.asarray(tripled), 3.0 * np.asarray(base), atol=1e-12)

    def test_metadata_counts_steps(self):
        sys = compile_built(build_lag())
        res = simulate_fixed(sys, SimOptions(tf=1.0, dt=0.1))
        assert res.metadata["solver"] == "rk4"
        assert res.metadata["steps_accepted"] == 10
        assert res.metadata["steps_rejected"] == 0


class TestSampleSchedule:
    def test_single_grid(self):
        sys = compile_built(build_delay(ts=0.5))
        assert sample_schedule(sys, 0.0, 1.0) == [0.0, 0.5, 1.0]

    def test_grid_union_merges_coincident_hits(self):
        d = build_delay(ts=0.5)
        d.add_block("SAMPHOLD", {"Ts": 0.75}, id="hold1")
        d.add_block("CSCOPE", id="scope2")
        d.connect(("const1", 0), ("hold1", 0))
        d.connect(("hold1", 0), ("scope2", 0))
        sys = compile_built(d)
        assert sample_schedule(sys, 0.0, 1.5) == [0.0, 0.5, 0.75, 1.0, 1.5]

    def test_no_discrete_blocks_no_events(self):
        sys = compile_built(build_lag())
        assert sample_schedule(sys, 0.0, 1.0) == []

    def test_window_not_anchored_at_zero(self):
        sys = compile_built(build_delay(ts=0.5))
        assert sample_schedule(sys, 0.7, 2.1) == [1.0, 1.5, 2.0]


class TestDiscreteEvents:
    def test_hits_land_exactly_once_in_the_time_vector(self):
        sys = compile_built(build_delay(ts=0.5))
        res = simulate_fixed(sys, SimOptions(tf=2.0, dt=0.3))
        times = list(res.times)
        for hit in (0.5, 1.0, 1.5, 2.0):
            assert times.count(hit) == 1

    def test_delay_of_a_constant_switches_after_one_period(self):
        sys = compile_built(build_delay(value=3.0, ts=0.5, x0=0.0))
        res = simulate_fixed(sys, SimOptions(tf=1.0, dt=0.1))
        for t, y in zip(res.times, res.signals["scope1"]):
            expected = 0.0 if t < 0.5 else 3.0
            assert y == expected, (t, y)

    def test_delay_chain_of_a_ramp_recurrence(self):
        # feed a ramp into the delay: y(t_k) = u(t_{k-1}) on the grid
        d = Diagram()
        d.add_block("CONST_m", {"value": 1.0}, id="c1")
        d.add_block("INTEGRAL_f", {"x0": 0.0}, id="ramp")
        d.add_block("DOLLAR", {"Ts": 0.5, "x0": 0.0}, id="delay1")
        d.add_block("CSCOPE", id="scope1")
        d.connect(("c1", 0), ("ramp", 0))
        d.connect(("ramp", 0), ("delay1", 0))
        d.connect(("delay1", 0), ("scope1", 0))
        sys = compile_built(d)
        res = simulate_fixed(sys, SimOptions(tf=2.0, dt=0.05))
        by_time = dict(zip(res.times, res.signals["scope1"]))
        for k in range(1, 5):
            t = 0.5 * k
            assert by_time[t] == pytest.approx(t - 0.5, abs=1e-12)

    def test_hold_samples_a_ramp(self):
        d = Diagram()
        d.add_block("CONST_m", {"value": 1.0}, id="c1")
        d.add_block("INTEGRAL_f", {"x0": 0.0}, id="ramp")
        d.add_block("SAMPHOLD", {"Ts": 0.4}, id="hold1")
        d.add_block("CSCOPE", id="scope1")
        d.connect(("c1", 0), ("ramp", 0))
        d.connect(("ramp", 0), ("hold1", 0))
        d.connect(("hold1", 0), ("scope1", 0))
        sys = compile_built(d)
        res = simulate_fixed(sys, SimOptions(tf=1.0, dt=0.1))
        for t, y in zip(res.times, res.signals["scope1"]):
            assert y == pytest.approx(0.4 * math.floor(t / 0.4 + 1e-9), abs=1e-9), t

    def test_adaptive_lands_on_the_same_events(self):
        sys = compile_built(build_delay(ts=0.5))
        res = simulate_adaptive(sys, SimOptions(tf=2.0))
        times = list(res.times)
        for hit in (0.5, 1.0, 1.5, 2.0):
            assert times.count(hit) == 1


class TestAdaptive:
    def test_lag_tracks_the_exact_response(self):
        sys = compile_built(build_lag())
        res = simulate_adaptive(sys, SimOptions(tf=3.0, solver="adaptive"))
        times = np.asarray(res.times)
        y = np.asarray(res.signals["scope1"])
        exact = 1.0 - np.exp(-2.0 * times)
        assert np.max(np.abs(y - exact)) < 1e-5
        assert res.metadata["solver"] == "adaptive"

    def test_tighter_tolerance_means_smaller_error_and_more_steps(self):
        sys = compile_built(build_decay())
        loose = simulate_adaptive(sys, SimOptions(tf=5.0, rtol=1e-4, atol=1e-7))
        tight = simulate_adaptive(sys, SimOptions(tf=5.0, rtol=1e-8, atol=1e-11))

        def max_err(res):
            t = np.asarray(res.times)
            return np.max(np.abs(np.asarray(res.signals["scope1"]) - np.exp(-t)))

        assert max_err(tight) < max_err(loose) / 10.0
        assert len(tight.times) > len(loose.times)

    def test_agrees_with_fixed_step_at_the_endpoint(self):
        for build in (build_lag, build_dc_motor):
            sys = compile_built(build())
            opts = SimOptions(tf=4.0)
            y_fixed = simulate_fixed(sys, opts).signals["scope1"][-1]
            y_adept = simulate_adaptive(sys, opts).signals["scope1"][-1]
            assert abs(y_fixed - y_adept) <= 10.0 * (opts.atol + opts.rtol * abs(y_fixed))

    def test_max_step_caps_intervals(self):
        sys = compile_built(build_decay())
        res = simulate_adaptive(sys, SimOptions(tf=5.0, max_step=0.25))
        assert np.max(np.diff(res.times)) <= 0.25 + 1e-12

    def test_rejections_are_counted(self):
        # a sharp step at t=1 forces at least one rejected trial step
        sys = compile_built(build_lag(step_time=1.0, tau=0.01))
        res = simulate_adaptive(sys, SimOptions(tf=2.0))
        assert res.metadata["steps_rejected"] > 0


class TestFailureModes:
    def test_divergence_reports_the_block(self):
        sys = compile_built(build_decay(x0=1.0, rate=-40.0))  # xdot = +40x
        with pytest.raises(NonFiniteError) as info:
            simulate_fixed(sys, SimOptions(tf=100.0, dt=0.5))
        assert info.value.block_id == "int1"
        assert info.value.t is not None

    class _NoisyStub:
        """Duck-typed stand-in whose derivative never smooths out."""

        state_dim = 1
        sample_grids = ()

        def initial_state(self):
            return np.zeros(1)

        def initial_registers(self):
            return {}

        def hits_at(self, t):
            return ()

        def outputs(self, t, x, regs):
            return {}

        def probe_row(self, outs):
            return ()

        def probe_ids(self):
            return ()

        def derivative(self, t, x, regs):
            return np.array([1e30 * math.sin(1e30 * (t + 1e-7))])

        def apply_discrete(self, t, x, regs, outs):
            return regs

        def locate_nonfinite(self, vec):
            return None

    def test_persistent_error_underflows_the_step(self):
        with pytest.raises(StepUnderflowError):
            simulate_adaptive(self._NoisyStub(), SimOptions(tf=1.0))

    def test_budget_timeout(self):
        sys = compile_built(build_lag())
        with pytest.raises(SimulationTimeout):
            simulate_fixed(sys, SimOptions(tf=3.0, dt=1e-6), budget_s=1e-9)
        with pytest.raises(SimulationTimeout):
            simulate_adaptive(sys, SimOptions(tf=3.0), budget_s=1e-9)


class TestDispatcher:
    def test_solver_field_selects_the_method(self):
        sys = compile_built(build_lag())
        assert simulate(sys, SimOptions(tf=1.0)).metadata["solver"] == "rk4"
        assert (
            simulate(sys, SimOptions(tf=1.0, solver="adaptive")).metadata["solver"]
            == "adaptive"
        )

    def test_defaults_come_from_simoptions(self):
        sys = compile_built(build_lag())
        res = simulate(sys)
        assert res.times[-1] == 10.0

    def test_options_are_validated_first(self):
        from xcosw.model import OptionsError

        sys = compile_built(build_lag())
        with pytest.raises(OptionsError):
            simulate(sys, SimOptions(tf=-1.0))


class TestAgainstMatrixExponential:
    def test_dc_motor_transient_matches_expm(self):
        scipy_linalg = pytest.importorskip("scipy.linalg")
        R, L, K, J, b = 1.0, 0.5, 0.01, 0.01, 0.1
        sys = compile_built(build_dc_motor())
        i_e = sys.layout["elec1"].start
        i_m = sys.layout["mech1"].start
        A = np.zeros((2, 2))
        A[i_e, i_e] = -R / L
        A[i_e, i_m] = -K / J
        A[i_m, i_e] = K / L
        A[i_m, i_m] = -b / J
        B = np.zeros(2)
        B[i_e] = 1.0
        C = np.zeros(2)
        C[i_m] = 1.0 / J

        res = simulate_fixed(sys, SimOptions(tf=2.0, dt=1e-3))
        Ainv_B = np.linalg.solve(A, B)
        for idx in range(0, len(res.times), 100):
            t = res.times[idx]
            x_exact = scipy_linalg.expm(A * t) @ Ainv_B - Ainv_B
            assert abs(res.signals["scope1"][idx] - C @ x_exact) < 1e-6
