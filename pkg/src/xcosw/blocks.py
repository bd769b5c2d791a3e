"""The block palette: every kind's ports, parameters, and runtime semantics.

Each palette entry couples static metadata (arity, parameter schema) with the
four behaviour functions the rest of the system calls:

* ``block_output``       — algebraic output map y = g(x, u, t)
* ``block_derivative``   — continuous dynamics dx/dt = f(x, u, t)
* ``block_discrete_update`` — register update at a sample hit
* ``feedthrough_flags``  — which inputs reach the output at the same instant

Signals are scalar.  Continuous state is a float vector laid out by the
compiler; discrete blocks keep small register tuples instead (a unit delay
needs two: the value currently presented and the value sampled one period
ago, so that an update at a hit exposes last period's sample).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from types import MappingProxyType
from typing import Mapping, Sequence

import numpy as np

from .params import (
    ParamValue,
    TransferFunction,
    UnsetParamError,
    make_param,
    parse_param_expr,
)

__all__ = [
    "BlockSpec",
    "ParamSchema",
    "StateSpace",
    "UnknownKindError",
    "ImproperTFError",
    "NotSampledError",
    "palette",
    "block_spec",
    "default_params",
    "arity",
    "state_count",
    "register_count",
    "sample_period",
    "feedthrough_flags",
    "tf_to_state_space",
    "block_output",
    "block_derivative",
    "block_discrete_update",
    "initial_continuous_state",
    "initial_registers",
    "on_sample_grid",
]

# relative tolerance used to decide whether t sits on a sample grid
SAMPLE_HIT_RTOL = 1e-9


class UnknownKindError(KeyError):
    def __init__(self, kind: str):
        super().__init__(f"unknown block kind '{kind}'")
        self.kind = kind


class ImproperTFError(ValueError):
    """Transfer function with numerator degree above denominator degree."""


class NotSampledError(ValueError):
    """Discrete update requested off the sample grid, or on a continuous block."""


@dataclass(frozen=True)
class ParamSchema:
    expect: str  # "scalar" | "signs" | "rational"
    default: str  # raw expression text
    unit: str = ""


@dataclass(frozen=True)
class BlockSpec:
    """Static palette metadata for one block kind."""

    kind: str
    label: str
    n_in: int  # -1 means "length of the sign vector"
    n_out: int
    params: Mapping[str, ParamSchema] = field(default_factory=dict)
    sample_time_param: str | None = None  # name of the period parameter, if discrete

    @property
    def is_discrete(self) -> bool:
        return self.sample_time_param is not None


def _spec(kind, label, n_in, n_out, params=(), sample_time_param=None):
    return BlockSpec(
        kind=kind,
        label=label,
        n_in=n_in,
        n_out=n_out,
        params=MappingProxyType(dict(params)),
        sample_time_param=sample_time_param,
    )


_PALETTE: dict[str, BlockSpec] = {
    s.kind: s
    for s in (
        _spec(
            "STEP_FUNCTION",
            "Step input",
            0,
            1,
            [
                ("step_time", ParamSchema("scalar", "1.0", "s")),
                ("initial", ParamSchema("scalar", "0.0")),
                ("final", ParamSchema("scalar", "1.0")),
            ],
        ),
        _spec("CONST_m", "Constant", 0, 1, [("value", ParamSchema("scalar", "1.0"))]),
        _spec("GAINBLK", "Gain", 1, 1, [("gain", ParamSchema("scalar", "1.0"))]),
        _spec("SUMMATION", "Sum", -1, 1, [("signs", ParamSchema("signs", "[+1;-1]"))]),
        _spec(
            "CLR",
            "Transfer function",
            1,
            1,
            [
                ("num", ParamSchema("rational", "1")),
                ("den", ParamSchema("rational", "1+s")),
            ],
        ),
        _spec("INTEGRAL_f", "Integrator", 1, 1, [("x0", ParamSchema("scalar", "0.0"))]),
        _spec(
            "DOLLAR",
            "Unit delay",
            1,
            1,
            [
                ("Ts", ParamSchema("scalar", "1.0", "s")),
                ("x0", ParamSchema("scalar", "0.0")),
            ],
            sample_time_param="Ts",
        ),
        _spec(
            "SAMPHOLD",
            "Zero-order hold",
            1,
            1,
            [("Ts", ParamSchema("scalar", "1.0", "s"))],
            sample_time_param="Ts",
        ),
        _spec("CSCOPE", "Scope", 1, 0),
    )
}


def palette() -> list[BlockSpec]:
    """All block specs in display order."""
    return list(_PALETTE.values())


def block_spec(kind: str) -> BlockSpec:
    try:
        return _PALETTE[kind]
    except KeyError:
        raise UnknownKindError(kind) from None


def is_known_kind(kind: str) -> bool:
    return kind in _PALETTE


def default_params(kind: str) -> dict[str, ParamValue]:
    """Fresh ParamValues parsed from the palette defaults."""
    spec = block_spec(kind)
    return {
        name: parse_param_expr(schema.default, schema.expect)
        for name, schema in spec.params.items()
    }


def _pv(params, name: str, block_id: str | None = None):
    """Fetch a parameter by name, accepting ParamValue or already-parsed values."""
    value = params[name]
    if isinstance(value, ParamValue):
        if value.parsed is None:
            raise UnsetParamError(name, block_id)
        return value.parsed
    return value


def make_params(kind: str, values: Mapping[str, object]) -> dict[str, ParamValue]:
    """Defaults for ``kind`` overridden by ``values`` (text or numbers), strict."""
    spec = block_spec(kind)
    params = default_params(kind)
    for name, value in values.items():
        if name not in spec.params:
            raise ValueError(f"block kind '{kind}' has no parameter '{name}'")
        params[name] = make_param(value, spec.params[name].expect)
    return params


# ---------------------------------------------------------------------------
# state-space realization
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class StateSpace:
    """SISO realization: dx = A x + B u, y = C x + D u."""

    A: np.ndarray  # (n, n)
    B: np.ndarray  # (n, 1)
    C: np.ndarray  # (1, n)
    D: np.ndarray  # (1, 1)

    @property
    def n(self) -> int:
        return self.A.shape[0]

    def transfer_at(self, s: complex) -> complex:
        """Evaluate C (sI - A)^-1 B + D at one frequency sample."""
        n = self.n
        if n == 0:
            return complex(self.D[0, 0])
        resolvent = np.linalg.solve(s * np.eye(n) - self.A, self.B)
        return complex((self.C @ resolvent)[0, 0] + self.D[0, 0])


@lru_cache(maxsize=256)
def tf_to_state_space(tf: TransferFunction) -> StateSpace:
    """Controllable canonical realization of a proper transfer function.

    The denominator is made monic first; the direct term D is the coefficient
    of s^n left in the scaled numerator and C collects the remainder.

    Raises:
        ImproperTFError: if degree(num) > degree(den).
    """
    if not tf.is_proper:
        raise ImproperTFError(
            f"numerator degree {tf.num_degree} exceeds denominator degree {tf.den_degree}"
        )
    lead = tf.den[-1]
    den = np.asarray(tf.den, dtype=float) / lead
    n = len(den) - 1
    num = np.zeros(n + 1)
    num[: len(tf.num)] = np.asarray(tf.num, dtype=float) / lead
    d = num[n]
    c = num[:n] - d * den[:n]
    a = np.zeros((n, n))
    if n > 1:
        a[:-1, 1:] = np.eye(n - 1)
    if n > 0:
        a[-1, :] = -den[:n]
    b = np.zeros((n, 1))
    if n > 0:
        b[-1, 0] = 1.0
    for m in (a, b, c, d):
        if isinstance(m, np.ndarray):
            m.setflags(write=False)
    return StateSpace(A=a, B=b, C=c.reshape(1, n), D=np.array([[d]]))


def _clr_realization(params, block_id=None) -> StateSpace:
    # the compiler freezes the realization under "ss"; fall back to num/den
    if "ss" in params:
        return params["ss"]
    num = _pv(params, "num", block_id)
    den = _pv(params, "den", block_id)
    return tf_to_state_space(num / den)


# ---------------------------------------------------------------------------
# structural queries
# ---------------------------------------------------------------------------

def arity(kind: str, params: Mapping) -> tuple[int, int]:
    """(n_in, n_out) for a block, resolving SUMMATION's sign-vector arity."""
    spec = block_spec(kind)
    n_in = spec.n_in
    if n_in < 0:
        try:
            n_in = len(_pv(params, "signs"))
        except (UnsetParamError, KeyError):
            n_in = 2  # unset sign vector: assume the common two-input sum
    return n_in, spec.n_out


def state_count(kind: str, params: Mapping, block_id: str | None = None) -> int:
    """Continuous states contributed by one block."""
    if kind == "CLR":
        return _clr_realization(params, block_id).n
    if kind == "INTEGRAL_f":
        return 1
    block_spec(kind)
    return 0


def register_count(kind: str) -> int:
    if kind == "DOLLAR":
        return 2
    if kind == "SAMPHOLD":
        return 1
    block_spec(kind)
    return 0


def sample_period(kind: str, params: Mapping, block_id: str | None = None):
    """The block's sample period in seconds, or None for continuous kinds."""
    spec = block_spec(kind)
    if spec.sample_time_param is None:
        return None
    return _pv(params, spec.sample_time_param, block_id)


def feedthrough_flags(kind: str, params: Mapping, block_id: str | None = None) -> tuple[bool, ...]:
    """Per-input direct-feedthrough flags: does y(t) depend on u_i(t)?"""
    n_in, _ = arity(kind, params)
    if kind in ("GAINBLK", "SUMMATION", "CSCOPE"):
        return (True,) * n_in
    if kind in ("INTEGRAL_f", "DOLLAR", "SAMPHOLD"):
        return (False,) * n_in
    if kind == "CLR":
        return (_clr_realization(params, block_id).D[0, 0] != 0.0,)
    block_spec(kind)
    return ()


# ---------------------------------------------------------------------------
# behaviour maps
# ---------------------------------------------------------------------------

def block_output(kind, params, state, inputs, t, block_id=None) -> tuple[float, ...]:
    """Algebraic output map of one block.

    Args:
        kind: palette identifier.
        params: name → ParamValue or already-parsed value.
        state: continuous state slice or register tuple for this block.
        inputs: one float per input port.
        t: current time in seconds.
        block_id: used only to label UnsetParam errors.

    Returns:
        Tuple of output values, one per output port.
    """
    if kind == "STEP_FUNCTION":
        # right-closed boundary: the new level is visible from t = step_time on
        step_time = _pv(params, "step_time", block_id)
        before = _pv(params, "initial", block_id)
        after = _pv(params, "final", block_id)
        return (before if t < step_time else after,)
    if kind == "CONST_m":
        return (_pv(params, "value", block_id),)
    if kind == "GAINBLK":
        return (_pv(params, "gain", block_id) * inputs[0],)
    if kind == "SUMMATION":
        signs = _pv(params, "signs", block_id)
        return (sum(s * u for s, u in zip(signs, inputs, strict=True)),)
    if kind == "CLR":
        ss = _clr_realization(params, block_id)
        y = ss.D[0, 0] * inputs[0]
        if ss.n:
            y += (ss.C @ np.asarray(state, dtype=float)).item()
        return (float(y),)
    if kind == "INTEGRAL_f":
        return (float(state[0]),)
    if kind in ("DOLLAR", "SAMPHOLD"):
        return (float(state[0]),)
    if kind == "CSCOPE":
        return ()
    raise UnknownKindError(kind)


def block_derivative(kind, params, state, inputs, t, block_id=None) -> np.ndarray:
    """Continuous dynamics; only meaningful for kinds with states."""
    if kind == "CLR":
        ss = _clr_realization(params, block_id)
        x = np.asarray(state, dtype=float)
        return ss.A @ x + ss.B[:, 0] * inputs[0]
    if kind == "INTEGRAL_f":
        return np.array([inputs[0]], dtype=float)
    block_spec(kind)
    raise ValueError(f"block kind '{kind}' has no continuous state")


def on_sample_grid(t: float, ts: float) -> bool:
    k = round(t / ts)
    return k >= 0 and abs(t - k * ts) <= SAMPLE_HIT_RTOL * ts


def block_discrete_update(kind, params, state, inputs, t, block_id=None) -> tuple[float, ...]:
    """Register update at a sample hit t = k·Ts.

    DOLLAR shifts its two-register delay line (the previously sampled value
    becomes the presented one); SAMPHOLD latches the input.

    Raises:
        NotSampledError: continuous kind, or t is not on the block's grid.
    """
    ts = sample_period(kind, params, block_id)
    if ts is None:
        raise NotSampledError(f"block kind '{kind}' has no sample time")
    if ts <= 0:
        raise NotSampledError(f"sample period must be positive, got {ts!r}")
    if not on_sample_grid(t, ts):
        raise NotSampledError(f"t={t!r} is not a multiple of Ts={ts!r}")
    if kind == "DOLLAR":
        return (float(state[1]), float(inputs[0]))
    return (float(inputs[0]),)


def initial_continuous_state(kind, params, block_id=None) -> np.ndarray:
    if kind == "INTEGRAL_f":
        return np.array([_pv(params, "x0", block_id)], dtype=float)
    return np.zeros(state_count(kind, params, block_id))


def initial_registers(kind, params, block_id=None) -> tuple[float, ...]:
    if kind == "DOLLAR":
        x0 = float(_pv(params, "x0", block_id))
        return (x0, x0)
    if kind == "SAMPHOLD":
        return (0.0,)
    return ()


def palette_json() -> list[dict]:
    """Palette metadata in the wire shape served at /api/blocks."""
    entries = []
    for spec in palette():
        n_in, n_out = spec.n_in, spec.n_out
        if n_in < 0:
            n_in = 2  # default sign vector [+1;-1]
        entries.append(
            {
                "kind": spec.kind,
                "label": spec.label,
                "n_in": n_in,
                "n_out": n_out,
                "variadic_inputs": spec.n_in < 0,
                "discrete": spec.is_discrete,
                "params": {
                    name: {
                        "expect": schema.expect,
                        "default": schema.default,
                        "unit": schema.unit,
                    }
                    for name, schema in spec.params.items()
                },
            }
        )
    return entries
