"""Block parameter values and the small expression language they are written in.

Parameters are persisted as text, exactly as typed.  The grammar accepted here
is deliberately small:

    expr   := term (('+'|'-') term)*
    term   := unary (('*'|'/') unary)*
    unary  := ('+'|'-')* power
    power  := atom ('^' INT)?
    atom   := NUMBER | 's' | '(' expr ')'

Numbers are decimal literals with optional fraction and exponent.  Constant
subexpressions are folded; the Laplace variable ``s`` is only legal when a
rational function is expected.  Sign vectors use the separate bracket syntax
``[+1;-1;...]``.  The placeholder ``%s`` (or an empty string) marks a value
the user has not filled in yet.
"""

from __future__ import annotations

from dataclasses import dataclass

__all__ = [
    "ParamError",
    "ExprSyntaxError",
    "WrongShapeError",
    "UnsetParamError",
    "TransferFunction",
    "ParamValue",
    "UNSET_PLACEHOLDER",
    "parse_param_expr",
    "make_param",
    "make_param_lenient",
    "format_param",
]

UNSET_PLACEHOLDER = "%s"


class ParamError(ValueError):
    """Base class for parameter parsing/shape problems."""


class ExprSyntaxError(ParamError):
    """Malformed expression text; ``col`` is the 0-based column offset."""

    def __init__(self, message: str, col: int):
        super().__init__(f"{message} (column {col})")
        self.col = col


class WrongShapeError(ParamError):
    """Expression parsed but has the wrong shape for the parameter slot."""


class UnsetParamError(ParamError):
    """A computation needed a parameter that is still the unset placeholder."""

    def __init__(self, name: str, block_id: str | None = None):
        where = f" of block '{block_id}'" if block_id else ""
        super().__init__(f"parameter '{name}'{where} is unset")
        self.name = name
        self.block_id = block_id


# ---------------------------------------------------------------------------
# polynomial helpers (coefficient lists, ascending powers of s)
# ---------------------------------------------------------------------------

def _ptrim(c: list[float]) -> tuple[float, ...]:
    # strip exact trailing zeros; canonical zero polynomial is (0.0,)
    i = len(c)
    while i > 1 and c[i - 1] == 0.0:
        i -= 1
    return tuple(x + 0.0 for x in c[:i])  # +0.0 normalizes -0.0


def _padd(a, b):
    n = max(len(a), len(b))
    return [ (a[i] if i < len(a) else 0.0) + (b[i] if i < len(b) else 0.0) for i in range(n) ]


def _pmul(a, b):
    out = [0.0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x == 0.0:
            continue
        for j, y in enumerate(b):
            out[i + j] += x * y
    return out


def _polyval(c, s):
    acc = 0.0
    for coeff in reversed(c):
        acc = acc * s + coeff
    return acc


@dataclass(frozen=True)
class TransferFunction:
    """Rational function of s as two coefficient tuples, ascending powers.

    ``den`` must not be the zero polynomial.  Properness is not enforced at
    construction; the state-space realization rejects improper functions.
    """

    num: tuple[float, ...]
    den: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "num", _ptrim(list(self.num)))
        object.__setattr__(self, "den", _ptrim(list(self.den)))
        if self.den == (0.0,):
            raise WrongShapeError("transfer function denominator is the zero polynomial")

    @property
    def num_degree(self) -> int:
        return 0 if self.num == (0.0,) else len(self.num) - 1

    @property
    def den_degree(self) -> int:
        return len(self.den) - 1

    @property
    def is_proper(self) -> bool:
        return self.num == (0.0,) or self.num_degree <= self.den_degree

    def __call__(self, s: complex) -> complex:
        return _polyval(self.num, s) / _polyval(self.den, s)

    def __truediv__(self, other: "TransferFunction") -> "TransferFunction":
        if other.num == (0.0,):
            raise WrongShapeError("division by a zero rational function")
        return TransferFunction(_pmul(self.num, other.den), _pmul(self.den, other.num))


@dataclass(frozen=True)
class ParamValue:
    """A parameter as persisted (raw text) plus its parse outcome.

    Exactly one of three situations holds: the value parsed (``parsed`` set),
    the raw text is the unset placeholder (both fields None), or the text is
    broken (``error`` set; only reachable through lenient import paths).
    """

    raw: str
    parsed: object | None = None
    error: str | None = None

    @property
    def is_unset(self) -> bool:
        return self.parsed is None and self.error is None


# ---------------------------------------------------------------------------
# tokenizer / recursive-descent parser
# ---------------------------------------------------------------------------

class _Tok:
    __slots__ = ("kind", "text", "pos")

    def __init__(self, kind, text, pos):
        self.kind = kind
        self.text = text
        self.pos = pos


def _tokenize(text: str) -> list[_Tok]:
    toks = []
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch.isspace():
            i += 1
            continue
        if ch in "+-*/^()":
            toks.append(_Tok(ch, ch, i))
            i += 1
            continue
        if ch == "s" and (i + 1 == n or not (text[i + 1].isalnum() or text[i + 1] == "_")):
            toks.append(_Tok("var", "s", i))
            i += 1
            continue
        if ch.isdigit() or ch == ".":
            j = i
            while j < n and text[j].isdigit():
                j += 1
            if j < n and text[j] == ".":
                j += 1
                while j < n and text[j].isdigit():
                    j += 1
            if j < n and text[j] in "eE":
                k = j + 1
                if k < n and text[k] in "+-":
                    k += 1
                if k < n and text[k].isdigit():
                    j = k
                    while j < n and text[j].isdigit():
                        j += 1
            lit = text[i:j]
            try:
                val = float(lit)
            except ValueError:
                raise ExprSyntaxError(f"bad number literal '{lit}'", i) from None
            toks.append(_Tok("num", val, i))
            i = j
            continue
        raise ExprSyntaxError(f"unexpected character '{ch}'", i)
    toks.append(_Tok("end", "", n))
    return toks


class _Parser:
    """Evaluates the expression directly over rational functions of s."""

    def __init__(self, toks: list[_Tok], allow_s: bool):
        self.toks = toks
        self.i = 0
        self.allow_s = allow_s

    def peek(self):
        return self.toks[self.i]

    def take(self):
        t = self.toks[self.i]
        self.i += 1
        return t

    def expr(self) -> TransferFunction:
        v = self.term()
        while self.peek().kind in "+-":
            op = self.take().kind
            rhs = self.term()
            num_l = _pmul(v.num, rhs.den)
            num_r = _pmul(rhs.num, v.den)
            if op == "-":
                num_r = [-x for x in num_r]
            v = TransferFunction(_padd(num_l, num_r), _pmul(v.den, rhs.den))
        return v

    def term(self) -> TransferFunction:
        v = self.unary()
        while self.peek().kind in "*/":
            op = self.take()
            rhs = self.unary()
            if op.kind == "*":
                v = TransferFunction(_pmul(v.num, rhs.num), _pmul(v.den, rhs.den))
            else:
                if rhs.num == (0.0,):
                    raise ExprSyntaxError("division by zero", op.pos)
                v = v / rhs
        return v

    def unary(self) -> TransferFunction:
        neg = False
        while self.peek().kind in "+-":
            if self.take().kind == "-":
                neg = not neg
        v = self.power()
        if neg:
            v = TransferFunction(tuple(-x for x in v.num), v.den)
        return v

    def power(self) -> TransferFunction:
        v = self.atom()
        if self.peek().kind == "^":
            op = self.take()
            t = self.take()
            if t.kind != "num" or t.text != int(t.text) or t.text < 0:
                raise ExprSyntaxError("exponent must be a non-negative integer", t.pos)
            k = int(t.text)
            num, den = (1.0,), (1.0,)
            for _ in range(k):
                num, den = _pmul(num, v.num), _pmul(den, v.den)
            v = TransferFunction(num, den)
        return v

    def atom(self) -> TransferFunction:
        t = self.take()
        if t.kind == "num":
            return TransferFunction((t.text,), (1.0,))
        if t.kind == "var":
            if not self.allow_s:
                raise WrongShapeError(
                    f"variable 's' not allowed in a scalar parameter (column {t.pos})"
                )
            return TransferFunction((0.0, 1.0), (1.0,))
        if t.kind == "(":
            v = self.expr()
            closing = self.take()
            if closing.kind != ")":
                raise ExprSyntaxError("expected ')'", closing.pos)
            return v
        raise ExprSyntaxError(f"unexpected token '{t.text or 'end of input'}'", t.pos)


def _parse_signs(text: str) -> tuple[int, ...]:
    stripped = text.strip()
    if not (stripped.startswith("[") and stripped.endswith("]")):
        raise ExprSyntaxError("sign vector must look like [+1;-1]", 0)
    body = stripped[1:-1]
    signs = []
    for part in body.split(";"):
        entry = part.strip()
        if entry in ("+1", "1"):
            signs.append(1)
        elif entry == "-1":
            signs.append(-1)
        else:
            raise WrongShapeError(f"sign vector entries must be +1 or -1, got '{entry}'")
    if not signs:
        raise WrongShapeError("sign vector must not be empty")
    return tuple(signs)


def parse_param_expr(raw: str, expect: str) -> ParamValue:
    """Parse parameter text against an expected shape.

    ``expect`` is one of ``"scalar"``, ``"signs"``, ``"rational"``.  The unset
    placeholder ``%s`` (or an empty string) yields an unset ParamValue; any
    other text either parses or raises ExprSyntaxError / WrongShapeError.
    """
    if raw.strip() in (UNSET_PLACEHOLDER, ""):
        return ParamValue(raw=raw)
    if expect == "signs":
        return ParamValue(raw=raw, parsed=_parse_signs(raw))
    if expect not in ("scalar", "rational"):
        raise ValueError(f"unknown expected shape '{expect}'")
    parser = _Parser(_tokenize(raw), allow_s=(expect == "rational"))
    value = parser.expr()
    trailing = parser.peek()
    if trailing.kind != "end":
        raise ExprSyntaxError(f"unexpected trailing input '{trailing.text}'", trailing.pos)
    if expect == "scalar":
        if value.den_degree != 0 or value.num_degree != 0:
            raise WrongShapeError("expected a scalar, got a function of s")
        return ParamValue(raw=raw, parsed=value.num[0] / value.den[0])
    return ParamValue(raw=raw, parsed=value)


def make_param(raw, expect: str) -> ParamValue:
    """Strict constructor: accepts text or a number, raises on bad text."""
    if isinstance(raw, ParamValue):
        return raw
    if isinstance(raw, (int, float)) and not isinstance(raw, bool):
        raw = repr(float(raw))
    if not isinstance(raw, str):
        raise TypeError(f"parameter value must be text or a number, not {type(raw).__name__}")
    return parse_param_expr(raw, expect)


def make_param_lenient(raw: str, expect: str) -> ParamValue:
    """Import-path constructor: broken text is retained with its error."""
    try:
        return parse_param_expr(raw, expect)
    except ParamError as e:
        return ParamValue(raw=raw, parsed=None, error=str(e))


# ---------------------------------------------------------------------------
# formatting (inverse of parse_param_expr on parsed values)
# ---------------------------------------------------------------------------

def _format_poly(coeffs: tuple[float, ...]) -> str:
    if all(c == 0.0 for c in coeffs):
        return "0"
    parts = []
    for k, c in enumerate(coeffs):
        if c == 0.0:
            continue
        mag = repr(abs(c))
        if k == 0:
            term = mag
        elif k == 1:
            term = f"{mag}*s"
        else:
            term = f"{mag}*s^{k}"
        parts.append(("-" if c < 0 else "+", term))
    sign0, term0 = parts[0]
    out = ("-" if sign0 == "-" else "") + term0
    for sign, term in parts[1:]:
        out += sign + term
    return out


def format_param(value) -> str:
    """Render a parsed value as text the grammar reads back identically."""
    if value is None:
        return UNSET_PLACEHOLDER
    if isinstance(value, TransferFunction):
        return f"({_format_poly(value.num)})/({_format_poly(value.den)})"
    if isinstance(value, tuple):
        return "[" + ";".join("+1" if s > 0 else "-1" for s in value) + "]"
    return repr(float(value))
