"""Exact and binary64 arithmetic over the expression language's value domain.

Three value kinds live in one union:

* ``int``   -- arbitrary-precision integers (Python ints are already exact)
* ``Frac``  -- rational numbers that are NOT silently reduced; reduction is an
               explicit operation so the trace engine can show it as a step
* ``float`` -- IEEE-754 binary64; printed as the shortest decimal string that
               round-trips, expanded to plain positional notation

All values are immutable and all operations are pure functions.
"""

from __future__ import annotations

import math
from typing import Union

from .errors import Dec64RangeError, DivByZero, RenderOverflow, UnsupportedExponent

# Largest magnitude a binary64 value may have and still be printed without
# exponent notation.
RENDER_LIMIT = 1e21


class Frac:
    """An unreduced rational. Denominator is always positive; sign lives in num."""

    __slots__ = ("num", "den")

    def __init__(self, num: int, den: int):
        if den == 0:
            raise DivByZero("fraction with zero denominator")
        if den < 0:
            num, den = -num, -den
        object.__setattr__(self, "num", num)
        object.__setattr__(self, "den", den)

    def __setattr__(self, name, value):
        raise AttributeError("Frac is immutable")

    def __eq__(self, other):
        # Structural equality: 1/2 != 2/4 here; use values_equal for value equality.
        return isinstance(other, Frac) and self.num == other.num and self.den == other.den

    def __hash__(self):
        return hash((self.num, self.den))

    def __repr__(self):
        return f"Frac({self.num}, {self.den})"

    @property
    def is_canonical(self) -> bool:
        return math.gcd(abs(self.num), self.den) == 1


Number = Union[int, Frac, float]


def _as_frac(v: Number) -> Frac | None:
    if isinstance(v, Frac):
        return v
    if isinstance(v, int):
        return Frac(v, 1)
    return None


def _checked(x: float) -> float:
    if math.isinf(x) or math.isnan(x):
        raise Dec64RangeError(f"binary64 result out of range: {x!r}")
    return x


def to_float(v: Number) -> float:
    if isinstance(v, Frac):
        try:
            return v.num / v.den
        except OverflowError:
            return math.inf if v.num > 0 else -math.inf
    try:
        return float(v)
    except OverflowError:
        return math.inf if v > 0 else -math.inf


def add(a: Number, b: Number) -> Number:
    fa, fb = _as_frac(a), _as_frac(b)
    if isinstance(a, Frac) or isinstance(b, Frac):
        if fa is None or fb is None:  # fraction mixed with a decimal
            return _checked(to_float(a) + to_float(b))
        if fa.den == fb.den:  # common denominator: add numerators directly
            return Frac(fa.num + fb.num, fa.den)
        return Frac(fa.num * fb.den + fb.num * fa.den, fa.den * fb.den)
    if isinstance(a, float) or isinstance(b, float):
        return _checked(to_float(a) + to_float(b))
    return a + b


def sub(a: Number, b: Number) -> Number:
    fa, fb = _as_frac(a), _as_frac(b)
    if isinstance(a, Frac) or isinstance(b, Frac):
        if fa is None or fb is None:
            return _checked(to_float(a) - to_float(b))
        if fa.den == fb.den:
            return Frac(fa.num - fb.num, fa.den)
        return Frac(fa.num * fb.den - fb.num * fa.den, fa.den * fb.den)
    if isinstance(a, float) or isinstance(b, float):
        return _checked(to_float(a) - to_float(b))
    return a - b


def mul(a: Number, b: Number) -> Number:
    fa, fb = _as_frac(a), _as_frac(b)
    if isinstance(a, Frac) or isinstance(b, Frac):
        if fa is None or fb is None:
            return _checked(to_float(a) * to_float(b))
        return Frac(fa.num * fb.num, fa.den * fb.den)
    if isinstance(a, float) or isinstance(b, float):
        return _checked(to_float(a) * to_float(b))
    return a * b


def div(a: Number, b: Number) -> Number:
    if isinstance(a, Frac) or isinstance(b, Frac):
        fa, fb = _as_frac(a), _as_frac(b)
        if fa is None or fb is None:
            if to_float(b) == 0.0:
                raise DivByZero()
            return _checked(to_float(a) / to_float(b))
        if fb.num == 0:
            raise DivByZero()
        return Frac(fa.num * fb.den, fa.den * fb.num)
    if isinstance(a, float) or isinstance(b, float):
        if to_float(b) == 0.0:
            raise DivByZero()
        return _checked(to_float(a) / to_float(b))
    if b == 0:
        raise DivByZero()
    # Integer division stays exact when it divides evenly, otherwise binary64.
    if a % b == 0:
        return a // b
    try:
        return _checked(a / b)
    except OverflowError:
        raise Dec64RangeError("integer quotient exceeds binary64 range") from None


def pow_(base: Number, exponent: Number) -> int:
    if not isinstance(base, int) or not isinstance(exponent, int):
        raise UnsupportedExponent("exponentiation takes integer operands only")
    if exponent < 0:
        raise UnsupportedExponent(f"negative exponent {exponent}")
    # 0**0 == 1, consistent with n**0 == 1 for every other base.
    return base ** exponent


def reduce_fraction(f: Frac) -> Frac:
    g = math.gcd(abs(f.num), f.den)
    if g <= 1:
        return f
    return Frac(f.num // g, f.den // g)


def percent_value(payload: Number) -> Number:
    """Value of ``payload%``: exact integer when divisible by 100, else binary64."""
    if isinstance(payload, int):
        if payload % 100 == 0:
            return payload // 100
        return _checked(payload / 100)
    return _checked(to_float(payload) / 100)


def _expand_scientific(s: str) -> str:
    sign = ""
    if s.startswith("-"):
        sign, s = "-", s[1:]
    mant, _, exp = s.partition("e")
    int_part, _, frac_part = mant.partition(".")
    digits = int_part + frac_part
    point = len(int_part) + int(exp)
    if point <= 0:
        return sign + "0." + "0" * (-point) + digits
    if point >= len(digits):
        return sign + digits + "0" * (point - len(digits))
    return sign + digits[:point] + "." + digits[point:]


def render_dec64(x: float) -> str:
    """Shortest round-trip decimal for a binary64, always positional notation."""
    if math.isnan(x) or math.isinf(x):
        raise Dec64RangeError(f"cannot render {x!r}")
    if abs(x) >= RENDER_LIMIT:
        raise RenderOverflow(f"|{x!r}| >= 1e21 cannot be rendered positionally")
    s = repr(x)
    if "e" in s:
        s = _expand_scientific(s)
    return s


def render(v: Number) -> str:
    if isinstance(v, Frac):
        return f"{v.num}/{v.den}"
    if isinstance(v, float):
        return render_dec64(v)
    return str(v)


def parse_dec64(text: str) -> float:
    return float(text)


def values_equal(a: Number, b: Number) -> bool:
    """Exact value equality across kinds (bit-equality for two binary64 values)."""
    if isinstance(a, float) or isinstance(b, float):
        if isinstance(a, float) and isinstance(b, float):
            return a == b and (a != 0.0 or math.copysign(1.0, a) == math.copysign(1.0, b))
        fa, fb = _as_frac(a), _as_frac(b)
        if fa is not None:  # rational vs float: compare exactly via float's rational form
            x = b if isinstance(b, float) else a
            r = fa
        else:
            x, r = a, fb
        num, den = x.as_integer_ratio()
        return num * r.den == r.num * den
    fa, fb = _as_frac(a), _as_frac(b)
    return fa.num * fb.den == fb.num * fa.den


def is_zero(v: Number) -> bool:
    if isinstance(v, Frac):
        return v.num == 0
    return v == 0


def two_decimal_cents(v: Number) -> int:
    """Round v to two decimal places, half away from zero, returned as integer cents.

    The binary64 case rounds the shortest decimal rendering, not the binary
    value, so 2.004999... style artifacts cannot flip a comparison.
    """
    if isinstance(v, int):
        return v * 100
    if isinstance(v, Frac):
        n = 100 * abs(v.num)
        q = (2 * n + v.den) // (2 * v.den)
        return -q if v.num < 0 else q
    from decimal import ROUND_HALF_UP, Decimal

    # repr() is the shortest round-trip rendering; Decimal reads its exponent
    # form directly, so magnitudes past the positional-print limit still round.
    d = Decimal(repr(v)) * 100
    return int(d.quantize(Decimal("1"), rounding=ROUND_HALF_UP))
