"""Arithmetic personalities: integer wraparound and Q15 saturating fixed point.

Integer targets compute in two's complement promoted to 32 bits. Fractional
targets treat 16-bit operands as Q15, multiply with truncation toward zero
and saturate; add/sub saturate at the 32-bit accumulator bounds. Bitwise,
shift, comparison, division and modulo behave identically under both
personalities (division truncates toward zero, C style).
"""

from .errors import ScriptError

INT32_MIN = -(1 << 31)
INT32_MAX = (1 << 31) - 1
Q15_MIN = -(1 << 15)
Q15_MAX = (1 << 15) - 1

INTEGER = "integer"
FRACTIONAL = "fractional"


def wrap32(v: int) -> int:
    v &= 0xFFFFFFFF
    return v - (1 << 32) if v & 0x80000000 else v


def signed(v: int, width: int) -> int:
    """Interpret the low `width` bits of v as two's complement."""
    v &= (1 << width) - 1
    return v - (1 << width) if v & (1 << (width - 1)) else v


def sat32(v: int) -> int:
    return INT32_MIN if v < INT32_MIN else INT32_MAX if v > INT32_MAX else v


def q15_mul(a: int, b: int) -> int:
    """Saturating Q15 multiply; operands taken from their low 16 bits."""
    a = signed(a, 16)
    b = signed(b, 16)
    p = a * b
    # truncate toward zero before the 2^-15 rescale clamp
    q = p // 32768 if p >= 0 else -((-p) // 32768)
    return Q15_MIN if q < Q15_MIN else Q15_MAX if q > Q15_MAX else q


def _div_trunc(a: int, b: int) -> int:
    if b == 0:
        raise ScriptError("division by zero")
    q = abs(a) // abs(b)
    return q if (a < 0) == (b < 0) else -q


def _mod_trunc(a: int, b: int) -> int:
    return a - _div_trunc(a, b) * b


def personality_arith(op: str, a: int, b: int, personality: str) -> int:
    """Apply one binary operator under the given arithmetic personality.

    Operands and result are plain ints (already sign-interpreted by the
    caller); the result is the architectural value, not a masked pattern.
    """
    if op == "*":
        if personality == FRACTIONAL:
            return q15_mul(a, b)
        return wrap32(a * b)
    if op == "+":
        if personality == FRACTIONAL:
            return sat32(a + b)
        return wrap32(a + b)
    if op == "-":
        if personality == FRACTIONAL:
            return sat32(a - b)
        return wrap32(a - b)
    if op == "/":
        return wrap32(_div_trunc(a, b))
    if op == "%":
        return wrap32(_mod_trunc(a, b))
    if op == "&":
        return wrap32(a & b)
    if op == "|":
        return wrap32(a | b)
    if op == "^":
        return wrap32(a ^ b)
    if op == "<<":
        if b < 0 or b > 63:
            raise ScriptError("shift count out of range")
        return wrap32(a << b)
    if op == ">>":
        if b < 0 or b > 63:
            raise ScriptError("shift count out of range")
        return a >> b
    if op == "==":
        return 1 if a == b else 0
    if op == "!=":
        return 1 if a != b else 0
    if op == "<":
        return 1 if a < b else 0
    if op == "<=":
        return 1 if a <= b else 0
    if op == ">":
        return 1 if a > b else 0
    if op == ">=":
        return 1 if a >= b else 0
    if op == "&&":
        return 1 if (a != 0 and b != 0) else 0
    if op == "||":
        return 1 if (a != 0 or b != 0) else 0
    raise ScriptError(f"unknown operator {op!r}")
