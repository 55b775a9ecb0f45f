"""Instruction table for the lx16 toy target.

Operand kind letters: r = core/port register, i = immediate, m = data-memory
locator (absolute address or (rX) indirect), a = program address, p = port
register. All instructions cost one cycle except MUL (two).
"""

from dataclasses import dataclass

from .errors import ImageError


@dataclass(frozen=True)
class Instruction:
    mnemonic: str
    operands: tuple
    cost: int


# mnemonic -> (operand signature, cycle cost)
INSTRUCTION_TABLE = {
    "LDI": ("ri", 1),
    "LD": ("rm", 1),
    "ST": ("mr", 1),
    "MOV": ("rr", 1),
    "ADD": ("rr", 1),
    "SUB": ("rr", 1),
    "AND": ("rr", 1),
    "OR": ("rr", 1),
    "XOR": ("rr", 1),
    "MUL": ("rr", 2),
    "CMP": ("rr", 1),
    "BEQ": ("a", 1),
    "BNE": ("a", 1),
    "BLT": ("rra", 1),
    "JMP": ("a", 1),
    "CALL": ("a", 1),
    "RET": ("", 1),
    "PUSH": ("r", 1),
    "POP": ("r", 1),
    "TAS": ("m", 1),
    "IN": ("rp", 1),
    "OUT": ("pr", 1),
    "ICALL": ("i", 1),
    "HALT": ("", 1),
    "NOP": ("", 1),
}

# operand representations after decode:
#   ("reg", name) | ("imm", value) | ("addr", value) | ("ind", regname)


def decode(mnemonic: str, raw_args: list, resolve_symbol, register_kind) -> Instruction:
    """Build an Instruction from loader-level args.

    `resolve_symbol(name) -> address` maps symbol operands; `register_kind(name)`
    returns the register kind or None so operand classes can be checked here
    rather than at execution time.
    """
    mnemonic = mnemonic.upper()
    entry = INSTRUCTION_TABLE.get(mnemonic)
    if entry is None:
        raise ImageError(f"unknown mnemonic {mnemonic!r}")
    sig, cost = entry
    if len(raw_args) != len(sig):
        raise ImageError(
            f"{mnemonic} expects {len(sig)} operand(s), got {len(raw_args)}"
        )
    ops = []
    for kind, raw in zip(sig, raw_args):
        ops.append(_decode_operand(mnemonic, kind, raw, resolve_symbol, register_kind))
    return Instruction(mnemonic, tuple(ops), cost)


def _decode_operand(mnemonic, kind, raw, resolve_symbol, register_kind):
    if kind == "r" or kind == "p":
        if not isinstance(raw, str):
            raise ImageError(f"{mnemonic}: register operand expected, got {raw!r}")
        rk = register_kind(raw)
        if rk is None:
            raise ImageError(f"{mnemonic}: unknown register {raw!r}")
        if kind == "p" and rk != "port":
            raise ImageError(f"{mnemonic}: {raw!r} is not a port register")
        if kind == "r" and rk not in ("core", "port"):
            raise ImageError(f"{mnemonic}: {raw!r} is not an instruction-visible register")
        return ("reg", raw)
    if kind == "i":
        v = _int_value(raw)
        if v is None:
            if not isinstance(raw, str):
                raise ImageError(f"{mnemonic}: immediate expected, got {raw!r}")
            v = resolve_symbol(raw)  # symbol immediates carry the symbol's address
        return ("imm", v)
    if kind in ("m", "a"):
        if isinstance(raw, str) and raw.startswith("(") and raw.endswith(")"):
            if kind == "a":
                raise ImageError(f"{mnemonic}: indirect program address not supported")
            rname = raw[1:-1]
            if register_kind(rname) not in ("core", "port"):
                raise ImageError(f"{mnemonic}: bad indirect register {raw!r}")
            return ("ind", rname)
        v = _int_value(raw)
        if v is None:
            if not isinstance(raw, str):
                raise ImageError(f"{mnemonic}: bad operand {raw!r}")
            v = resolve_symbol(raw)
        return ("addr", v)
    raise ImageError(f"bad signature letter {kind!r}")


def _int_value(raw):
    if isinstance(raw, bool):
        return None
    if isinstance(raw, int):
        return raw
    if isinstance(raw, str):
        s = raw.strip()
        try:
            return int(s, 0)
        except ValueError:
            return None
    return None
