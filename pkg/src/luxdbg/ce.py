"""ce: the procedural-layer expression evaluator.

Evaluates a C expression subset against a loaded image's debug symbols:
globals and in-scope locals, integer literals, NULL, pointer dereference,
array indexing, the usual arithmetic/comparison/logical operators and
assignment. Identifiers map to ymem storage; int32 values occupy two words,
low word first. Results render as %d (default), %x, or %s (NUL-terminated
word-per-character string at the value's address).
"""

from __future__ import annotations

import re

from . import image as image_mod
from .errors import ImageError, ScriptError

_TOKEN_RE = re.compile(
    r"\s*(?:"
    r"(?P<num>0[xX][0-9a-fA-F]+|[0-9]+)"
    r"|(?P<id>[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<op><=|>=|==|!=|&&|\|\||[-+*/%!<>=()\[\]])"
    r")"
)

_PRECEDENCE = {
    "||": 1, "&&": 2, "==": 3, "!=": 3,
    "<": 4, "<=": 4, ">": 4, ">=": 4,
    "+": 5, "-": 5, "*": 6, "/": 6, "%": 6,
}


def _tokenize(text: str):
    toks = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m or m.end() == pos:
            rest = text[pos:].strip()
            if not rest:
                break
            raise ScriptError(f"ce: bad character at {rest[:8]!r}")
        pos = m.end()
        if m.group("num"):
            toks.append(("num", int(m.group("num"), 0)))
        elif m.group("id"):
            toks.append(("id", m.group("id")))
        else:
            toks.append(("op", m.group("op")))
    return toks


class _Lvalue:
    """A typed storage location: ymem address plus the symbol type it holds."""

    def __init__(self, core, addr: int, type_tag: str):
        self.core = core
        self.addr = addr
        self.type_tag = type_tag

    def _word(self, addr):
        if addr < 0 or addr >= self.core.ymem.size:
            raise ScriptError(f"ce: ymem address {addr} out of range")
        return self.core.ymem.contents[addr]

    def load(self) -> int:
        if self.type_tag == "int32":
            lo = self._word(self.addr)
            hi = self._word(self.addr + 1)
            v = (hi << 16) | lo
            return v - (1 << 32) if v & 0x80000000 else v
        v = self._word(self.addr)
        if self.type_tag == "ptr":
            return v
        return v - (1 << 16) if v & 0x8000 else v

    def store(self, value: int) -> int:
        if self.addr < 0 or self.addr >= self.core.ymem.size:
            raise ScriptError(f"ce: ymem address {self.addr} out of range")
        if self.type_tag == "int32":
            self.core.ymem.contents[self.addr] = value & 0xFFFF
            if self.addr + 1 >= self.core.ymem.size:
                raise ScriptError("ce: ymem address out of range")
            self.core.ymem.contents[self.addr + 1] = (value >> 16) & 0xFFFF
        else:
            self.core.ymem.contents[self.addr] = value & 0xFFFF
        return self.load()


class _Parser:
    def __init__(self, toks):
        self.toks = toks
        self.pos = 0

    def peek(self):
        return self.toks[self.pos] if self.pos < len(self.toks) else None

    def advance(self):
        t = self.peek()
        if t is None:
            raise ScriptError("ce: unexpected end of expression")
        self.pos += 1
        return t

    def parse_expression(self):
        left = self.parse_binary(0)
        if self.peek() == ("op", "="):
            self.advance()
            if left[0] not in ("id", "index", "deref"):
                raise ScriptError("ce: target of assignment is not an lvalue")
            return ("assign", left, self.parse_expression())
        return left

    def parse_binary(self, min_prec):
        left = self.parse_unary()
        while True:
            t = self.peek()
            if t is None or t[0] != "op" or t[1] not in _PRECEDENCE:
                return left
            prec = _PRECEDENCE[t[1]]
            if prec < min_prec:
                return left
            self.advance()
            left = ("bin", t[1], left, self.parse_binary(prec + 1))

    def parse_unary(self):
        t = self.peek()
        if t is not None and t[0] == "op":
            if t[1] in ("-", "!"):
                self.advance()
                return ("un", t[1], self.parse_unary())
            if t[1] == "*":
                self.advance()
                return ("deref", self.parse_unary())
        return self.parse_postfix()

    def parse_postfix(self):
        node = self.parse_primary()
        while self.peek() == ("op", "["):
            self.advance()
            idx = self.parse_binary(0)
            if self.advance() != ("op", "]"):
                raise ScriptError("ce: missing close bracket")
            node = ("index", node, idx)
        return node

    def parse_primary(self):
        t = self.advance()
        if t[0] == "num":
            return ("int", t[1])
        if t == ("op", "("):
            node = self.parse_binary(0)
            if self.advance() != ("op", ")"):
                raise ScriptError("ce: missing close parenthesis")
            return node
        if t[0] == "id":
            if t[1] == "NULL":
                return ("int", 0)
            return ("id", t[1])
        raise ScriptError(f"ce: unexpected token {t[1]!r}")


class Evaluator:
    def __init__(self, core):
        self.core = core
        if core.image is None:
            raise ScriptError("ce: no image loaded")

    def _symbol_lvalue(self, name: str) -> _Lvalue:
        try:
            sym = image_mod.resolve(self.core, name)
        except ImageError as e:
            raise ScriptError(f"ce: {e}")
        if sym.kind == "local_var":
            addr = image_mod.local_address(self.core, sym)
        elif sym.kind == "global_var":
            addr = sym.address
        else:
            raise ScriptError(f"ce: {name!r} is not a C variable")
        return _Lvalue(self.core, addr, sym.type_tag)

    def _lvalue(self, node) -> _Lvalue:
        if node[0] == "id":
            lv = self._symbol_lvalue(node[1])
            if lv.type_tag == "array":
                raise ScriptError(f"ce: cannot assign to array {node[1]!r}")
            return lv
        if node[0] == "index":
            if node[1][0] != "id":
                raise ScriptError("ce: can only index a named array")
            lv = self._symbol_lvalue(node[1][1])
            if lv.type_tag != "array":
                raise ScriptError(f"ce: {node[1][1]!r} is not an array")
            idx = self.eval(node[2])
            return _Lvalue(self.core, lv.addr + idx, "int16")
        if node[0] == "deref":
            ptr = self.eval(node[1])
            return _Lvalue(self.core, ptr, "int16")
        raise ScriptError("ce: not an lvalue")

    def eval(self, node) -> int:
        kind = node[0]
        if kind == "int":
            return node[1]
        if kind == "id":
            lv = self._symbol_lvalue(node[1])
            if lv.type_tag == "array":
                return lv.addr  # arrays decay to their address
            return lv.load()
        if kind == "index":
            return self._lvalue(node).load()
        if kind == "deref":
            return self._lvalue(node).load()
        if kind == "un":
            v = self.eval(node[2])
            return -v if node[1] == "-" else (0 if v else 1)
        if kind == "bin":
            op = node[1]
            if op == "&&":
                return 1 if (self.eval(node[2]) != 0 and self.eval(node[3]) != 0) else 0
            if op == "||":
                return 1 if (self.eval(node[2]) != 0 or self.eval(node[3]) != 0) else 0
            a = self.eval(node[2])
            b = self.eval(node[3])
            if op == "+":
                return a + b
            if op == "-":
                return a - b
            if op == "*":
                return a * b
            if op in ("/", "%"):
                if b == 0:
                    raise ScriptError("ce: division by zero")
                q = abs(a) // abs(b)
                q = q if (a < 0) == (b < 0) else -q
                return q if op == "/" else a - q * b
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
            return 1 if a >= b else 0
        if kind == "assign":
            return self._lvalue(node[1]).store(self.eval(node[2]))
        raise ScriptError(f"ce: bad node {kind!r}")


def read_string(core, addr: int) -> str:
    """NUL-terminated word-per-character string starting at ymem[addr]."""
    out = []
    while True:
        if addr >= core.ymem.size:
            raise ScriptError("unterminated string in ymem")
        w = core.ymem.contents[addr]
        if w == 0:
            return "".join(out)
        out.append(chr(w & 0xFF) if w < 0x110000 else "?")
        addr += 1


def ce_eval(core, text: str, fmt: str = "%d") -> str:
    """Evaluate a C-subset expression on a core's loaded image; render per fmt."""
    toks = _tokenize(text)
    if not toks:
        raise ScriptError("ce: empty expression")
    parser = _Parser(toks)
    ast = parser.parse_expression()
    if parser.peek() is not None:
        raise ScriptError(f"ce: trailing tokens at {parser.peek()[1]!r}")
    value = Evaluator(core).eval(ast)
    if fmt == "%d":
        return str(value)
    if fmt == "%x":
        return format(value & 0xFFFFFFFF, "x")
    if fmt == "%s":
        return read_string(core, value)
    raise ScriptError(f"ce: bad format {fmt!r}")