"""fxpr: the machine/assembly-level expression evaluator.

Operands come from the current core through reflection: registers (pseudo
always, hidden only when exposed), then image symbols. Label and function
names evaluate to their pmem address; data names evaluate to their ymem
content. `*X` dereferences ymem, `name(i)` indexes, `name(lo:hi)` is an
inclusive slice, `inst::name` switches resolution (slice bounds included) to
another core, and a trailing `@rd|@rh|@rb` picks the output radix. Arithmetic
follows the current core's personality.

Grammar reference: docs/fxpr-grammar.md.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Optional

from .errors import ScriptError
from .fixedpoint import personality_arith, signed

_TOKEN_RE = re.compile(
    r"\s*(?:"
    r"(?P<num>0[xX][0-9a-fA-F]+|0[bB][01]+|[0-9]+)"
    r"|(?P<dir>@r[dhb])"
    r"|(?P<id>[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<op>::|<<|>>|<=|>=|==|!=|&&|\|\||[-+*/%&|^~!<>=():])"
    r")"
)

_PRECEDENCE = {
    "||": 1, "&&": 2, "|": 3, "^": 4, "&": 5,
    "==": 6, "!=": 6, "<": 7, "<=": 7, ">": 7, ">=": 7,
    "<<": 8, ">>": 8, "+": 9, "-": 9, "*": 10, "/": 10, "%": 10,
}


@dataclass
class Scalar:
    value: int
    width: int = 32


@dataclass
class Vector:
    words: list


class EvalContext:
    """Names the current core and how instance qualifiers find other cores."""

    def __init__(self, core, core_lookup=None):
        self.core = core
        self.core_lookup = core_lookup or {}

    def lookup(self, instance: str):
        core = self.core_lookup.get(instance) if not callable(self.core_lookup) \
            else self.core_lookup(instance)
        if core is None:
            raise ScriptError(f"unknown instance {instance!r}")
        return core


def tokenize(text: str) -> list:
    toks = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m or m.end() == pos:
            rest = text[pos:].strip()
            if not rest:
                break
            raise ScriptError(f"fxpr: bad character at {rest[:8]!r}")
        pos = m.end()
        if m.group("num"):
            toks.append(("num", int(m.group("num"), 0)))
        elif m.group("dir"):
            toks.append(("dir", m.group("dir")[2]))
        elif m.group("id"):
            toks.append(("id", m.group("id")))
        else:
            toks.append(("op", m.group("op")))
    return toks


# AST:
#   ("int", v)
#   ("ref", inst|None, name, index_ast|None, (lo_ast, hi_ast)|None)
#   ("deref", ast)
#   ("un", op, ast)
#   ("bin", op, ast, ast)
#   ("assign", target_ast, ast)

class Parser:
    def __init__(self, toks):
        self.toks = toks
        self.pos = 0

    def peek(self):
        return self.toks[self.pos] if self.pos < len(self.toks) else None

    def advance(self):
        t = self.peek()
        if t is None:
            raise ScriptError("fxpr: unexpected end of expression")
        self.pos += 1
        return t

    def parse_expression(self):
        left = self.parse_binary(0)
        t = self.peek()
        if t == ("op", "="):
            self.advance()
            if left[0] not in ("ref", "deref"):
                raise ScriptError("fxpr: target of assignment is not storable")
            right = self.parse_expression()
            return ("assign", left, right)
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
            if t[1] in ("-", "+", "!", "~"):
                self.advance()
                return ("un", t[1], self.parse_unary())
            if t[1] == "*":
                self.advance()
                return ("deref", self.parse_unary())
        return self.parse_primary()

    def parse_primary(self):
        t = self.advance()
        if t[0] == "num":
            return ("int", t[1])
        if t == ("op", "("):
            node = self.parse_binary(0)
            if self.advance() != ("op", ")"):
                raise ScriptError("fxpr: missing close parenthesis")
            return node
        if t[0] == "id":
            inst = None
            name = t[1]
            if self.peek() == ("op", "::"):
                self.advance()
                nxt = self.advance()
                if nxt[0] != "id":
                    raise ScriptError("fxpr: operand name expected after ::")
                inst, name = name, nxt[1]
            index = None
            slc = None
            if self.peek() == ("op", "("):
                self.advance()
                first = self.parse_binary(0)
                if self.peek() == ("op", ":"):
                    self.advance()
                    second = self.parse_binary(0)
                    slc = (first, second)
                else:
                    index = first
                if self.advance() != ("op", ")"):
                    raise ScriptError("fxpr: missing close parenthesis")
            return ("ref", inst, name, index, slc)
        raise ScriptError(f"fxpr: unexpected token {t[1]!r}")


def parse(text: str):
    """Parse fxpr text; returns (ast, radix). Raises ScriptError if not fxpr."""
    toks = tokenize(text)
    if not toks:
        raise ScriptError("fxpr: empty expression")
    radix = "d"
    if toks[-1][0] == "dir":
        radix = toks[-1][1]
        toks = toks[:-1]
    p = Parser(toks)
    ast = p.parse_expression()
    if p.peek() is not None:
        raise ScriptError(f"fxpr: trailing tokens at {p.peek()[1]!r}")
    return ast, radix


class Evaluator:
    def __init__(self, ctx: EvalContext):
        self.ctx = ctx

    # -- operand resolution

    def _core_for(self, inst: Optional[str]):
        if inst is None:
            return self.ctx.core
        return self.ctx.lookup(inst)

    def _resolve(self, core, name: str):
        """Returns ('reg', descriptor) or ('sym', symbol)."""
        d = core.registers.get(name)
        if d is not None and (d.kind != "hidden" or core.hidden_visible):
            return ("reg", d)
        img = core.image
        if img is not None:
            sym = img.symbol(name)
            if sym is not None:
                return ("sym", sym)
        raise ScriptError(f"fxpr: unknown operand {name!r}")

    def _ymem_get(self, core, addr: int) -> int:
        if addr < 0 or addr >= core.ymem.size:
            raise ScriptError(f"fxpr: ymem address {addr} out of range")
        return core.ymem.contents[addr]

    def _ymem_set(self, core, addr: int, value: int) -> int:
        if addr < 0 or addr >= core.ymem.size:
            raise ScriptError(f"fxpr: ymem address {addr} out of range")
        v = value & 0xFFFF
        core.ymem.contents[addr] = v
        return v

    def _slice_range(self, core, sym, slc):
        saved = self.ctx.core
        self.ctx.core = core  # slice bounds evaluate in the qualified instance
        try:
            lo = self._scalar(self.eval(slc[0]))
            hi = self._scalar(self.eval(slc[1]))
        finally:
            self.ctx.core = saved
        if hi < lo:
            raise ScriptError("fxpr: empty slice")
        base = sym.address
        return base + lo, base + hi

    # -- evaluation

    def eval(self, node):
        kind = node[0]
        if kind == "int":
            return Scalar(node[1])
        if kind == "ref":
            return self._eval_ref(node)
        if kind == "deref":
            core, addr = self._deref_addr(node[1])
            return Scalar(self._ymem_get(core, addr), 16)
        if kind == "un":
            v = self._scalar(self.eval(node[2]))
            if node[1] == "-":
                return Scalar(personality_arith("-", 0, v, self.ctx.core.personality))
            if node[1] == "+":
                return Scalar(v)
            if node[1] == "!":
                return Scalar(0 if v else 1, 32)
            return Scalar(~v)
        if kind == "bin":
            a = self._scalar(self.eval(node[2]))
            b = self._scalar(self.eval(node[3]))
            return Scalar(personality_arith(node[1], a, b, self.ctx.core.personality))
        if kind == "assign":
            return self._eval_assign(node[1], node[2])
        raise ScriptError(f"fxpr: bad node {kind!r}")

    def _scalar(self, v) -> int:
        if isinstance(v, Vector):
            raise ScriptError("fxpr: vector used in scalar context")
        return v.value

    def _eval_ref(self, node):
        _, inst, name, index, slc = node
        core = self._core_for(inst)
        what, obj = self._resolve(core, name)
        if what == "reg":
            if index is not None or slc is not None:
                raise ScriptError(f"fxpr: register {name!r} is not indexable")
            return Scalar(core.reg_value(name, raw_ok=True), obj.width)
        sym = obj
        if sym.kind in ("label", "function"):
            if index is not None or slc is not None:
                raise ScriptError(f"fxpr: {name!r} is not indexable")
            return Scalar(sym.address, 20)
        if slc is not None:
            lo, hi = self._slice_range(core, sym, slc)
            if hi >= core.ymem.size:
                raise ScriptError("fxpr: slice out of range")
            return Vector(core.ymem.contents[lo : hi + 1])
        addr = sym.address
        if index is not None:
            addr += self._scalar(self.eval(index))
        return Scalar(self._ymem_get(core, addr), 16)

    def _deref_addr(self, node):
        """Address (and owning core) named by the operand under `*`."""
        if node[0] == "ref" and node[3] is None and node[4] is None:
            core = self._core_for(node[1])
            what, obj = self._resolve(core, node[2])
            if what == "sym":
                return core, obj.address
            return core, core.reg_read(node[2], raw_ok=True)
        return self.ctx.core, self._scalar(self.eval(node))

    def _target(self, node):
        """Resolve an assignment target to (core, kind, location).

        kind 'reg' -> register name; 'mem' -> word address; 'vec' -> (lo, hi).
        """
        if node[0] == "deref":
            core, addr = self._deref_addr(node[1])
            return core, "mem", addr
        _, inst, name, index, slc = node
        core = self._core_for(inst)
        what, obj = self._resolve(core, name)
        if what == "reg":
            if index is not None or slc is not None:
                raise ScriptError(f"fxpr: register {name!r} is not indexable")
            return core, "reg", name
        sym = obj
        if sym.kind in ("label", "function"):
            raise ScriptError(f"fxpr: cannot assign to {sym.kind} {name!r}")
        if slc is not None:
            lo, hi = self._slice_range(core, sym, slc)
            return core, "vec", (lo, hi)
        addr = sym.address
        if index is not None:
            addr += self._scalar(self.eval(index))
        return core, "mem", addr

    def _eval_assign(self, target, value_node):
        value = self.eval(value_node)
        core, kind, loc = self._target(target)
        if isinstance(value, Vector):
            if kind == "vec":
                lo, hi = loc
                if hi - lo + 1 != len(value.words):
                    raise ScriptError("fxpr: slice length mismatch")
            elif kind == "mem":
                # single-index destination receives the whole vector from loc up
                lo, hi = loc, loc + len(value.words) - 1
            else:
                raise ScriptError("fxpr: cannot assign a vector to a register")
            if hi >= core.ymem.size:
                raise ScriptError("fxpr: vector assignment out of range")
            core.ymem.contents[lo : hi + 1] = [w & 0xFFFF for w in value.words]
            return Vector(core.ymem.contents[lo : hi + 1])
        v = value.value
        if kind == "reg":
            core.reg_write(loc, v, raw_ok=True)
            return Scalar(core.reg_value(loc, raw_ok=True), core.registers[loc].width)
        if kind == "vec":
            lo, hi = loc
            if hi != lo:
                raise ScriptError("fxpr: slice length mismatch")
            return Scalar(self._ymem_set(core, lo, v), 16)
        return Scalar(self._ymem_set(core, loc, v), 16)


def render(value, radix: str) -> str:
    if isinstance(value, Vector):
        return " ".join(str(w) for w in value.words)
    v, width = value.value, value.width
    if radix == "d":
        return str(v)
    pattern = v & ((1 << max(width, 1)) - 1) if v < 0 else v
    if radix == "h":
        return f"0x{pattern:X}"
    return f"0b{pattern:b}"


def fxpr_eval(ctx: EvalContext, text: str) -> str:
    """Evaluate fxpr text against the context's current core; returns rendered text."""
    ast, radix = parse(text)
    return render(Evaluator(ctx).eval(ast), radix)


def looks_like_fxpr(text: str) -> bool:
    """Cheap parse check used by the unknown-command hook."""
    try:
        parse(text)
        return True
    except ScriptError:
        return False