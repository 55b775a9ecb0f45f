"""Loadable program images: the build-time/run-time bridge.

Images are JSON documents carrying decoded instructions for pmem, data-word
initialisers for ymem, a symbol table, function records and an address/line
map. The schema ships at docs/image.schema.json; the loader re-checks every
constraint itself so errors point at the offending record.
"""

from __future__ import annotations

import json
from bisect import bisect_right
from dataclasses import dataclass, field

from . import isa
from .errors import ImageError

SYMBOL_KINDS = ("label", "data", "function", "global_var", "local_var")
_PMEM_KINDS = ("label", "function")


@dataclass(frozen=True)
class Symbol:
    name: str
    kind: str
    space: str
    address: int  # for local_var: signed offset from sp
    type_tag: str = "int16"
    array_length: int = 0


@dataclass(frozen=True)
class FunctionInfo:
    name: str
    entry: int
    exits: tuple
    file: str
    line_range: tuple
    locals: tuple = ()


@dataclass
class ProgramImage:
    name: str
    pmem_records: list = field(default_factory=list)  # [(addr, Instruction)]
    ymem_init: list = field(default_factory=list)  # [(addr, word)]
    symbols: list = field(default_factory=list)
    functions: list = field(default_factory=list)
    line_map: list = field(default_factory=list)  # [(addr, file, line)] sorted

    def symbol(self, name: str):
        return self._symtab.get(name)

    def function(self, name: str):
        return self._funtab.get(name)

    def finish(self):
        self._symtab = {s.name: s for s in self.symbols}
        self._funtab = {f.name: f for f in self.functions}
        self.line_map.sort(key=lambda e: e[0])
        self._line_addrs = [e[0] for e in self.line_map]
        return self

    def addr_to_line(self, addr: int):
        """Nearest line-map entry at or below addr, or None."""
        i = bisect_right(self._line_addrs, addr)
        if i == 0:
            return None
        _, f, l = self.line_map[i - 1]
        return (f, l)

    def line_to_addr(self, file: str, line: int):
        for addr, f, l in self.line_map:
            if f == file and l == line:
                return addr
        return None


def _expect(cond, msg):
    if not cond:
        raise ImageError(msg)


def _addr_of(obj, key, limit, ctx):
    v = obj.get(key)
    _expect(isinstance(v, int) and not isinstance(v, bool), f"{ctx}: bad {key!r}")
    _expect(0 <= v < limit, f"{ctx}: {key} {v} out of range")
    return v


def parse_image(text: str, register_kind) -> ProgramImage:
    """Parse and validate an image document. register_kind(name) -> kind|None."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise ImageError(f"image parse error at line {e.lineno} column {e.colno}: {e.msg}")
    _expect(isinstance(doc, dict), "image must be a JSON object")
    name = doc.get("name", "")
    _expect(isinstance(name, str) and name, "image needs a non-empty name")

    img = ProgramImage(name)

    symbols_doc = doc.get("symbols", [])
    _expect(isinstance(symbols_doc, list), "symbols must be a list")
    seen = set()
    for j, s in enumerate(symbols_doc):
        ctx = f"symbols[{j}]"
        _expect(isinstance(s, dict), f"{ctx}: must be an object")
        sname = s.get("name")
        _expect(isinstance(sname, str) and sname, f"{ctx}: bad name")
        _expect(sname not in seen, f"{ctx}: duplicate symbol {sname!r}")
        seen.add(sname)
        kind = s.get("kind")
        _expect(kind in SYMBOL_KINDS, f"{ctx}: bad kind {kind!r}")
        space = "pmem" if kind in _PMEM_KINDS else "ymem"
        declared = s.get("space", space)
        _expect(declared == space, f"{ctx}: kind {kind} belongs in {space}")
        addr = s.get("address")
        _expect(isinstance(addr, int) and not isinstance(addr, bool), f"{ctx}: bad address")
        if kind != "local_var":
            limit = 65536
            _expect(0 <= addr < limit, f"{ctx}: address {addr} out of range")
        ttag = s.get("type", "int16")
        length = 0
        if isinstance(ttag, dict):
            _expect(ttag.get("type") == "array" or "length" in ttag, f"{ctx}: bad type")
            length = ttag.get("length", 0)
            _expect(isinstance(length, int) and length >= 1, f"{ctx}: bad array length")
            ttag = "array"
        _expect(ttag in ("int16", "int32", "ptr", "array"), f"{ctx}: bad type {ttag!r}")
        if ttag == "array" and length < 1:
            raise ImageError(f"{ctx}: array needs a length")
        img.symbols.append(Symbol(sname, kind, space, addr, ttag, length))
    img._symtab_tmp = {s.name: s for s in img.symbols}

    def resolve(symname):
        sym = img._symtab_tmp.get(symname)
        if sym is None:
            raise ImageError(f"unresolved symbol operand {symname!r}")
        return sym.address

    pmem_doc = doc.get("pmem", [])
    _expect(isinstance(pmem_doc, list), "pmem must be a list")
    used = set()
    for j, rec in enumerate(pmem_doc):
        ctx = f"pmem[{j}]"
        _expect(isinstance(rec, dict), f"{ctx}: must be an object")
        addr = _addr_of(rec, "addr", 65536, ctx)
        _expect(addr not in used, f"{ctx}: duplicate pmem address {addr}")
        used.add(addr)
        op = rec.get("op")
        _expect(isinstance(op, str), f"{ctx}: bad op")
        args = rec.get("args", [])
        _expect(isinstance(args, list), f"{ctx}: args must be a list")
        try:
            instr = isa.decode(op, args, resolve, register_kind)
        except ImageError as e:
            raise ImageError(f"{ctx}: {e}")
        img.pmem_records.append((addr, instr))

    ymem_doc = doc.get("ymem", [])
    _expect(isinstance(ymem_doc, list), "ymem must be a list")
    for j, rec in enumerate(ymem_doc):
        ctx = f"ymem[{j}]"
        _expect(isinstance(rec, dict), f"{ctx}: must be an object")
        addr = _addr_of(rec, "addr", 65536, ctx)
        if "string" in rec:
            s = rec["string"]
            _expect(isinstance(s, str), f"{ctx}: bad string")
            words = [ord(ch) for ch in s] + [0]
            _expect(addr + len(words) <= 65536, f"{ctx}: string overruns ymem")
            for k, w in enumerate(words):
                img.ymem_init.append((addr + k, w & 0xFFFF))
        else:
            v = rec.get("value")
            _expect(isinstance(v, int) and not isinstance(v, bool), f"{ctx}: bad value")
            img.ymem_init.append((addr, v & 0xFFFF))

    fun_doc = doc.get("functions", [])
    _expect(isinstance(fun_doc, list), "functions must be a list")
    for j, f in enumerate(fun_doc):
        ctx = f"functions[{j}]"
        _expect(isinstance(f, dict), f"{ctx}: must be an object")
        fname = f.get("name")
        _expect(isinstance(fname, str) and fname, f"{ctx}: bad name")
        entry = _addr_of(f, "entry", 65536, ctx)
        exits = f.get("exits", [])
        _expect(isinstance(exits, list) and all(isinstance(x, int) for x in exits),
                f"{ctx}: bad exits")
        lr = f.get("line_range", [0, 0])
        _expect(isinstance(lr, list) and len(lr) == 2, f"{ctx}: bad line_range")
        locals_ = f.get("locals", [])
        _expect(isinstance(locals_, list), f"{ctx}: bad locals")
        for ln in locals_:
            sym = img._symtab_tmp.get(ln)
            _expect(sym is not None and sym.kind == "local_var",
                    f"{ctx}: local {ln!r} is not a local_var symbol")
        img.functions.append(FunctionInfo(fname, entry, tuple(exits),
                                          f.get("file", ""), tuple(lr), tuple(locals_)))

    lines_doc = doc.get("lines", [])
    _expect(isinstance(lines_doc, list), "lines must be a list")
    for j, ent in enumerate(lines_doc):
        ctx = f"lines[{j}]"
        _expect(isinstance(ent, list) and len(ent) == 3, f"{ctx}: must be [addr, file, line]")
        addr, file, line = ent
        _expect(isinstance(addr, int) and 0 <= addr < 65536, f"{ctx}: bad addr")
        _expect(isinstance(file, str) and isinstance(line, int), f"{ctx}: bad file/line")
        img.line_map.append((addr, file, line))

    del img._symtab_tmp
    return img.finish()


def load_image(core, path: str) -> ProgramImage:
    """Load an image file onto a core: fill memory, attach symbols, point pc at start."""
    try:
        with open(path, "r", encoding="utf-8") as f:
            text = f.read()
    except OSError as e:
        raise ImageError(f"cannot read image {path!r}: {e.strerror}")
    img = parse_image(text, lambda n: core.registers[n].kind if n in core.registers else None)
    for addr, instr in img.pmem_records:
        if addr >= core.pmem.size:
            raise ImageError(f"pmem address {addr} exceeds core pmem size")
        core.pmem.contents[addr] = instr
    for addr, word in img.ymem_init:
        if addr >= core.ymem.size:
            raise ImageError(f"ymem address {addr} exceeds core ymem size")
        core.ymem.contents[addr] = word
    core.image = img
    start = img.symbol("start")
    core.reg_write("pc", start.address if start is not None and start.space == "pmem" else 0)
    return img


def resolve(core, name: str) -> Symbol:
    """Resolve a symbol on a core; locals must be in scope at the current pc."""
    img = core.image
    if img is None:
        raise ImageError("no image loaded")
    sym = img.symbol(name)
    if sym is None:
        raise ImageError(f"unknown symbol {name!r}")
    if sym.kind == "local_var":
        fn = _owning_function(img, name)
        if fn is None or not _pc_in_function(core, img, fn):
            raise ImageError(f"local {name!r} not in scope")
    return sym


def local_address(core, sym: Symbol) -> int:
    return (core.reg_read("sp", raw_ok=True) + sym.address) & 0xFFFF


def _owning_function(img: ProgramImage, local_name: str):
    for fn in img.functions:
        if local_name in fn.locals:
            return fn
    return None


def _pc_in_function(core, img: ProgramImage, fn: FunctionInfo) -> bool:
    loc = img.addr_to_line(core.pc)
    if loc is None:
        return False
    file, line = loc
    return file == fn.file and fn.line_range[0] <= line <= fn.line_range[1]


def addr_line_map(core, query):
    """addr -> (file, line), or (file, line) -> first mapped pmem address."""
    img = core.image
    if img is None:
        raise ImageError("no image loaded")
    if isinstance(query, int):
        loc = img.addr_to_line(query)
        if loc is None:
            raise ImageError(f"no line mapping for address {query}")
        return loc
    file, line = query
    addr = img.line_to_addr(file, line)
    if addr is None:
        raise ImageError(f"no address mapping for {file}:{line}")
    return addr


def list_symbols(core, kind_filter=None) -> list:
    img = core.image
    if img is None:
        raise ImageError("no image loaded")
    if kind_filter is None:
        return list(img.symbols)
    return [s for s in img.symbols if s.kind == kind_filter]