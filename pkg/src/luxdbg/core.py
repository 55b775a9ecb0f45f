"""Circuit and machine-code layers: the lx16 processor model.

A core owns its registers, the pmem/ymem arenas, breakpoint lookup tables and
the cycle counter. Execution is strictly single threaded: step/run are the
only mutators while a program runs, and every stop-causing event is delivered
at an instruction boundary (TAS and every other instruction are indivisible).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

from .errors import LuxdbgError
from .fixedpoint import FRACTIONAL, INTEGER, q15_mul, signed, wrap32

# exception numbers delivered via exception-kind target events
ILLEGAL_INSTR = 5001
MEM_FAULT = 5002
IO_EOF = 5010
IO_FAIL = 5012
UNHANDLED_BP = 5067
CYCCNT_EXPIRED_HANDLE = 2415919104
CYCCNT_EXPIRED_ERRSTR = f"unhandled breakpoint handle {CYCCNT_EXPIRED_HANDLE}"

PMEM_SIZE = 65536
YMEM_SIZE = 65536
YMEM_MASK = 0xFFFF

RUN_STOPPED = "stopped"
RUN_RUNNABLE = "runnable"
RUN_HALTED = "halted"


@dataclass(frozen=True)
class RegisterDescriptor:
    name: str
    width: int
    sign: str  # 's' | 'u'
    kind: str  # core | port | hidden | pseudo
    reset_value: int = 0

    @property
    def mask(self) -> int:
        return (1 << self.width) - 1


@dataclass
class MemorySpace:
    id: str
    word_width: int
    size: int
    contents: list = field(default_factory=list)


@dataclass
class TargetEvent:
    kind: str  # breakpoint | data_breakpoint | exception | syscall | halt | port_output | port_input_request
    processor: str
    handle: int = 0
    errnum: int = 0
    severity: str = ""
    errstr: str = ""
    cycle_stamp: int = 0
    payload: tuple = ()


@dataclass
class PortBinding:
    port: str
    direction: str  # source | sink
    endpoint_kind: str  # none | file | procedure
    endpoint: str = ""
    fobj: object = None


@dataclass(frozen=True)
class ModelSpec:
    name: str
    personality: str


MODELS = {
    "lx16i": ModelSpec("lx16i", INTEGER),
    "lx16f": ModelSpec("lx16f", FRACTIONAL),
}

_REGISTER_LAYOUT = (
    ("pc", 20, "u", "core"),
    ("sp", 16, "u", "core"),
    ("i", 16, "u", "core"),
    ("a0", 32, "s", "core"),
    ("a1", 32, "s", "core"),
    ("r0", 16, "u", "core"),
    ("r1", 16, "u", "core"),
    ("r2", 16, "u", "core"),
    ("r3", 16, "u", "core"),
    ("r4", 16, "u", "core"),
    ("r5", 16, "u", "core"),
    ("r6", 16, "u", "core"),
    ("r7", 16, "u", "core"),
    ("flag", 1, "u", "core"),
    ("pio0", 16, "u", "port"),
    ("pio1", 16, "u", "port"),
    ("cycles", 32, "u", "hidden"),
    ("cyclec", 8, "u", "hidden"),
)


class CoreError(LuxdbgError):
    pass


class _Fault(Exception):
    """Internal: aborts the faulting instruction; carries the exception event fields."""

    def __init__(self, errnum, errstr):
        self.errnum = errnum
        self.errstr = errstr


class ProcessorCore:
    def __init__(self, model: str, instance_name: str, mode: str = "sim"):
        spec = MODELS.get(model)
        if spec is None:
            raise CoreError(f"unknown model {model!r}")
        if mode not in ("sim", "emu"):
            raise CoreError(f"bad mode {mode!r}")
        self.model = model
        self.instance_name = instance_name
        self.personality = spec.personality
        self.mode = mode
        self.run_state = RUN_STOPPED
        self.hidden_visible = False

        self.registers: dict[str, RegisterDescriptor] = {}
        self.values: dict[str, int] = {}
        for name, width, sign, kind in _REGISTER_LAYOUT:
            self.registers[name] = RegisterDescriptor(name, width, sign, kind)
            self.values[name] = 0

        self.pmem = MemorySpace("pmem", 16, PMEM_SIZE, [None] * PMEM_SIZE)
        self.ymem = MemorySpace("ymem", 16, YMEM_SIZE, [0] * YMEM_SIZE)

        self.port_bindings: dict[tuple, PortBinding] = {}  # (port, direction) -> binding
        self.exec_bps: dict[int, list] = {}  # pmem addr -> [bp ids]
        self.data_bps: dict[int, list] = {}  # ymem addr -> [(bp id, access)]
        self.at_bps: list = []  # [(bp id, cycle, callback id unused)]
        self.except_callbacks: dict[int, str] = {}
        self.syscall_callbacks: dict[int, str] = {}
        self.image = None
        self.last_stop_reason = ""

        # kernel-installed hooks; all optional so a bare core stays testable
        self.event_tap: Optional[Callable[[TargetEvent], None]] = None
        self.port_proc_source: Optional[Callable[[ProcessorCore, PortBinding], int]] = None
        self.port_proc_sink: Optional[Callable[[ProcessorCore, PortBinding, int], None]] = None

        self._pending_exceptions: list[TargetEvent] = []
        self._skip_bp_addr: Optional[int] = None
        self._siglog_fobj = None
        self._siglog_names: list[str] = []
        self._siglog_buffer: dict[str, int] = {}
        self._reg_order = {n: i for i, n in enumerate(self.registers)}

    # ------------------------------------------------------------------
    # registers

    @property
    def cycles(self) -> int:
        return self.values["cycles"]

    @property
    def pc(self) -> int:
        return self.values["pc"]

    def descriptor(self, name: str) -> RegisterDescriptor:
        d = self.registers.get(name)
        if d is None:
            raise CoreError(f"unknown register {name!r}")
        return d

    def reg_accessible(self, name: str) -> bool:
        d = self.registers.get(name)
        if d is None:
            return False
        return d.kind != "hidden" or self.hidden_visible

    def reg_read(self, name: str, raw_ok: bool = False) -> int:
        """Masked unsigned value. Hidden registers require visibility unless raw_ok."""
        d = self.descriptor(name)
        if d.kind == "hidden" and not self.hidden_visible and not raw_ok:
            raise CoreError(f"register {name!r} is hidden")
        return self.values[name] & d.mask

    def reg_value(self, name: str, raw_ok: bool = False) -> int:
        """Sign-interpreted value per the register descriptor."""
        d = self.descriptor(name)
        v = self.reg_read(name, raw_ok)
        return signed(v, d.width) if d.sign == "s" else v

    def reg_write(self, name: str, value: int, raw_ok: bool = False, defer_log: bool = False) -> int:
        d = self.descriptor(name)
        if d.kind == "hidden" and not self.hidden_visible and not raw_ok:
            raise CoreError(f"register {name!r} is hidden")
        v = value & d.mask
        old = self.values[name]
        self.values[name] = v
        if v != old and name in self._siglog_names:
            if defer_log:
                self._siglog_buffer[name] = v
            else:
                self._siglog_emit(name, v)
        return v

    def add_pseudo(self, name: str, width: int = 32) -> RegisterDescriptor:
        if name in self.registers:
            raise CoreError(f"duplicate register name {name!r}")
        if not 1 <= width <= 64:
            raise CoreError(f"bad register width {width}")
        d = RegisterDescriptor(name, width, "u", "pseudo")
        self.registers[name] = d
        self.values[name] = 0
        self._reg_order[name] = len(self._reg_order)
        return d

    # ------------------------------------------------------------------
    # memory

    def space(self, space_id: str) -> MemorySpace:
        if space_id == "pmem":
            return self.pmem
        if space_id == "ymem":
            return self.ymem
        raise CoreError(f"unknown memory space {space_id!r}")

    def mem_read(self, space_id: str, addr: int, count: int = 1) -> list:
        sp = self.space(space_id)
        if count < 1 or addr < 0 or addr + count > sp.size:
            raise CoreError("address out of range")
        return sp.contents[addr : addr + count]

    def mem_write(self, space_id: str, addr: int, values: list) -> list:
        sp = self.space(space_id)
        if addr < 0 or addr + len(values) > sp.size:
            raise CoreError("address out of range")
        if space_id == "ymem":
            stored = [v & YMEM_MASK for v in values]
        else:
            stored = list(values)
        sp.contents[addr : addr + len(stored)] = stored
        return stored

    # ------------------------------------------------------------------
    # reflection

    def reflect(self, kind: str):
        if kind == "registers":
            out = []
            for name, d in self.registers.items():
                if d.kind == "hidden" and not self.hidden_visible:
                    continue
                out.append((name, self.reg_value(name, raw_ok=True), d.sign, d.width))
            return out
        if kind == "memory":
            return [(s.id, s.size, s.word_width) for s in (self.pmem, self.ymem)]
        if kind == "pcname":
            return "pc"
        if kind == "byteorder":
            return "little"
        if kind == "wordsize":
            return 16
        if kind == "models":
            return list(MODELS)
        raise CoreError(f"unknown reflection kind {kind!r}")

    # ------------------------------------------------------------------
    # ports and signal logging

    def bind_port(self, port: str, direction: str, endpoint_kind: str, endpoint: str = ""):
        d = self.registers.get(port)
        if d is None or d.kind != "port":
            raise CoreError(f"{port!r} is not a port register")
        if direction not in ("source", "sink"):
            raise CoreError(f"bad port direction {direction!r}")
        old = self.port_bindings.pop((port, direction), None)
        if old is not None and old.fobj is not None:
            old.fobj.close()
        if endpoint_kind == "none":
            return
        binding = PortBinding(port, direction, endpoint_kind, endpoint)
        if endpoint_kind == "file":
            try:
                binding.fobj = open(endpoint, "r" if direction == "source" else "a", encoding="utf-8")
            except OSError as e:
                raise CoreError(f"cannot open port file {endpoint!r}: {e.strerror}")
        elif endpoint_kind != "procedure":
            raise CoreError(f"bad endpoint kind {endpoint_kind!r}")
        self.port_bindings[(port, direction)] = binding

    def log_signals(self, names: list, sink_path: str):
        for n in names:
            self.descriptor(n)
        self.cancel_signal_log()
        self._siglog_fobj = open(sink_path, "a", encoding="utf-8")
        self._siglog_names = list(names)

    def cancel_signal_log(self):
        if self._siglog_fobj is not None:
            self._siglog_fobj.close()
        self._siglog_fobj = None
        self._siglog_names = []
        self._siglog_buffer = {}

    def _siglog_emit(self, name: str, value: int):
        self._siglog_fobj.write(f"{self.cycles},{self.instance_name},{name},{value}\n")
        self._siglog_fobj.flush()

    def _siglog_flush(self):
        if self._siglog_buffer:
            for name in sorted(self._siglog_buffer, key=self._reg_order.__getitem__):
                self._siglog_emit(name, self._siglog_buffer[name])
            self._siglog_buffer = {}

    # ------------------------------------------------------------------
    # events

    def post_exception(self, errnum: int, severity: str, errstr: str):
        """Queue a debugger-side exception; delivered at the next instruction boundary."""
        self._pending_exceptions.append(
            TargetEvent("exception", self.instance_name, errnum=errnum,
                        severity=severity, errstr=errstr)
        )

    def _emit(self, ev: TargetEvent) -> TargetEvent:
        ev.cycle_stamp = self.cycles
        if self.event_tap is not None:
            self.event_tap(ev)
        return ev

    def note_stop(self, reason: str):
        self.run_state = RUN_STOPPED if self.run_state != RUN_HALTED else RUN_HALTED
        self.last_stop_reason = reason

    # ------------------------------------------------------------------
    # execution

    def reset(self):
        for name, d in self.registers.items():
            self.values[name] = d.reset_value
        self.run_state = RUN_STOPPED
        self.last_stop_reason = ""
        self._pending_exceptions = []
        self._skip_bp_addr = None

    def step(self, n: int) -> list:
        """Execute up to n instructions; returns the boundary events that stopped it (or [])."""
        if n < 1:
            raise CoreError("step count must be positive")
        if self.run_state == RUN_HALTED:
            raise CoreError(f"processor {self.instance_name} is halted")
        for _ in range(n):
            events = self._step_one()
            if events:
                return events
        return []

    def run_slice(self, budget: int) -> list:
        """Run until an event fires or the cycle budget is consumed."""
        if self.run_state == RUN_HALTED:
            raise CoreError(f"processor {self.instance_name} is halted")
        start = self.cycles
        consumed = 0
        while consumed < budget:
            before = self.cycles
            events = self._step_one()
            consumed += (self.cycles - before) & 0xFFFFFFFF
            if events:
                return events
        return []

    def _pre_events(self) -> list:
        events = []
        if self.at_bps:
            still = []
            for bpid, target in self.at_bps:
                if self.cycles >= target:
                    events.append(TargetEvent("breakpoint", self.instance_name, handle=bpid))
                else:
                    still.append((bpid, target))
            self.at_bps = still
        pc = self.pc
        if pc in self.exec_bps and pc != self._skip_bp_addr:
            for bpid in self.exec_bps[pc]:
                events.append(TargetEvent("breakpoint", self.instance_name, handle=bpid))
        return events

    def _step_one(self) -> list:
        events = self._pre_events()
        if events:
            self._skip_bp_addr = self.pc
            self.run_state = RUN_STOPPED
            return [self._emit(e) for e in events]
        self._skip_bp_addr = None

        pc = self.pc
        if pc >= self.pmem.size or self.pmem.contents[pc] is None:
            self.run_state = RUN_STOPPED
            ev = TargetEvent("exception", self.instance_name, errnum=ILLEGAL_INSTR,
                             severity="error",
                             errstr=f"illegal instruction fetch at pmem {pc}")
            return [self._emit(ev)]

        instr = self.pmem.contents[pc]
        events = []
        halted = False
        try:
            halted = self._execute(instr, events)
        except _Fault as f:
            self.run_state = RUN_STOPPED
            ev = TargetEvent("exception", self.instance_name, errnum=f.errnum,
                             severity="error", errstr=f.errstr)
            return [self._emit(ev)]

        rollover = self._bump_cycles(instr.cost)
        if rollover is not None:
            events.append(rollover)
        self._siglog_flush()
        if self._pending_exceptions:
            events.extend(self._pending_exceptions)
            self._pending_exceptions = []
        if halted:
            self.run_state = RUN_HALTED
            events.append(TargetEvent("halt", self.instance_name))
        if events:
            if not halted:
                self.run_state = RUN_STOPPED
            return [self._emit(e) for e in events]
        return []

    def _bump_cycles(self, cost: int) -> Optional[TargetEvent]:
        old = self.values["cycles"]
        nv = old + cost
        self.reg_write("cycles", nv, raw_ok=True, defer_log=True)
        if nv >= (1 << 32) and (self.values["cyclec"] & 4):
            return TargetEvent("exception", self.instance_name, errnum=UNHANDLED_BP,
                               severity="error", errstr=CYCCNT_EXPIRED_ERRSTR)
        return None

    # -- instruction helpers

    def _ymem_addr(self, op) -> int:
        addr = op[1] if op[0] == "addr" else self.reg_read(op[1], raw_ok=True)
        if addr < 0 or addr >= self.ymem.size:
            raise _Fault(MEM_FAULT, f"ymem address {addr} out of range")
        return addr

    def _ymem_load(self, addr: int, events: list) -> int:
        v = self.ymem.contents[addr]
        self._data_bp_hit(addr, "read", v, events)
        return v

    def _ymem_store(self, addr: int, value: int, events: list):
        v = value & YMEM_MASK
        self.ymem.contents[addr] = v
        self._data_bp_hit(addr, "write", v, events)

    def _data_bp_hit(self, addr: int, access: str, value: int, events: list):
        hits = self.data_bps.get(addr)
        if hits:
            for bpid, bp_access in hits:
                if bp_access == access:
                    events.append(TargetEvent("data_breakpoint", self.instance_name,
                                              handle=bpid, payload=(addr, value)))

    def _rw(self, name: str, value: int):
        self.reg_write(name, value, raw_ok=True, defer_log=True)

    def _port_in(self, port: str, events: list) -> int:
        binding = self.port_bindings.get((port, "source"))
        if binding is not None:
            events_ev = TargetEvent("port_input_request", self.instance_name,
                                    payload=(port,))
            self._emit(events_ev)
            value = self._supply_input(binding)
            self._rw(port, value)
        return self.reg_read(port, raw_ok=True)

    def _supply_input(self, binding: PortBinding) -> int:
        if binding.endpoint_kind == "file":
            line = binding.fobj.readline()
            while line.strip() == "" and line != "":
                line = binding.fobj.readline()
            if line == "":
                self.post_exception(IO_EOF, "note",
                                    f"port source file exhausted: {binding.port}")
                return 0
            try:
                return int(line.strip(), 0)
            except ValueError:
                self.post_exception(IO_FAIL, "error",
                                    f"bad value in port source file: {line.strip()!r}")
                return 0
        if self.port_proc_source is None:
            self.post_exception(IO_FAIL, "error",
                                f"no handler for source procedure on {binding.port}")
            return 0
        return self.port_proc_source(self, binding)

    def _port_out(self, port: str, value: int, events: list):
        self._rw(port, value)
        value &= self.registers[port].mask
        binding = self.port_bindings.get((port, "sink"))
        if binding is None:
            return
        self._emit(TargetEvent("port_output", self.instance_name, payload=(port, value)))
        if binding.endpoint_kind == "file":
            binding.fobj.write(f"{value}\n")
            binding.fobj.flush()
        elif self.port_proc_sink is not None:
            self.port_proc_sink(self, binding, value)
        else:
            self.post_exception(IO_FAIL, "error",
                                f"no handler for sink procedure on {binding.port}")

    def _execute(self, instr, events: list) -> bool:
        """Execute one decoded instruction; returns True on HALT."""
        m = instr.mnemonic
        ops = instr.operands
        pc_next = self.pc + 1

        if m == "NOP":
            pass
        elif m == "LDI":
            self._rw(ops[0][1], ops[1][1])
        elif m == "LD":
            addr = self._ymem_addr(ops[1])
            self._rw(ops[0][1], self._ymem_load(addr, events))
        elif m == "ST":
            addr = self._ymem_addr(ops[0])
            self._ymem_store(addr, self.reg_read(ops[1][1], raw_ok=True), events)
        elif m == "MOV":
            self._rw(ops[0][1], self.reg_read(ops[1][1], raw_ok=True))
        elif m in ("ADD", "SUB", "AND", "OR", "XOR"):
            a = self.reg_read(ops[0][1], raw_ok=True)
            b = self.reg_read(ops[1][1], raw_ok=True)
            if m == "ADD":
                v = a + b
            elif m == "SUB":
                v = a - b
            elif m == "AND":
                v = a & b
            elif m == "OR":
                v = a | b
            else:
                v = a ^ b
            self._rw(ops[0][1], v)
        elif m == "MUL":
            if self.personality == FRACTIONAL:
                v = q15_mul(self.reg_read(ops[0][1], raw_ok=True),
                            self.reg_read(ops[1][1], raw_ok=True))
            else:
                v = wrap32(self.reg_value(ops[0][1], raw_ok=True)
                           * self.reg_value(ops[1][1], raw_ok=True))
            self._rw(ops[0][1], v)
        elif m == "CMP":
            eq = self.reg_read(ops[0][1], raw_ok=True) == self.reg_read(ops[1][1], raw_ok=True)
            self._rw("flag", 1 if eq else 0)
        elif m == "BEQ":
            if self.reg_read("flag", raw_ok=True):
                pc_next = ops[0][1]
        elif m == "BNE":
            if not self.reg_read("flag", raw_ok=True):
                pc_next = ops[0][1]
        elif m == "BLT":
            if self.reg_value(ops[0][1], raw_ok=True) < self.reg_value(ops[1][1], raw_ok=True):
                pc_next = ops[2][1]
        elif m == "JMP":
            pc_next = ops[0][1]
        elif m == "CALL":
            sp = (self.reg_read("sp", raw_ok=True) - 1) & 0xFFFF
            self._rw("sp", sp)
            if sp >= self.ymem.size:
                raise _Fault(MEM_FAULT, f"ymem address {sp} out of range")
            self._ymem_store(sp, pc_next, events)
            pc_next = ops[0][1]
        elif m == "RET":
            sp = self.reg_read("sp", raw_ok=True)
            if sp >= self.ymem.size:
                raise _Fault(MEM_FAULT, f"ymem address {sp} out of range")
            pc_next = self._ymem_load(sp, events)
            self._rw("sp", (sp + 1) & 0xFFFF)
        elif m == "PUSH":
            sp = (self.reg_read("sp", raw_ok=True) - 1) & 0xFFFF
            self._rw("sp", sp)
            self._ymem_store(sp, self.reg_read(ops[0][1], raw_ok=True), events)
        elif m == "POP":
            sp = self.reg_read("sp", raw_ok=True)
            self._rw(ops[0][1], self._ymem_load(sp, events))
            self._rw("sp", (sp + 1) & 0xFFFF)
        elif m == "TAS":
            addr = self._ymem_addr(ops[0])
            v = self._ymem_load(addr, events)
            if v != 0:
                self._ymem_store(addr, 0, events)
                self._rw("flag", 1)
            else:
                self._rw("flag", 0)
        elif m == "IN":
            self._rw(ops[0][1], self._port_in(ops[1][1], events))
        elif m == "OUT":
            self._port_out(ops[0][1], self.reg_read(ops[1][1], raw_ok=True), events)
        elif m == "ICALL":
            events.append(TargetEvent("syscall", self.instance_name,
                                      handle=self.reg_read("i", raw_ok=True),
                                      payload=(self.reg_read("i", raw_ok=True),)))
        elif m == "HALT":
            self._rw("pc", pc_next)
            return True
        else:
            raise _Fault(ILLEGAL_INSTR, f"unimplemented mnemonic {m}")

        self._rw("pc", pc_next)
        return False


def create_core(model: str, instance_name: str, mode: str = "sim") -> ProcessorCore:
    """Construct a fresh core in the stopped state at reset values."""
    return ProcessorCore(model, instance_name, mode)
