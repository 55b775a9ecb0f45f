"""Debugger kernel: primitive registration, instance dispatch, and the
command/callback control paths.

The kernel owns every connected core and one interpreter on a single logical
thread. Client layers (REPL, script runner, service) feed it command strings;
target events flow back out through callback dispatch, the event log, and
broadcast listeners. `resume` issued on the command path runs a core;
`resume` inside a callback only schedules the triggering core, and execution
continues silently iff every event's callback scheduled it.
"""

from __future__ import annotations

import re
import sys
from dataclasses import dataclass, field
from typing import Callable, Optional

from . import ce as ce_mod
from . import fxpr as fxpr_mod
from . import image as image_mod
from .core import (
    MODELS,
    RUN_HALTED,
    RUN_RUNNABLE,
    RUN_STOPPED,
    CoreError,
    ProcessorCore,
    TargetEvent,
)
from .errors import ImageError, LuxdbgError, ScriptError
from .interp import ExitScript, Interpreter, list_format, list_parse

SLICE_CYCLES = 1000
_FILE_LINE_RE = re.compile(r"^(.+):([0-9]+)$")


@dataclass
class BreakpointRegistration:
    id: int
    instance: str
    location: str
    access: str  # exec | read | write | cycle
    addr: int
    callback: str = ""
    enabled: bool = True


@dataclass
class CallbackContext:
    instance: str
    resume_scheduled: bool = False
    broke: bool = False
    breaker: Optional[TargetEvent] = None

    def record_break(self, ev: TargetEvent):
        self.broke = True
        if self.breaker is None:
            self.breaker = ev


def _int_arg(text: str, what: str) -> int:
    try:
        return int(text, 0)
    except ValueError:
        raise ScriptError(f"expected {what} but got \"{text}\"")


def describe_event(ev: TargetEvent) -> str:
    if ev.kind == "breakpoint":
        return f"breakpoint {ev.handle}"
    if ev.kind == "data_breakpoint":
        return f"data_breakpoint {ev.handle}"
    if ev.kind == "exception":
        return f"exception {ev.errnum} {ev.errstr}"
    if ev.kind == "syscall":
        return f"syscall {ev.handle}"
    return ev.kind


class Debugger:
    def __init__(self, stdout_write: Optional[Callable[[str], None]] = None,
                 log_sink=None):
        self._out_hooks: list[Callable[[str], None]] = []
        if stdout_write is None:
            stdout_write = lambda s: (sys.stdout.write(s), sys.stdout.flush())
        self._out_hooks.append(stdout_write)
        self.interp = Interpreter(stdout_write=self.write_output)
        self.interp.unknown_hook = self._unknown_command
        self.cores: dict[str, ProcessorCore] = {}
        self.breakpoints: dict[int, BreakpointRegistration] = {}
        self._bp_seq = 0
        self._core_stack: list[str] = []
        self._current_base: Optional[str] = None
        self._callback_stack: list[CallbackContext] = []
        self.log_sink = log_sink
        self.event_listeners: list[Callable[[dict], None]] = []
        self._register_primitives()

    # ------------------------------------------------------------------
    # plumbing

    def write_output(self, text: str):
        for hook in self._out_hooks:
            hook(text)

    def add_output_hook(self, hook: Callable[[str], None]):
        self._out_hooks.append(hook)

    def _log(self, line: str):
        if self.log_sink is not None:
            self.log_sink.write(line + "\n")

    def _broadcast(self, message: dict):
        for listener in self.event_listeners:
            listener(message)

    def current_core(self) -> ProcessorCore:
        name = self._core_stack[-1] if self._core_stack else self._current_base
        if name is None:
            raise ScriptError("no current processor")
        return self.cores[name]

    def core_named(self, name: str) -> ProcessorCore:
        core = self.cores.get(name)
        if core is None:
            raise ScriptError(f"unknown instance \"{name}\"")
        return core

    def eval_command(self, text: str) -> str:
        """Top-level entry: evaluate one client command, then advance any
        backgrounded cores one round-robin round."""
        try:
            result = self.interp.eval_script(text)
        except ExitScript:
            raise
        except ScriptError:
            self._advance_background()
            raise
        self._advance_background()
        return result

    def _unknown_command(self, interp, argv):
        text = " ".join(argv)
        name = self._core_stack[-1] if self._core_stack else self._current_base
        if name is not None and fxpr_mod.looks_like_fxpr(text):
            return self._fxpr(text)
        raise ScriptError(f'invalid command name "{argv[0]}"')

    def _fxpr(self, text: str) -> str:
        ctx = fxpr_mod.EvalContext(self.current_core(), self.cores)
        return fxpr_mod.fxpr_eval(ctx, text)

    # ------------------------------------------------------------------
    # event dispatch (callback path)

    def _on_target_event(self, ev: TargetEvent):
        detail = ""
        if ev.kind in ("breakpoint",):
            detail = f" handle={ev.handle}"
        elif ev.kind == "data_breakpoint":
            detail = f" handle={ev.handle} addr={ev.payload[0]} value={ev.payload[1]}"
        elif ev.kind == "exception":
            detail = f" errnum={ev.errnum} severity={ev.severity}"
        elif ev.kind == "syscall":
            detail = f" code={ev.handle}"
        elif ev.kind in ("port_output",):
            detail = f" port={ev.payload[0]} value={ev.payload[1]}"
        elif ev.kind == "port_input_request":
            detail = f" port={ev.payload[0]}"
        self._log(f"event {ev.processor} {ev.kind}{detail} cycle={ev.cycle_stamp}")
        msg = {"event": "target", "processor": ev.processor, "kind": ev.kind,
               "cycle": ev.cycle_stamp}
        if ev.kind in ("breakpoint", "data_breakpoint"):
            msg["bp"] = ev.handle
        if ev.kind == "exception":
            msg.update(errnum=ev.errnum, severity=ev.severity, errstr=ev.errstr)
        if ev.kind == "syscall":
            msg["code"] = ev.handle
        self._broadcast(msg)

    def _callback_text(self, core: ProcessorCore, ev: TargetEvent) -> Optional[str]:
        if ev.kind in ("breakpoint", "data_breakpoint"):
            reg = self.breakpoints.get(ev.handle)
            if reg is None or not reg.callback:
                return None
            if ev.kind == "breakpoint":
                args = [str(ev.handle), core.instance_name]
            else:
                args = [str(ev.handle), core.instance_name,
                        str(ev.payload[0]), str(ev.payload[1])]
            return reg.callback + " " + list_format(args)
        if ev.kind == "exception":
            cb = core.except_callbacks.get(ev.errnum)
            if cb is None:
                return None
            return cb + " " + list_format([str(ev.errnum), ev.severity, ev.errstr])
        if ev.kind == "syscall":
            return core.syscall_callbacks.get(ev.handle)
        return None

    def _dispatch_events(self, core: ProcessorCore, events: list) -> CallbackContext:
        """Run every event's callback; returns the context with the disposition."""
        ctx = CallbackContext(core.instance_name)
        self._callback_stack.append(ctx)
        self._core_stack.append(core.instance_name)
        try:
            for ev in events:
                cb_text = self._callback_text(core, ev)
                if ev.kind == "breakpoint":
                    reg = self.breakpoints.get(ev.handle)
                    if reg is not None and reg.access == "cycle":
                        del self.breakpoints[ev.handle]  # temporal bps are one-shot
                if cb_text is None:
                    if ev.kind == "exception":
                        self.write_output(
                            f"{ev.severity}: {ev.processor} exception "
                            f"{ev.errnum}: {ev.errstr}\n")
                        if ev.severity in ("note", "warning"):
                            ctx.resume_scheduled = True
                        else:
                            ctx.record_break(ev)
                    else:
                        ctx.record_break(ev)
                    continue
                try:
                    self.interp.eval_script(cb_text)
                except ExitScript:
                    raise
                except ScriptError as e:
                    self.write_output(f"callback error: {e.message}\n")
                    ctx.record_break(ev)
                if ev.kind == "exception" and ev.severity == "fatal":
                    ctx.record_break(ev)
            if ctx.breaker is None and not ctx.resume_scheduled and events:
                ctx.breaker = events[0]
            return ctx
        finally:
            self._core_stack.pop()
            self._callback_stack.pop()

    def _finish_stop(self, core: ProcessorCore, events: list,
                     ctx_breaker: Optional[TargetEvent]) -> str:
        ev = ctx_breaker or events[0]
        reason = describe_event(ev)
        core.last_stop_reason = reason
        if core.run_state != RUN_HALTED:
            core.run_state = RUN_STOPPED
        pc = core.pc
        self._log(f"stop {core.instance_name} pc={pc} {reason}")
        msg = {"event": "stopped", "processor": core.instance_name,
               "reason": ev.kind, "pc": pc}
        if ev.kind in ("breakpoint", "data_breakpoint"):
            msg["bp"] = ev.handle
        if ev.kind == "exception":
            msg.update(errnum=ev.errnum, errstr=ev.errstr)
        self._broadcast(msg)
        return f"stopped {core.instance_name} pc={pc} {reason}"

    def _run_events(self, core: ProcessorCore, events: list):
        """Dispatch events; returns stop text if control breaks, else None."""
        ctx = self._dispatch_events(core, events)
        if ctx.resume_scheduled and not ctx.broke:
            return None
        return self._finish_stop(core, events, ctx.breaker)

    # ------------------------------------------------------------------
    # execution driving

    def _advance_background(self, exclude: Optional[ProcessorCore] = None) -> bool:
        progressed = False
        for core in list(self.cores.values()):
            if core is exclude or core.run_state != RUN_RUNNABLE:
                continue
            progressed = True
            start = core.cycles
            events = core.run_slice(SLICE_CYCLES)
            self._log(f"slice {core.instance_name} {start} {core.cycles}")
            if events:
                stop_text = self._run_events(core, events)
                if stop_text is None:
                    core.run_state = RUN_RUNNABLE
        return progressed

    def _run_foreground(self, core: ProcessorCore) -> str:
        core.run_state = RUN_RUNNABLE
        self._log(f"resume {core.instance_name}")
        while True:
            events = core.run_slice(SLICE_CYCLES)
            if events:
                stop_text = self._run_events(core, events)
                if stop_text is not None:
                    return stop_text
                core.run_state = RUN_RUNNABLE
            self._advance_background(exclude=core)

    def _ensure_steppable(self, core: ProcessorCore):
        if core.run_state == RUN_HALTED:
            raise ScriptError(f"processor {core.instance_name} is halted")
        if core.run_state == RUN_RUNNABLE:
            raise ScriptError(f"processor {core.instance_name} running")

    # ------------------------------------------------------------------
    # breakpoint bookkeeping

    def _next_bp_id(self) -> int:
        self._bp_seq += 1
        return self._bp_seq

    def _rebuild_bp_maps(self, core: ProcessorCore):
        core.exec_bps = {}
        core.data_bps = {}
        for reg in self.breakpoints.values():
            if reg.instance != core.instance_name or not reg.enabled:
                continue
            if reg.access == "exec":
                core.exec_bps.setdefault(reg.addr, []).append(reg.id)
            elif reg.access in ("read", "write"):
                core.data_bps.setdefault(reg.addr, []).append((reg.id, reg.access))
        core.at_bps = [(reg.id, reg.addr) for reg in self.breakpoints.values()
                       if reg.instance == core.instance_name
                       and reg.access == "cycle" and reg.enabled]

    # ------------------------------------------------------------------
    # primitive registration

    def _register_primitives(self):
        prims = {
            "processor": self._cmd_processor,
            "load": self._cmd_load,
            "stop": self._cmd_stop,
            "clear": self._cmd_clear,
            "query": self._cmd_query,
            "enable": self._cmd_enable,
            "disable": self._cmd_disable,
            "at": self._cmd_at,
            "except": self._cmd_except,
            "syscall": self._cmd_syscall,
            "resume": self._cmd_resume,
            "wait": self._cmd_wait,
            "stepi": self._cmd_stepi,
            "next": self._cmd_next,
            "halt": self._cmd_halt,
            "reset": self._cmd_reset,
            "fxpr": self._cmd_fxpr,
            "ce": self._cmd_ce,
            "configure": self._cmd_configure,
            "?": self._cmd_reflect,
            "readstring": self._cmd_readstring,
            "readlong": self._cmd_readlong,
            "srcfn": self._cmd_srcfn,
            "sinkfn": self._cmd_sinkfn,
            "srcfile": self._cmd_srcfile,
            "sinkfile": self._cmd_sinkfile,
            "logsigs": self._cmd_logsigs,
            "pseudoreg": self._cmd_pseudoreg,
        }
        for name, fn in prims.items():
            self.interp.register(name, lambda it, argv, _fn=fn: _fn(argv))

    # ------------------------------------------------------------------
    # processor management

    def _cmd_processor(self, argv):
        if not argv:
            raise ScriptError('wrong # args: should be "processor option ?arg ...?"')
        sub = argv[0]
        if sub == "new":
            if len(argv) not in (3, 4):
                raise ScriptError('wrong # args: should be "processor new model name ?sim|emu?"')
            model, name = argv[1], argv[2]
            mode = argv[3] if len(argv) == 4 else "sim"
            if model not in MODELS:
                raise ScriptError(f'unknown model "{model}"')
            if name in self.cores:
                raise ScriptError(f'duplicate instance name "{name}"')
            if name in self.interp.commands:
                raise ScriptError(f'instance name "{name}" collides with a command')
            if mode not in ("sim", "emu"):
                raise ScriptError(f'bad mode "{mode}"')
            core = ProcessorCore(model, name, mode)
            core.event_tap = self._on_target_event
            core.port_proc_source = self._port_source_proc
            core.port_proc_sink = self._port_sink_proc
            self.cores[name] = core
            self.interp.register(name, lambda it, argv, _n=name: self._dispatch_instance(_n, argv))
            self._current_base = name
            return name
        if sub == "name":
            return self.current_core().instance_name
        if sub == "list":
            return list_format(self.cores.keys())
        if sub == "models":
            return list_format(MODELS.keys())
        if sub == "disconnect":
            if len(argv) != 2:
                raise ScriptError('wrong # args: should be "processor disconnect name"')
            core = self.core_named(argv[1])
            core.cancel_signal_log()
            for bpid in [i for i, r in self.breakpoints.items() if r.instance == argv[1]]:
                del self.breakpoints[bpid]
            del self.cores[argv[1]]
            self.interp.unregister(argv[1])
            if self._current_base == argv[1]:
                self._current_base = None
            return ""
        raise ScriptError(f'bad processor option "{sub}"')

    def _dispatch_instance(self, name: str, argv):
        if not argv:
            raise ScriptError(f'instance "{name}": missing command')
        self._core_stack.append(name)
        try:
            return self.interp.invoke(list(argv))
        finally:
            self._core_stack.pop()

    # ------------------------------------------------------------------
    # location resolution and breakpoints

    def _resolve_stop_location(self, core: ProcessorCore, words: list):
        """Returns (display, access, addr, remaining words)."""
        access = None
        if words and words[0] == "in":
            if len(words) < 2:
                raise ScriptError('wrong # args: should be "stop in function ?callback?"')
            fname = words[1]
            rest = list(words[2:])
            if rest and rest[0] in ("-read", "-write"):
                raise ScriptError("-read/-write not allowed on a pmem location")
            img = core.image
            fn = img.function(fname) if img is not None else None
            if fn is None:
                raise ScriptError(f'cannot resolve location "{fname}"')
            return (f"in {fname}", "exec", fn.entry, rest)
        if not words:
            raise ScriptError('wrong # args: should be "stop location ?-read|-write? ?callback?"')
        loc = words[0]
        rest = list(words[1:])
        if rest and rest[0] in ("-read", "-write"):
            access = rest[0][1:]
            rest = rest[1:]
        # numeric address
        try:
            addr = int(loc, 0)
        except ValueError:
            addr = None
        if addr is not None:
            if access is None:
                if addr >= core.pmem.size:
                    raise ScriptError(f"pmem address {addr} out of range")
                return (loc, "exec", addr, rest)
            if addr >= core.ymem.size:
                raise ScriptError(f"ymem address {addr} out of range")
            return (loc, access, addr, rest)
        m = _FILE_LINE_RE.match(loc)
        img = core.image
        if m and (img is None or img.symbol(loc) is None):
            if access is not None:
                raise ScriptError("-read/-write not allowed on a pmem location")
            try:
                addr = image_mod.addr_line_map(core, (m.group(1), int(m.group(2))))
            except ImageError as e:
                raise ScriptError(str(e))
            return (loc, "exec", addr, rest)
        sym = img.symbol(loc) if img is not None else None
        if sym is None:
            raise ScriptError(f'cannot resolve location "{loc}"')
        if sym.kind in ("label", "function"):
            if access is not None:
                raise ScriptError("-read/-write not allowed on a pmem location")
            return (loc, "exec", sym.address, rest)
        if sym.kind in ("data", "global_var"):
            if access is None:
                raise ScriptError(f'data location "{loc}" requires -read or -write')
            return (loc, access, sym.address, rest)
        raise ScriptError(f'cannot set a breakpoint on {sym.kind} "{loc}"')

    def _cmd_stop(self, argv):
        core = self.current_core()
        display, access, addr, rest = self._resolve_stop_location(core, argv)
        callback = ""
        if rest:
            if len(rest) > 1:
                raise ScriptError('wrong # args: callback must be a single word')
            callback = rest[0]
        bpid = self._next_bp_id()
        self.breakpoints[bpid] = BreakpointRegistration(
            bpid, core.instance_name, display, access, addr, callback)
        self._rebuild_bp_maps(core)
        return str(bpid)

    def _cmd_at(self, argv):
        core = self.current_core()
        if core.mode == "emu":
            raise ScriptError("cycle breakpoints not integrated")
        if not argv or len(argv) > 2:
            raise ScriptError('wrong # args: should be "at cycle ?callback?"')
        target = _int_arg(argv[0], "cycle count")
        if target < core.cycles:
            raise ScriptError(f"cycle {target} already passed")
        callback = argv[1] if len(argv) == 2 else ""
        bpid = self._next_bp_id()
        self.breakpoints[bpid] = BreakpointRegistration(
            bpid, core.instance_name, f"cycle {target}", "cycle", target, callback)
        self._rebuild_bp_maps(core)
        return str(bpid)

    def _bp_by_id(self, text: str) -> BreakpointRegistration:
        bpid = _int_arg(text, "breakpoint id")
        reg = self.breakpoints.get(bpid)
        if reg is None:
            raise ScriptError(f"unknown breakpoint id {bpid}")
        return reg

    def _cmd_clear(self, argv):
        if len(argv) != 1:
            raise ScriptError('wrong # args: should be "clear id"')
        reg = self._bp_by_id(argv[0])
        del self.breakpoints[reg.id]
        if reg.instance in self.cores:
            self._rebuild_bp_maps(self.cores[reg.instance])
        return ""

    def _cmd_query(self, argv):
        if argv:
            raise ScriptError('wrong # args: should be "query"')
        rows = []
        for reg in self.breakpoints.values():
            rows.append(list_format([str(reg.id), reg.instance, reg.location,
                                     reg.access, "1" if reg.enabled else "0"]))
        return list_format(rows)

    def _toggle_bp(self, argv, enabled: bool):
        if len(argv) != 1:
            raise ScriptError(f'wrong # args: should be "{"enable" if enabled else "disable"} id"')
        reg = self._bp_by_id(argv[0])
        reg.enabled = enabled
        if reg.instance in self.cores:
            self._rebuild_bp_maps(self.cores[reg.instance])
        return ""

    def _cmd_enable(self, argv):
        return self._toggle_bp(argv, True)

    def _cmd_disable(self, argv):
        return self._toggle_bp(argv, False)

    def _cmd_except(self, argv):
        if len(argv) != 2:
            raise ScriptError('wrong # args: should be "except errnum callback"')
        core = self.current_core()
        core.except_callbacks[_int_arg(argv[0], "errnum")] = argv[1]
        return ""

    def _cmd_syscall(self, argv):
        if len(argv) != 2:
            raise ScriptError('wrong # args: should be "syscall code callback"')
        core = self.current_core()
        core.syscall_callbacks[_int_arg(argv[0], "syscall code")] = argv[1]
        return ""

    # ------------------------------------------------------------------
    # execution commands

    def _cmd_resume(self, argv):
        background = False
        if argv == ["&"]:
            background = True
        elif argv:
            raise ScriptError('wrong # args: should be "resume ?&?"')
        core = self.current_core()
        if self._callback_stack:
            ctx = self._callback_stack[-1]
            if core.instance_name != ctx.instance:
                raise ScriptError(
                    f"resume: a callback may only schedule the triggering "
                    f"processor {ctx.instance}")
            if background:
                raise ScriptError("resume &: not allowed on the callback path")
            ctx.resume_scheduled = True
            return ""
        if core.run_state == RUN_HALTED:
            raise ScriptError(f"processor {core.instance_name} is halted")
        if core.run_state == RUN_RUNNABLE:
            raise ScriptError(f"processor {core.instance_name} running")
        if background:
            core.run_state = RUN_RUNNABLE
            self._log(f"resume& {core.instance_name}")
            return ""
        return self._run_foreground(core)

    def _cmd_wait(self, argv):
        names = []
        for a in argv:
            names.extend(list_parse(a))
        for n in names:
            self.core_named(n)
        while any(self.cores[n].run_state == RUN_RUNNABLE for n in names):
            if not self._advance_background():
                break
        rows = []
        for n in names:
            core = self.cores[n]
            reason = core.last_stop_reason or core.run_state
            rows.append(f"{n} {reason}")
        return list_format(rows)

    def _cmd_stepi(self, argv):
        count = 1
        if len(argv) == 1:
            count = _int_arg(argv[0], "step count")
            if count < 1:
                raise ScriptError("step count must be positive")
        elif argv:
            raise ScriptError('wrong # args: should be "stepi ?count?"')
        core = self.current_core()
        self._ensure_steppable(core)
        remaining = count
        while remaining > 0:
            before = core.cycles
            events = core.step(1)
            if core.cycles != before:
                remaining -= 1
            if events:
                stop_text = self._run_events(core, events)
                if stop_text is not None:
                    return stop_text
                if core.run_state != RUN_HALTED:
                    core.run_state = RUN_STOPPED
        return ""

    def _cmd_next(self, argv):
        count = 1
        if len(argv) == 1:
            count = _int_arg(argv[0], "count")
        elif argv:
            raise ScriptError('wrong # args: should be "next ?count?"')
        core = self.current_core()
        self._ensure_steppable(core)
        for _ in range(count):
            img = core.image
            start_loc = img.addr_to_line(core.pc) if img is not None else None
            if start_loc is None:
                result = self._cmd_stepi([])
                if result:
                    return result
                continue
            for _guard in range(100000):
                result = self._cmd_stepi([])
                if result:
                    return result
                if img.addr_to_line(core.pc) != start_loc:
                    break
            else:
                raise ScriptError("next: no source line change within 100000 steps")
        return ""

    def _cmd_halt(self, argv):
        if len(argv) > 1:
            raise ScriptError('wrong # args: should be "halt ?instance?"')
        core = self.core_named(argv[0]) if argv else self.current_core()
        if core.run_state == RUN_RUNNABLE:
            core.run_state = RUN_STOPPED
            core.last_stop_reason = "halt requested"
            self._log(f"stop {core.instance_name} pc={core.pc} halt requested")
            self._broadcast({"event": "stopped", "processor": core.instance_name,
                             "reason": "halt", "pc": core.pc})
        return ""

    def _cmd_reset(self, argv):
        if argv:
            raise ScriptError('wrong # args: should be "reset"')
        core = self.current_core()
        if core.run_state == RUN_RUNNABLE:
            raise ScriptError(f"processor {core.instance_name} running")
        core.reset()
        return ""

    # ------------------------------------------------------------------
    # evaluators and access

    def _cmd_fxpr(self, argv):
        if not argv:
            raise ScriptError('wrong # args: should be "fxpr expression"')
        return self._fxpr(" ".join(argv))

    def _cmd_ce(self, argv):
        if not argv:
            raise ScriptError('wrong # args: should be "ce expression ?format?"')
        fmt = "%d"
        if argv[-1] in ("%d", "%x", "%s"):
            fmt = argv[-1]
            argv = argv[:-1]
        return ce_mod.ce_eval(self.current_core(), " ".join(argv), fmt)

    def _cmd_configure(self, argv):
        if len(argv) != 2 or argv[0] != "-hiddenregisters":
            raise ScriptError('should be "configure -hiddenregisters on|off"')
        if argv[1] not in ("on", "off"):
            raise ScriptError(f'bad value "{argv[1]}": must be on or off')
        self.current_core().hidden_visible = argv[1] == "on"
        return ""

    def _cmd_reflect(self, argv):
        if len(argv) != 1:
            raise ScriptError('wrong # args: should be "? kind"')
        core = self.current_core()
        kind = argv[0]
        if kind == "R":
            rows = [f"{n} {v} {s} {w}" for n, v, s, w in core.reflect("registers")]
            return list_format(rows)
        if kind == "M":
            rows = [f"{i} {sz} {ww}" for i, sz, ww in core.reflect("memory")]
            return list_format(rows)
        if kind == "P":
            return core.reflect("pcname")
        if kind == "B":
            return core.reflect("byteorder")
        if kind == "W":
            return str(core.reflect("wordsize"))
        if kind == "S":
            if core.image is None:
                return ""
            rows = [f"{s.name} {s.kind} {s.space} {s.address}"
                    for s in image_mod.list_symbols(core)]
            return list_format(rows)
        raise ScriptError(f'unknown query kind "{kind}"')

    def _locator(self, argv) -> int:
        words = list(argv)
        if len(words) == 1:
            words = list_parse(words[0])
        if len(words) != 2 or words[0] != "ymem":
            raise ScriptError('bad locator: should be "ymem addr"')
        return _int_arg(words[1], "address")

    def _cmd_readstring(self, argv):
        core = self.current_core()
        addr = self._locator(argv)
        if addr < 0 or addr >= core.ymem.size:
            raise ScriptError(f"ymem address {addr} out of range")
        return ce_mod.read_string(core, addr)

    def _cmd_readlong(self, argv):
        core = self.current_core()
        addr = self._locator(argv)
        if addr < 0 or addr + 1 >= core.ymem.size:
            raise ScriptError(f"ymem address {addr} out of range")
        lo = core.ymem.contents[addr]
        hi = core.ymem.contents[addr + 1]
        return str((hi << 16) | lo)

    def _cmd_load(self, argv):
        if len(argv) != 1:
            raise ScriptError('wrong # args: should be "load imageFile"')
        core = self.current_core()
        self._ensure_steppable(core)
        try:
            img = image_mod.load_image(core, argv[0])
        except ImageError as e:
            raise ScriptError(str(e))
        return img.name

    def _cmd_pseudoreg(self, argv):
        if len(argv) not in (1, 2):
            raise ScriptError('wrong # args: should be "pseudoreg name ?width?"')
        width = _int_arg(argv[1], "width") if len(argv) == 2 else 32
        core = self.current_core()
        try:
            core.add_pseudo(argv[0], width)
        except CoreError as e:
            raise ScriptError(str(e))
        return ""

    def _cmd_logsigs(self, argv):
        core = self.current_core()
        if argv == ["off"]:
            core.cancel_signal_log()
            return ""
        if len(argv) < 2:
            raise ScriptError('wrong # args: should be "logsigs off | logsigs file reg ?reg ...?"')
        try:
            core.log_signals(argv[1:], argv[0])
        except (CoreError, OSError) as e:
            raise ScriptError(str(e))
        return ""

    # ------------------------------------------------------------------
    # port IO redirection

    def _bind(self, argv, direction, endpoint_kind, usage):
        if len(argv) != 2:
            raise ScriptError(f'wrong # args: should be "{usage}"')
        core = self.current_core()
        try:
            core.bind_port(argv[0], direction, endpoint_kind, argv[1])
        except CoreError as e:
            raise ScriptError(str(e))
        return ""

    def _cmd_srcfn(self, argv):
        return self._bind(argv, "source", "procedure", "srcfn port procedure")

    def _cmd_sinkfn(self, argv):
        return self._bind(argv, "sink", "procedure", "sinkfn port procedure")

    def _cmd_srcfile(self, argv):
        return self._bind(argv, "source", "file", "srcfile port file")

    def _cmd_sinkfile(self, argv):
        return self._bind(argv, "sink", "file", "sinkfile port file")

    def _port_source_proc(self, core: ProcessorCore, binding) -> int:
        """Ask a script procedure for an input value; runs with the port's core current."""
        self._core_stack.append(core.instance_name)
        try:
            if binding.endpoint not in self.interp.commands:
                core.post_exception(5012, "error",
                                    f"unknown io procedure {binding.endpoint!r}")
                return 0
            try:
                result = self.interp.eval_script(binding.endpoint)
            except ScriptError as e:
                core.post_exception(5012, "error", f"io callback failed: {e.message}")
                return 0
            try:
                return int(result.strip(), 0)
            except ValueError:
                core.post_exception(5012, "error",
                                    f"io procedure returned non-integer {result!r}")
                return 0
        finally:
            self._core_stack.pop()

    def _port_sink_proc(self, core: ProcessorCore, binding, value: int):
        self._core_stack.append(core.instance_name)
        try:
            if binding.endpoint not in self.interp.commands:
                core.post_exception(5012, "error",
                                    f"unknown io procedure {binding.endpoint!r}")
                return
            text = binding.endpoint + " " + list_format(
                [core.instance_name, binding.port, str(value)])
            try:
                self.interp.eval_script(text)
            except ScriptError as e:
                core.post_exception(5012, "error", f"io callback failed: {e.message}")
        finally:
            self._core_stack.pop()