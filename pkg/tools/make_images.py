#!/usr/bin/env python3
"""Emit the shipped lx16 program images under images/.

Programs are authored here as (mnemonic, args) lists with symbolic labels;
the emitted JSON carries the same symbol names, which the loader resolves.
Run from the repository root: python3 tools/make_images.py
"""

import json
import os

OUT_DIR = os.path.join(os.path.dirname(__file__), "..", "images")


class Prog:
    def __init__(self, name):
        self.name = name
        self.instrs = []
        self.labels = {}
        self.symbols = []
        self.functions = []
        self.ymem = []
        self.lines = []

    def label(self, name):
        self.labels[name] = len(self.instrs)

    def emit(self, op, *args):
        self.instrs.append((op, list(args)))

    def sym(self, name, kind, address, type_tag=None):
        entry = {"name": name, "kind": kind, "address": address}
        if type_tag is not None:
            entry["type"] = type_tag
        self.symbols.append(entry)

    def func(self, name, entry_label, exit_labels, file, line_range, locals_=()):
        self.functions.append({
            "name": name,
            "entry": self.labels[entry_label],
            "exits": [self.labels[x] for x in exit_labels],
            "file": file,
            "line_range": list(line_range),
            "locals": list(locals_),
        })
        self.sym(name, "function", self.labels[entry_label])

    def word(self, addr, value):
        self.ymem.append({"addr": addr, "value": value})

    def string(self, addr, text):
        self.ymem.append({"addr": addr, "string": text})

    def line(self, label_or_addr, file, line):
        addr = self.labels.get(label_or_addr, label_or_addr)
        self.lines.append([addr, file, line])

    def document(self):
        for name, addr in self.labels.items():
            if not any(s["name"] == name for s in self.symbols):
                self.sym(name, "label", addr)
        pmem = [{"addr": i, "op": op, "args": args}
                for i, (op, args) in enumerate(self.instrs)]
        return {
            "name": self.name,
            "pmem": pmem,
            "ymem": self.ymem,
            "symbols": self.symbols,
            "functions": self.functions,
            "lines": self.lines,
        }

    def write(self):
        path = os.path.join(OUT_DIR, f"{self.name}.img.json")
        with open(path, "w", encoding="utf-8") as f:
            json.dump(self.document(), f, indent=1)
            f.write("\n")
        print(f"wrote {path} ({len(self.instrs)} instructions)")


def counted():
    p = Prog("counted")
    p.label("start")
    p.emit("LDI", "sp", "0x8000")
    p.emit("LDI", "r0", 0)
    p.emit("LDI", "r1", 50)
    p.label("loop")
    p.emit("CMP", "r0", "r1")
    p.emit("BEQ", "done")
    p.emit("CALL", "targetFunc")
    p.emit("LDI", "r2", 1)
    p.emit("ADD", "r0", "r2")
    p.emit("JMP", "loop")
    p.label("done")
    p.emit("HALT")
    p.label("tf_entry")
    p.emit("NOP")
    p.label("endlocation")
    p.emit("RET")
    p.func("targetFunc", "tf_entry", ["endlocation"], "count.c", [9, 10])
    p.line("start", "count.c", 1)
    p.line("loop", "count.c", 3)
    p.line("done", "count.c", 7)
    p.line("tf_entry", "count.c", 9)
    p.line("endlocation", "count.c", 10)
    p.write()


def _push_imm(p, reg, value):
    p.emit("LDI", reg, value)
    p.emit("PUSH", reg)


def _printf_prog(name, trap_op):
    """Three printf invocations; `trap_op` is ICALL for the real image and
    NOP for the substitution twin used by the transparency check."""
    p = Prog(name)
    p.label("start")
    p.emit("LDI", "sp", "0x700")
    # printf("x=%d", 5) inlined
    _push_imm(p, "r5", 5)
    _push_imm(p, "r5", 0)
    _push_imm(p, "r5", "fmt_d")
    p.emit("LDI", "i", 1)
    p.emit(trap_op, *([0] if trap_op == "ICALL" else []))
    p.emit("POP", "r6")
    p.emit("POP", "r6")
    p.emit("POP", "r6")
    # printf("%s", str_ok) inlined
    _push_imm(p, "r5", "str_ok")
    _push_imm(p, "r5", 0)
    _push_imm(p, "r5", "fmt_s")
    p.emit("LDI", "i", 1)
    p.emit(trap_op, *([0] if trap_op == "ICALL" else []))
    p.emit("POP", "r6")
    p.emit("POP", "r6")
    p.emit("POP", "r6")
    # printf("n=%d", 7) through the __printf helper
    _push_imm(p, "r5", 7)
    _push_imm(p, "r5", 0)
    _push_imm(p, "r5", "fmt_n")
    p.emit("CALL", "__printf")
    p.emit("POP", "r6")
    p.emit("POP", "r6")
    p.emit("POP", "r6")
    p.emit("HALT")
    p.label("pf_entry")
    p.emit("POP", "r4")  # peel the return address so ymem[sp] is the format ptr
    p.emit("LDI", "i", 1)
    p.emit(trap_op, *([0] if trap_op == "ICALL" else []))
    p.emit("PUSH", "r4")
    p.label("pf_exit")
    p.emit("RET")
    p.func("__printf", "pf_entry", ["pf_exit"], "printf.c", [20, 24])
    p.sym("fmt_d", "data", 200)
    p.sym("fmt_s", "data", 210)
    p.sym("fmt_n", "data", 215)
    p.sym("str_ok", "data", 220)
    p.string(200, "x=%d")
    p.string(210, "%s")
    p.string(215, "n=%d")
    p.string(220, "ok")
    p.line("start", "printf.c", 1)
    p.line("pf_entry", "printf.c", 20)
    p.line("pf_exit", "printf.c", 24)
    p.write()


def ce_demo():
    p = Prog("cedemo")
    p.label("start")
    p.emit("LDI", "sp", "0x500")
    p.emit("LDI", "r0", 42)
    p.label("calc_entry")
    p.emit("PUSH", "r0")  # local cnt lives at [sp]
    p.label("calc_body")
    p.emit("NOP")
    p.label("calc_exit")
    p.emit("POP", "r0")
    p.emit("HALT")
    p.func("calc", "calc_entry", ["calc_exit"], "ce.c", [5, 9],
           locals_=["cnt"])
    p.symbols.append({"name": "cnt", "kind": "local_var", "address": 0,
                      "type": "int16"})
    p.sym("output", "global_var", 300, "int16")
    p.sym("head_of_list", "global_var", 301, "ptr")
    p.sym("arr", "global_var", 310, {"type": "array", "length": 5})
    p.sym("big", "global_var", 320, "int32")
    p.sym("msg", "global_var", 322, "ptr")
    p.word(300, 7)
    p.word(301, 0)
    for i, v in enumerate([1, 2, 9, 4, 5]):
        p.word(310 + i, v)
    p.word(320, 1)
    p.word(321, 2)
    p.word(322, 330)
    p.string(330, "ok")
    p.line("start", "ce.c", 1)
    p.line("calc_entry", "ce.c", 5)
    p.line("calc_body", "ce.c", 6)
    p.line("calc_exit", "ce.c", 9)
    p.line(5, "ce.c", 12)
    p.write()


def mailbox():
    p = Prog("mbox")
    p.label("start")
    p.emit("LDI", "sp", "0x7000")
    p.label("main_loop")
    # --- try to send ---
    p.emit("LD", "r0", "sentMsgs")
    p.emit("LD", "r1", "msgTotal")
    p.emit("CMP", "r0", "r1")
    p.emit("BEQ", "try_recv")
    p.emit("LD", "r0", "sendCount")
    p.emit("LDI", "r1", 0)
    p.emit("CMP", "r0", "r1")
    p.emit("BNE", "try_recv")  # previous message not drained yet
    p.emit("TAS", "sendLock")
    p.emit("BEQ", "do_fill")   # flag=1: lock acquired
    p.emit("JMP", "try_recv")
    p.label("do_fill")
    p.emit("LD", "r2", "sentMsgs")
    p.emit("MOV", "r3", "r2")
    p.emit("LDI", "r1", 7)
    p.emit("AND", "r3", "r1")
    p.emit("LDI", "r1", 1)
    p.emit("ADD", "r3", "r1")  # length = (m & 7) + 1
    p.emit("LD", "r5", "seedVal")
    p.emit("LDI", "r1", 37)
    p.emit("MOV", "r7", "r2")
    p.emit("MUL", "r7", "r1")
    p.emit("ADD", "r5", "r7")  # first word = seed + 37*m
    p.emit("LDI", "r6", 100)   # &sendBuffer
    p.emit("MOV", "r0", "r3")
    p.label("fill_loop")
    p.emit("ST", "(r6)", "r5")
    p.emit("LD", "r1", "sentSum")
    p.emit("ADD", "r1", "r5")
    p.emit("ST", "sentSum", "r1")
    p.emit("LDI", "r1", 11)
    p.emit("ADD", "r5", "r1")
    p.emit("LDI", "r1", 1)
    p.emit("ADD", "r6", "r1")
    p.emit("SUB", "r0", "r1")
    p.emit("LDI", "r1", 0)
    p.emit("CMP", "r0", "r1")
    p.emit("BNE", "fill_loop")
    p.emit("ST", "sendCount", "r3")
    p.emit("LD", "r0", "sentMsgs")
    p.emit("LDI", "r1", 1)
    p.emit("ADD", "r0", "r1")
    p.emit("ST", "sentMsgs", "r0")
    p.emit("LDI", "r0", 1)
    p.emit("ST", "sendLock", "r0")  # release
    p.label("try_recv")
    p.emit("LD", "r0", "recvCount")
    p.emit("LDI", "r1", 0)
    p.emit("CMP", "r0", "r1")
    p.emit("BEQ", "check_done")
    p.emit("TAS", "recvLock")
    p.emit("BEQ", "do_drain")
    p.emit("JMP", "check_done")
    p.label("do_drain")
    p.emit("LD", "r2", "recvCount")
    p.emit("LDI", "r6", 140)   # &recvBuffer
    p.emit("LD", "r5", "rcvSum")
    p.label("drain_loop")
    p.emit("LD", "r1", "(r6)")
    p.emit("ADD", "r5", "r1")
    p.emit("LDI", "r1", 1)
    p.emit("ADD", "r6", "r1")
    p.emit("SUB", "r2", "r1")
    p.emit("LDI", "r1", 0)
    p.emit("CMP", "r2", "r1")
    p.emit("BNE", "drain_loop")
    p.emit("ST", "rcvSum", "r5")
    p.emit("LD", "r0", "rcvdMsgs")
    p.emit("LDI", "r1", 1)
    p.emit("ADD", "r0", "r1")
    p.emit("ST", "rcvdMsgs", "r0")
    p.emit("LDI", "r0", 0)
    p.emit("ST", "recvCount", "r0")
    p.emit("LDI", "r0", 1)
    p.emit("ST", "recvLock", "r0")  # release
    p.label("check_done")
    p.emit("LD", "r0", "sentMsgs")
    p.emit("LD", "r1", "msgTotal")
    p.emit("CMP", "r0", "r1")
    p.emit("BNE", "main_loop")
    p.emit("LD", "r0", "rcvdMsgs")
    p.emit("CMP", "r0", "r1")
    p.emit("BNE", "main_loop")
    p.emit("LDI", "r0", 1)
    p.emit("ST", "doneFlag", "r0")
    p.emit("JMP", "main_loop")  # keep polling so the peer can finish

    p.sym("sendBuffer", "data", 100, {"type": "array", "length": 32})
    p.sym("recvBuffer", "data", 140, {"type": "array", "length": 32})
    p.sym("sendLock", "data", 180)
    p.sym("recvLock", "data", 181)
    p.sym("sendCount", "data", 182)
    p.sym("recvCount", "data", 183)
    p.sym("doneFlag", "data", 184)
    p.sym("seedVal", "data", 185)
    p.sym("sentMsgs", "data", 186)
    p.sym("rcvdMsgs", "data", 187)
    p.sym("rcvSum", "data", 188)
    p.sym("sentSum", "data", 189)
    p.sym("msgTotal", "data", 190)
    p.word(180, 1)
    p.word(181, 1)
    p.word(190, 100)
    p.line("start", "mbox.c", 1)
    p.line("main_loop", "mbox.c", 5)
    p.line("try_recv", "mbox.c", 30)
    p.line("check_done", "mbox.c", 50)
    p.write()


def pipeline():
    p = Prog("pipeline")
    p.label("start")
    p.label("loop")
    p.emit("LD", "r0", "inport")
    p.emit("LDI", "r1", 1)
    p.emit("ADD", "r0", "r1")
    p.emit("ST", "output", "r0")
    p.emit("JMP", "loop")
    p.sym("inport", "data", 400)
    p.sym("output", "data", 401)
    p.word(400, 0)
    p.word(401, 0)
    p.line("loop", "stage.c", 3)
    p.write()


def bploop():
    p = Prog("bploop")
    p.label("start")
    p.emit("NOP")
    p.label("loop")
    p.emit("NOP")
    p.emit("NOP")
    p.emit("JMP", "loop")
    p.line("start", "bploop.c", 1)
    p.line("loop", "bploop.c", 2)
    p.write()


def looper():
    p = Prog("looper")
    p.label("start")
    p.emit("LDI", "r0", "0x4000")
    p.emit("LDI", "r1", 1)
    p.emit("LDI", "r2", 0)
    p.label("loop")
    p.emit("SUB", "r0", "r1")
    p.emit("CMP", "r0", "r2")
    p.emit("BNE", "loop")
    p.emit("HALT")
    p.write()


def cycle_images():
    # MUL leads: a 100-cycle window lands exactly on a NOP boundary
    p = Prog("cycles_a")
    p.label("start")
    p.emit("MUL", "r0", "r1")
    for _ in range(199):
        p.emit("NOP")
    p.emit("JMP", "start")
    p.write()
    # MUL at the 99th cycle: a 100-cycle window straddles it (99 -> 101)
    p = Prog("cycles_b")
    p.label("start")
    for _ in range(99):
        p.emit("NOP")
    p.emit("MUL", "r0", "r1")
    for _ in range(100):
        p.emit("NOP")
    p.emit("JMP", "start")
    p.write()


def ioport():
    p = Prog("ioport")
    p.label("start")
    p.emit("IN", "r0", "pio1")
    p.emit("OUT", "pio0", "r0")
    p.emit("IN", "r1", "pio1")
    p.emit("OUT", "pio0", "r1")
    p.emit("HALT")
    p.write()


def main():
    os.makedirs(OUT_DIR, exist_ok=True)
    counted()
    _printf_prog("printf", "ICALL")
    _printf_prog("printf_nop", "NOP")
    ce_demo()
    mailbox()
    pipeline()
    bploop()
    looper()
    cycle_images()
    ioport()


if __name__ == "__main__":
    main()