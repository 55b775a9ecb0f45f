"""Shipped script library: schedulers, mailbox, printf, cycle windows."""

import pytest

from luxdbg.errors import ScriptError


def source_lib(dbg, lib_path, *names):
    for n in names:
        dbg.eval(f"source {lib_path(n)}")


# ---------------------------------------------------------------------------
# setCount suite

@pytest.fixture
def counted(dbg, image_path):
    dbg.eval("processor new lx16i p1 sim")
    dbg.eval(f"p1 load {image_path('counted')}")
    return dbg


def test_setcount_plain_fifty(counted):
    dbg = counted
    dbg.eval("set setCounter 0")
    dbg.eval("proc setCount args { global setCounter; incr setCounter; resume }")
    dbg.eval("p1 stop in targetFunc setCount")
    dbg.eval("p1 resume")
    assert dbg.eval("set setCounter") == "50"


def test_setcount_conditional_breaks_on_42(counted):
    dbg = counted
    dbg.eval("set setCounter 0")
    dbg.eval("proc setCount args { global setCounter; incr setCounter; "
             "if {$setCounter < 42} resume }")
    dbg.eval("p1 stop in targetFunc setCount")
    r = dbg.eval("p1 resume")
    assert dbg.eval("set setCounter") == "42"
    entry = int(dbg.eval("p1 fxpr targetFunc"))
    assert int(dbg.eval("p1 pc")) == entry
    assert "breakpoint" in r


def test_setcount_sampling_multiples_of_ten(counted):
    dbg = counted
    dbg.eval("set setCounter 0")
    dbg.eval("proc setCount args { global setCounter; incr setCounter; "
             "if {($setCounter % 10) != 0} resume }")
    dbg.eval("p1 stop in targetFunc setCount")
    seen = []
    r = dbg.eval("p1 resume")
    while "breakpoint" in r:
        seen.append(int(dbg.eval("set setCounter")))
        r = dbg.eval("p1 resume")
    assert seen == [10, 20, 30, 40, 50]


# ---------------------------------------------------------------------------
# log suite

def test_log_registers_target_neutral(dbg, lib_path):
    source_lib(dbg, lib_path, "log")
    dbg.eval("processor new lx16i dsp5 sim")
    dbg.eval("processor new lx16f controller2 sim")
    dbg.eval("dsp5 logAll")
    first = dbg.text()
    assert first.splitlines()[0] == "reg: pc width 20"
    assert "mem: pmem size 65536 width 16" in first
    dbg.stdout.clear()
    dbg.eval("controller2 logAll")
    assert dbg.text().splitlines()[0] == "reg: pc width 20"


def test_log_hidden_gate(dbg, lib_path):
    source_lib(dbg, lib_path, "log")
    dbg.eval("processor new lx16i p1 sim")
    dbg.eval("p1 logRegisters")
    assert "cycles" not in dbg.text()
    dbg.stdout.clear()
    dbg.eval("p1 configure -hiddenregisters on")
    dbg.eval("p1 logRegisters")
    assert "reg: cycles width 32" in dbg.text()


# ---------------------------------------------------------------------------
# schedulers

def rr_setup(dbg, lib_path, image_path, cores=("s1", "s2", "s3")):
    source_lib(dbg, lib_path, "sched")
    dbg.eval("set order {}")
    dbg.eval('proc recStop args { global order; set order "$order [processor name]" }')
    for p in cores:
        dbg.eval(f"processor new lx16i {p} sim")
        dbg.eval(f"{p} load {image_path('bploop')}")
        dbg.eval(f"{p} stop loop recStop")


def test_scheduler_rr_order_and_fairness(dbg, lib_path, image_path):
    rr_setup(dbg, lib_path, image_path)
    dbg.eval("scheduler_rr {s1 s2 s3} 5")
    order = dbg.eval("set order").split()
    assert order == ["s1", "s2", "s3"] * 5
    # resume counts per processor are exactly N
    assert all(order.count(p) == 5 for p in ("s1", "s2", "s3"))


def test_scheduler_rr_zero_passes(dbg, lib_path, image_path):
    rr_setup(dbg, lib_path, image_path)
    dbg.eval("scheduler_rr {s1 s2 s3} 0")
    assert dbg.eval("set order") == ""


def test_scheduler_rr_step_variant(dbg, lib_path, image_path):
    # uncooperative targets: no breakpoints at all, bounded stepping only
    source_lib(dbg, lib_path, "sched")
    for p in ("u1", "u2"):
        dbg.eval(f"processor new lx16i {p} sim")
        dbg.eval(f"{p} load {image_path('bploop')}")
    dbg.eval("scheduler_rr_step {u1 u2} 3 4")
    for p in ("u1", "u2"):
        dbg.eval(f"{p} configure -hiddenregisters on")
        assert int(dbg.eval(f"{p} cycles")) == 12


def pipeline_setup(dbg, lib_path, image_path, stages=("e1", "e2", "e3")):
    source_lib(dbg, lib_path, "sched")
    for p in stages:
        dbg.eval(f"processor new lx16i {p} sim")
        dbg.eval(f"{p} load {image_path('pipeline')}")
        dbg.eval(f"{p} stop output -write output_callback")
    for a, b in zip(stages, stages[1:]):
        dbg.eval(f"set neighbor({a}) {b}")
    dbg.eval(f"set neighbor({stages[-1]}) {{}}")


def test_scheduler_event_pipeline(dbg, lib_path, image_path):
    pipeline_setup(dbg, lib_path, image_path)
    dbg.eval("e1 fxpr inport = 7")
    dbg.eval("scheduler_event e1")
    assert dbg.eval("e3 fxpr output") == "10"  # 7 +1 +1 +1
    assert dbg.eval("set nextproc") == ""      # terminated on the blank slot
    assert dbg.eval("e2 fxpr inport") == "8"
    assert dbg.eval("e3 fxpr inport") == "9"


# ---------------------------------------------------------------------------
# advance family and cycle windows

@pytest.fixture
def emu_pair(dbg, lib_path, image_path):
    source_lib(dbg, lib_path, "mailbox")
    for p in ("h1", "h2"):
        dbg.eval(f"processor new lx16i {p} emu")
        dbg.eval(f"{p} load {image_path('cycles_a')}")
        dbg.eval(f"{p} initCycleRegs")
    return dbg


def cycles_of(dbg, p):
    dbg.eval(f"{p} configure -hiddenregisters on")
    v = int(dbg.eval(f"{p} cycles"))
    dbg.eval(f"{p} configure -hiddenregisters off")
    return v


def test_advance_sim_default_count(dbg, lib_path, image_path):
    source_lib(dbg, lib_path, "mailbox")
    for p in ("a1", "a2"):
        dbg.eval(f"processor new lx16i {p} sim")
        dbg.eval(f"{p} load {image_path('bploop')}")
    dbg.eval("advanceSim a1 a2")
    assert dbg.eval("a1 pc") == "1"
    assert dbg.eval("a2 pc") == "1"


def test_advance_sim_interleaves_one_to_one(dbg, lib_path, image_path):
    source_lib(dbg, lib_path, "mailbox")
    for p in ("a1", "a2"):
        dbg.eval(f"processor new lx16i {p} sim")
        dbg.eval(f"{p} load {image_path('bploop')}")
    dbg.eval("advanceSim a1 a2 10")
    assert cycles_of(dbg, "a1") == 10
    assert cycles_of(dbg, "a2") == 10


def test_run_processor_for_cycles_exact(emu_pair):
    dbg = emu_pair
    dbg.eval("h1 stepi 3")  # MUL+NOP+NOP: 4 cycles elapsed, MUL now behind
    before = cycles_of(dbg, "h1")
    assert before == 4
    dbg.eval("h1 runProcessorForCycles 100")
    assert cycles_of(dbg, "h1") == before + 100
    assert not dbg.core("h1").hidden_visible  # expired restored the gate
    assert dbg.core("h1").values["cyclec"] & 4 == 0


def test_run_processor_for_cycles_straddle(dbg, lib_path, image_path):
    source_lib(dbg, lib_path, "mailbox")
    dbg.eval("processor new lx16i hb emu")
    dbg.eval(f"hb load {image_path('cycles_b')}")
    dbg.eval("hb initCycleRegs")
    dbg.eval("hb runProcessorForCycles 100")
    assert cycles_of(dbg, "hb") == 101  # the 2-cycle MUL completes first


def test_run_processor_for_cycles_random_windows(dbg, lib_path, image_path):
    import random

    source_lib(dbg, lib_path, "mailbox")
    dbg.eval("processor new lx16i hr emu")
    dbg.eval(f"hr load {image_path('cycles_a')}")
    dbg.eval("hr initCycleRegs")
    rng = random.Random(42)
    for _ in range(50):
        docycles = rng.randrange(1, 400)
        core = dbg.core("hr")
        before = core.values["cycles"]
        pc_before = core.pc
        dbg.eval(f"hr runProcessorForCycles {docycles}")
        executed = trace_cycles(core, pc_before, docycles)
        after = core.values["cycles"]
        assert (after - before) & 0xFFFFFFFF == executed, docycles


def trace_cycles(core, start_pc, window):
    """Oracle: walk the instruction stream from start_pc, summing table costs
    until the window is covered, completing the straddling instruction."""
    total = 0
    pc = start_pc
    while total < window:
        instr = core.pmem.contents[pc]
        total += instr.cost
        pc = 0 if instr.mnemonic == "JMP" else pc + 1
    return total


def test_expired_ignores_foreign_handles(dbg, lib_path, image_path):
    source_lib(dbg, lib_path, "mailbox")
    dbg.eval("processor new lx16i hf emu")
    dbg.eval(f"hf load {image_path('cycles_a')}")
    dbg.eval("hf initCycleRegs")
    dbg.eval("hf configure -hiddenregisters on")
    # a 5067 exception whose text carries a different handle
    dbg.core("hf").post_exception(5067, "error", "unhandled breakpoint handle 777")
    dbg.eval("hf except 5067 expired")
    dbg.eval("hf stepi 1")
    # guard skipped the restore: hidden stays on, cyclec untouched
    assert dbg.core("hf").hidden_visible


def test_advance_selects_path(dbg, lib_path, image_path):
    source_lib(dbg, lib_path, "mailbox")
    for p in ("m1", "m2"):
        dbg.eval(f"processor new lx16i {p} sim")
        dbg.eval(f"{p} load {image_path('mbox')}")
    dbg.eval("advance m1 m2 5")           # isSim default 1
    assert cycles_of(dbg, "m1") == 5
    dbg.eval("processor new lx16i m3 emu")
    dbg.eval("processor new lx16i m4 emu")
    dbg.eval(f"m3 load {image_path('mbox')}")
    dbg.eval(f"m4 load {image_path('mbox')}")
    dbg.eval("m3 initCycleRegs")
    dbg.eval("m4 initCycleRegs")
    dbg.eval("advance m3 m4 50 0")        # hardware path
    assert cycles_of(dbg, "m3") in (50, 51)  # a MUL may straddle the window


# ---------------------------------------------------------------------------
# pollMailbox

@pytest.fixture
def mailbox_pair(dbg, lib_path, image_path):
    source_lib(dbg, lib_path, "mailbox")
    for p in ("ma", "mb"):
        dbg.eval(f"processor new lx16i {p} sim")
        dbg.eval(f"{p} load {image_path('mbox')}")
    return dbg


def set_guards(dbg, send_lock, send_count, recv_lock, recv_count):
    a, b = dbg.core("ma"), dbg.core("mb")
    a.ymem.contents[180] = send_lock
    a.ymem.contents[182] = send_count
    b.ymem.contents[181] = recv_lock
    b.ymem.contents[183] = recv_count


def test_poll_guard_truth_table(mailbox_pair):
    dbg = mailbox_pair
    sender = dbg.core("ma")
    receiver = dbg.core("mb")
    for i in range(16):
        send_lock = 1 if i & 1 else 0
        send_count = 3 if i & 2 else 0
        recv_lock = 1 if i & 4 else 0
        recv_count = 0 if i & 8 else 2
        set_guards(dbg, send_lock, send_count, recv_lock, recv_count)
        sender.ymem.contents[100:103] = [5, 6, 7]
        receiver.ymem.contents[140:143] = [0, 0, 0]
        dbg.eval("pollMailbox ma mb")
        should_transfer = (send_lock != 0 and send_count > 0
                           and recv_lock != 0 and recv_count == 0)
        transferred = sender.ymem.contents[182] == 0 and send_count > 0
        if should_transfer:
            assert transferred, i
            assert receiver.ymem.contents[140:143] == [5, 6, 7]
            assert receiver.ymem.contents[183] == 3
        else:
            assert sender.ymem.contents[182] == send_count, i
            assert receiver.ymem.contents[183] == recv_count, i


def test_poll_copies_exact_words(mailbox_pair):
    dbg = mailbox_pair
    sender, receiver = dbg.core("ma"), dbg.core("mb")
    payload = [101, 202, 303, 404]
    sender.ymem.contents[100:104] = payload
    set_guards(dbg, 1, 4, 1, 0)
    dbg.eval("pollMailbox ma mb")
    assert receiver.ymem.contents[140:144] == payload
    assert sender.ymem.contents[182] == 0
    assert receiver.ymem.contents[183] == 4


def test_full_exchange_conservation_and_delivery(mailbox_pair):
    dbg = mailbox_pair
    a, b = dbg.core("ma"), dbg.core("mb")
    dbg.eval("ma fxpr *seedVal = 1000")
    dbg.eval("mb fxpr *seedVal = 2000")
    dbg.eval("ma fxpr *msgTotal = 12")
    dbg.eval("mb fxpr *msgTotal = 12")

    # the target publishes a message by storing a nonzero sendCount, and only
    # pollMailbox ever zeroes it, so publications are observable at poll time
    published = {id(a): 0, id(b): 0}
    delivered = {id(a): 0, id(b): 0}
    last_in_flight = {id(a): 0, id(b): 0}

    def poll_checked(sender, receiver, s, r):
        count = sender.ymem.contents[182]
        if last_in_flight[id(sender)] == 0 and count > 0:
            published[id(sender)] += count
        snap = list(sender.ymem.contents[100:132])
        dbg.eval(f"pollMailbox {s} {r}")
        after = sender.ymem.contents[182]
        if count and after == 0:  # transfer happened
            assert receiver.ymem.contents[140:140 + count] == snap[:count]
            delivered[id(sender)] += count
        last_in_flight[id(sender)] = after
        # conservation at every poll: published == delivered + in flight
        assert delivered[id(sender)] + after == published[id(sender)]

    for _ in range(400):
        dbg.eval("advanceSim ma mb 40")
        poll_checked(a, b, "ma", "mb")
        poll_checked(b, a, "mb", "ma")
        if a.ymem.contents[184] and b.ymem.contents[184]:
            break
    assert a.ymem.contents[186] == 12 and b.ymem.contents[187] == 12
    total = sum((m % 8) + 1 for m in range(12))
    assert delivered[id(a)] == published[id(a)] == total
    assert delivered[id(b)] == published[id(b)] == total
    assert a.ymem.contents[189] == b.ymem.contents[188]  # sums match a->b
    assert b.ymem.contents[189] == a.ymem.contents[188]


# ---------------------------------------------------------------------------
# handle_printf

@pytest.fixture
def printf_core(dbg, lib_path, image_path):
    source_lib(dbg, lib_path, "printf")
    dbg.eval("processor new lx16i pf sim")
    dbg.eval(f"pf load {image_path('printf')}")
    dbg.eval("pf initPrintf")
    return dbg


def test_printf_formats_and_length(printf_core):
    dbg = printf_core
    r = dbg.eval("pf resume")
    assert "halt" in r
    assert dbg.text() == "x=5okn=7"
    assert dbg.eval("pf a0") == "3"  # length of the last output, "n=7"


def test_printf_transparency(printf_core, image_path):
    dbg = printf_core
    dbg.eval("pf resume")
    dbg.eval("processor new lx16i pn sim")
    dbg.eval(f"pn load {image_path('printf_nop')}")
    dbg.eval("pn resume")
    a, b = dbg.core("pf"), dbg.core("pn")
    reg_diff = [n for n in a.registers if a.values[n] != b.values[n]]
    assert reg_diff == ["a0"]
    assert a.ymem.contents == b.ymem.contents


def test_printf_literal_only(dbg, lib_path, tmp_path):
    source_lib(dbg, lib_path, "printf")
    write_printf_image(tmp_path, "lit", "hello", [])
    dbg.eval("processor new lx16i pl sim")
    dbg.eval(f"pl load {tmp_path / 'lit.img.json'}")
    dbg.eval("pl initPrintf")
    dbg.eval("pl resume")
    assert dbg.text() == "hello"
    assert dbg.eval("pl a0") == "5"


def test_printf_string_argument(dbg, lib_path, tmp_path):
    source_lib(dbg, lib_path, "printf")
    write_printf_image(tmp_path, "strarg", "say %s!", [("str", "hi there")])
    dbg.eval("processor new lx16i ps sim")
    dbg.eval(f"ps load {tmp_path / 'strarg.img.json'}")
    dbg.eval("ps initPrintf")
    dbg.eval("ps resume")
    assert dbg.text() == "say hi there!"
    assert dbg.eval("ps a0") == str(len("say hi there!"))


def test_printf_malformed_breaks_with_minus_one(dbg, lib_path, tmp_path):
    source_lib(dbg, lib_path, "printf")
    write_printf_image(tmp_path, "bad", "oops %q", [("int", 1)])
    dbg.eval("processor new lx16i pb sim")
    dbg.eval(f"pb load {tmp_path / 'bad.img.json'}")
    dbg.eval("pb initPrintf")
    r = dbg.eval("pb resume")
    assert "syscall" in r          # broke back to the command path
    assert dbg.eval("pb a0") == "-1"
    assert dbg.text() == ""


def write_printf_image(tmp_path, name, fmt, args):
    """One trap invocation with the stated format and args."""
    import json

    fmt_addr = 300
    str_addrs = []
    ymem = [{"addr": fmt_addr, "string": fmt}]
    next_addr = fmt_addr + len(fmt) + 1
    arg_words = []
    for kind, val in args:
        if kind == "int":
            arg_words.append(val)
        else:
            ymem.append({"addr": next_addr, "string": val})
            arg_words.append(next_addr)
            next_addr += len(val) + 1
    instrs = [("LDI", "sp", 0x200)]
    for w in reversed(arg_words):
        instrs += [("LDI", "r5", w), ("PUSH", "r5")]
    instrs += [("LDI", "r5", 0), ("PUSH", "r5")]
    instrs += [("LDI", "r5", fmt_addr), ("PUSH", "r5")]
    instrs += [("LDI", "i", 1), ("ICALL", 0), ("HALT",)]
    doc = {
        "name": name,
        "pmem": [{"addr": i, "op": op, "args": list(a)} for i, (op, *a) in enumerate(instrs)],
        "ymem": ymem,
        "symbols": [{"name": "start", "kind": "label", "address": 0}],
    }
    (tmp_path / f"{name}.img.json").write_text(json.dumps(doc))