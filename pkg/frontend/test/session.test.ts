// Session behavior against the scripted mock service.

import { describe, expect, it } from "vitest";

import {
  parseBracedList,
  parseBreakpointRows,
  parseMessage,
  parseRegisterTuples,
} from "../src/protocol.js";
import { UiSession } from "../src/session.js";
import { MockService, until } from "./mock.js";

async function boot(): Promise<{ session: UiSession; mock: MockService }> {
  const mock = new MockService();
  const session = new UiSession();
  await session.attach(mock);
  return { session, mock };
}

describe("protocol parsing", () => {
  it("parses responses and events", () => {
    expect(parseMessage('{"id":1,"ok":true,"result":"p1"}')).toEqual({
      id: 1, ok: true, result: "p1",
    });
    const ev = parseMessage('{"event":"stopped","processor":"p1","reason":"halt","pc":3}');
    expect(ev && "event" in ev && ev.event).toBe("stopped");
    expect(parseMessage("not json")).toBeNull();
  });

  it("parses braced lists with nesting", () => {
    expect(parseBracedList("{a b} c {d {e f}}")).toEqual(["a b", "c", "d {e f}"]);
    expect(parseBracedList("")).toEqual([]);
  });

  it("parses register tuples", () => {
    const regs = parseRegisterTuples("{pc 10 u 20} {a0 -1 s 32}");
    expect(regs).toEqual([
      { name: "pc", value: 10, sign: "u", width: 20 },
      { name: "a0", value: -1, sign: "s", width: 32 },
    ]);
  });

  it("parses breakpoint rows", () => {
    const rows = parseBreakpointRows("{1 p1 {in targetFunc} exec 1} {2 p1 0x5 write 0}");
    expect(rows[0]).toEqual({
      id: 1, instance: "p1", location: "in targetFunc", access: "exec", enabled: true,
    });
    expect(rows[1].enabled).toBe(false);
  });
});

describe("session panels", () => {
  it("boots from service queries only", async () => {
    const { session } = await boot();
    expect(session.state.connection).toBe("connected");
    expect(session.state.processors.map((p) => p.name)).toEqual(["p1"]);
    expect(session.state.selected).toBe("p1");
    expect(session.state.registers.find((r) => r.name === "pc")?.value).toBe(0);
    expect(session.state.memory.words).toHaveLength(64);
    expect(session.state.stale).toBe(false);
  });

  it("console stepi updates the pc cell to the service-reported value", async () => {
    const { session, mock } = await boot();
    await session.console("p1 stepi");
    // the refresh after the response re-queried ? R; the cell shows the
    // service's pc, not a client-side increment
    expect(mock.target.pc).toBe(1);
    const cell = session.state.registers.find((r) => r.name === "pc");
    expect(cell?.value).toBe(1);
    expect(session.state.processors[0].pc).toBe(1);
  });

  it("a breakpoint added in the panel appears in a later console query", async () => {
    const { session } = await boot();
    const r = await session.addBreakpoint("p1", "in targetFunc", "exec", "setCount");
    expect(r.ok).toBe(true);
    expect(session.state.breakpoints).toHaveLength(1);
    expect(session.state.breakpoints[0].location).toContain("in targetFunc");
    const reply = await session.console("query");
    expect(reply.result).toContain("in targetFunc");
    const echoed = session.state.transcript.filter((t) => t.kind === "result").pop();
    expect(echoed?.text).toContain("in targetFunc");
  });

  it("a stopped broadcast flips the run-state chip", async () => {
    const { session, mock } = await boot();
    await session.runControl("resume_bg", "p1");
    expect(session.state.processors[0].runState).toBe("running");
    mock.target.pc = 7; // the service stopped the core here
    mock.emit({ event: "stopped", processor: "p1", reason: "breakpoint", bp: 1, pc: 7 });
    await until(() => session.state.processors[0].runState === "stopped");
    await until(() => session.state.processors[0].pc === 7);
    // halt reason maps to the halted chip
    mock.target.pc = 9;
    mock.emit({ event: "stopped", processor: "p1", reason: "halt", pc: 9 });
    await until(() => session.state.processors[0].runState === "halted");
  });

  it("marks panels stale on stop until the refresh lands", async () => {
    const { session, mock } = await boot();
    const staleSamples: boolean[] = [];
    session.onChange(() => staleSamples.push(session.state.stale));
    mock.target.pc = 2;
    mock.emit({ event: "stopped", processor: "p1", reason: "breakpoint", bp: 1, pc: 2 });
    await until(() => staleSamples.includes(true));
    await until(() => session.state.stale === false);
    // stale was raised by the stop and cleared by the refresh that followed
    expect(staleSamples[staleSamples.length - 1]).toBe(false);
    expect(session.state.registers.find((r) => r.name === "pc")?.value).toBe(2);
  });

  it("clear and toggle go through the service", async () => {
    const { session, mock } = await boot();
    await session.addBreakpoint("p1", "0x5", "exec", "");
    await session.toggleBreakpoint(1, false);
    expect(session.state.breakpoints[0].enabled).toBe(false);
    await session.clearBreakpoint(1);
    expect(session.state.breakpoints).toHaveLength(0);
    expect(mock.requests).toContain("disable 1");
    expect(mock.requests).toContain("clear 1");
  });

  it("errors land in the transcript", async () => {
    const { session } = await boot();
    await session.console("frobnicate");
    const last = session.state.transcript[session.state.transcript.length - 1];
    expect(last.kind).toBe("error");
    expect(last.text).toContain("invalid command name");
  });

  it("output events append to the transcript in order", async () => {
    const { session, mock } = await boot();
    mock.emit({ event: "output", text: "x=5" });
    mock.emit({ event: "output", text: "ok" });
    await until(() => session.state.transcript.filter((t) => t.kind === "output").length === 2);
    const outputs = session.state.transcript.filter((t) => t.kind === "output");
    expect(outputs.map((o) => o.text)).toEqual(["x=5", "ok"]);
    expect(session.state.events).toHaveLength(2);
  });
});

describe("no invented state", () => {
  it("disconnect freezes panels; reconnect equals fresh-query state", async () => {
    const { session, mock } = await boot();
    await session.console("p1 stepi");
    mock.close();
    expect(session.state.connection).toBe("disconnected");
    expect(session.state.stale).toBe(true);
    const frozenPc = session.state.registers.find((r) => r.name === "pc")?.value;
    expect(frozenPc).toBe(1); // frozen, not zeroed or simulated

    // reconnect to an identical service: state must equal a fresh session's
    const mock2 = new MockService();
    mock2.target.pc = 1;
    await session.attach(mock2);

    const fresh = new UiSession();
    const mock3 = new MockService();
    mock3.target.pc = 1;
    await fresh.attach(mock3);

    expect(session.state.processors).toEqual(fresh.state.processors);
    expect(session.state.registers).toEqual(fresh.state.registers);
    expect(session.state.memory).toEqual(fresh.state.memory);
    expect(session.state.breakpoints).toEqual(fresh.state.breakpoints);
    expect(session.state.stale).toBe(false);
  });

  it("eval while disconnected fails fast", async () => {
    const session = new UiSession();
    const r = await session.eval("set x 1");
    expect(r.ok).toBe(false);
    expect(r.error).toBe("disconnected");
  });
});
