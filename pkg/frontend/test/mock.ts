// A scripted stand-in for the debugger service: answers the same wire
// protocol the session speaks, from a tiny table-driven target model.

import { Transport } from "../src/transport.js";

export interface MockTarget {
  pc: number;
  registers: Array<[string, number, string, number]>;
  breakpoints: Array<{ id: number; loc: string; access: string; enabled: boolean }>;
}

export class MockService implements Transport {
  target: MockTarget = {
    pc: 0,
    registers: [
      ["pc", 0, "u", 20],
      ["sp", 0, "u", 16],
      ["r0", 0, "u", 16],
    ],
    breakpoints: [],
  };
  requests: string[] = [];
  private nextBp = 0;
  private messageHandler: (line: string) => void = () => {};
  private closeHandler: () => void = () => {};
  closed = false;

  send(line: string): void {
    const req = JSON.parse(line) as { id: number; op: string; cmd: string };
    this.requests.push(req.cmd);
    const reply = this.evalCmd(req.cmd);
    queueMicrotask(() =>
      this.messageHandler(JSON.stringify({ id: req.id, ...reply })),
    );
  }

  private renderRegisters(): string {
    this.target.registers[0][1] = this.target.pc;
    return this.target.registers
      .map(([n, v, s, w]) => `{${n} ${v} ${s} ${w}}`)
      .join(" ");
  }

  private evalCmd(cmd: string): { ok: boolean; result?: string; error?: string } {
    const t = this.target;
    if (cmd === "processor list") return { ok: true, result: "p1" };
    if (cmd === "p1 pc") return { ok: true, result: String(t.pc) };
    if (cmd === "p1 ? R") return { ok: true, result: this.renderRegisters() };
    if (cmd === "p1 stepi") {
      t.pc += 1;
      return { ok: true, result: "" };
    }
    if (cmd === "query") {
      const rows = t.breakpoints.map(
        (b) => `{${b.id} p1 {${b.loc}} ${b.access} ${b.enabled ? 1 : 0}}`,
      );
      return { ok: true, result: rows.join(" ") };
    }
    if (cmd.startsWith("p1 stop ")) {
      const spec = cmd.slice("p1 stop ".length);
      this.nextBp += 1;
      const access = spec.includes("-write") ? "write"
        : spec.includes("-read") ? "read" : "exec";
      const loc = spec.replace(/-(read|write)/, "").trim().split(/\s+/).slice(0, 2).join(" ");
      this.target.breakpoints.push({ id: this.nextBp, loc, access, enabled: true });
      return { ok: true, result: String(this.nextBp) };
    }
    if (cmd.startsWith("clear ")) {
      const id = Number(cmd.split(/\s+/)[1]);
      t.breakpoints = t.breakpoints.filter((b) => b.id !== id);
      return { ok: true, result: "" };
    }
    if (cmd.startsWith("enable ") || cmd.startsWith("disable ")) {
      const [verb, idText] = cmd.split(/\s+/);
      const bp = t.breakpoints.find((b) => b.id === Number(idText));
      if (bp) bp.enabled = verb === "enable";
      return { ok: true, result: "" };
    }
    if (cmd.startsWith("set __uiw")) {
      // memory-window collection script
      return { ok: true, result: Array(64).fill("0").join(" ") };
    }
    if (cmd === "p1 resume &") return { ok: true, result: "" };
    if (cmd === "p1 resume") {
      return { ok: true, result: `stopped p1 pc=${t.pc} breakpoint 1` };
    }
    return { ok: false, error: `invalid command name "${cmd.split(/\s+/)[0]}"` };
  }

  emit(event: Record<string, unknown>): void {
    queueMicrotask(() => this.messageHandler(JSON.stringify(event)));
  }

  onMessage(handler: (line: string) => void): void {
    this.messageHandler = handler;
  }

  onClose(handler: () => void): void {
    this.closeHandler = handler;
  }

  close(): void {
    this.closed = true;
    this.closeHandler();
  }
}

export async function until(cond: () => boolean, ms = 2000): Promise<void> {
  const start = Date.now();
  while (!cond()) {
    if (Date.now() - start > ms) throw new Error("condition never became true");
    await new Promise((r) => setTimeout(r, 5));
  }
}
