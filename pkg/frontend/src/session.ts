// Debug-session state for the front panel. Every displayed value originates
// from a service response or broadcast event: the session issues eval
// commands over the wire, parses the reply text, and never simulates target
// state on its own. Panels are marked stale from the moment a stop event
// arrives until the follow-up queries land.

import {
  BreakpointRow,
  EvalRequest,
  RegisterTuple,
  WireResponse,
  isEvent,
  parseBreakpointRows,
  parseBracedList,
  parseMessage,
  parseRegisterTuples,
} from "./protocol.js";
import { Transport } from "./transport.js";

export type ConnectionState = "disconnected" | "connected";
export type RunState = "stopped" | "running" | "halted";

export interface ProcessorRow {
  name: string;
  runState: RunState;
  lastReason: string;
  pc: number | null;
}

export interface TranscriptEntry {
  kind: "command" | "result" | "error" | "event" | "output";
  text: string;
}

export interface MemoryWindow {
  space: string;
  base: number;
  words: number[];
}

export interface UiState {
  connection: ConnectionState;
  processors: ProcessorRow[];
  selected: string | null;
  registers: RegisterTuple[];
  memory: MemoryWindow;
  breakpoints: BreakpointRow[];
  transcript: TranscriptEntry[];
  events: string[];
  stale: boolean;
}

export const MEMORY_WINDOW_WORDS = 64;

function freshState(): UiState {
  return {
    connection: "disconnected",
    processors: [],
    selected: null,
    registers: [],
    memory: { space: "ymem", base: 0, words: [] },
    breakpoints: [],
    transcript: [],
    events: [],
    stale: false,
  };
}

export class UiSession {
  readonly state: UiState = freshState();

  private transport: Transport | null = null;
  private seq = 0;
  private pending = new Map<number, (r: WireResponse) => void>();
  private changeHandlers: Array<() => void> = [];

  onChange(handler: () => void): void {
    this.changeHandlers.push(handler);
  }

  private changed(): void {
    for (const h of this.changeHandlers) h();
  }

  // -- connection lifecycle

  async attach(transport: Transport): Promise<void> {
    this.transport = transport;
    transport.onMessage((line) => this.handleLine(line));
    transport.onClose(() => this.handleClose());
    this.state.connection = "connected";
    this.changed();
    await this.refresh(); // reconnect state must equal fresh-query state
  }

  private handleClose(): void {
    // freeze all panels: nothing changes until a reconnect re-queries
    this.state.connection = "disconnected";
    this.state.stale = true;
    for (const [, resolve] of this.pending) {
      resolve({ id: null, ok: false, error: "disconnected" });
    }
    this.pending.clear();
    this.transport = null;
    this.changed();
  }

  private handleLine(line: string): void {
    const msg = parseMessage(line);
    if (msg === null) return;
    if (isEvent(msg)) {
      this.state.events.push(line);
      if (msg.event === "output") {
        this.state.transcript.push({ kind: "output", text: msg.text });
      } else if (msg.event === "stopped") {
        this.state.transcript.push({
          kind: "event",
          text: `stopped ${msg.processor} pc=${msg.pc} ${msg.reason}`,
        });
        this.applyStop(msg.processor, msg.reason, msg.pc);
      }
      this.changed();
      return;
    }
    const resolve = typeof msg.id === "number" ? this.pending.get(msg.id) : undefined;
    if (resolve) {
      this.pending.delete(msg.id as number);
      resolve(msg);
    }
  }

  private applyStop(processor: string, reason: string, pc: number): void {
    const row = this.state.processors.find((p) => p.name === processor);
    if (row) {
      row.runState = reason === "halt" ? "halted" : "stopped";
      row.lastReason = reason;
      row.pc = pc;
    }
    // panels are stale until the refresh triggered by this stop completes
    this.state.stale = true;
    this.changed();
    void this.refresh();
  }

  // -- request plumbing

  eval(cmd: string): Promise<WireResponse> {
    if (this.transport === null) {
      return Promise.resolve({ id: null, ok: false, error: "disconnected" });
    }
    this.seq += 1;
    const request: EvalRequest = { id: this.seq, op: "eval", cmd };
    return new Promise((resolve) => {
      this.pending.set(request.id, resolve);
      this.transport!.send(JSON.stringify(request));
    });
  }

  // -- console

  async console(cmd: string): Promise<WireResponse> {
    this.state.transcript.push({ kind: "command", text: cmd });
    this.changed();
    const response = await this.eval(cmd);
    if (response.ok) {
      if (response.result) {
        this.state.transcript.push({ kind: "result", text: response.result });
      }
    } else {
      this.state.transcript.push({
        kind: "error",
        text: `Error: ${response.error ?? "unknown"}`,
      });
    }
    this.changed();
    await this.refresh(); // any command may have moved the target
    return response;
  }

  // -- refresh: re-derive every panel from service queries

  async refresh(): Promise<void> {
    if (this.transport === null) return;
    await this.refreshProcessors();
    await this.refreshBreakpoints();
    if (this.state.selected !== null) {
      await this.refreshRegisters(this.state.selected);
      await this.refreshMemory(this.state.selected);
    }
    this.state.stale = false;
    this.changed();
  }

  async refreshProcessors(): Promise<void> {
    const r = await this.eval("processor list");
    if (!r.ok) return;
    const names = parseBracedList(r.result ?? "");
    const known = new Map(this.state.processors.map((p) => [p.name, p]));
    this.state.processors = [];
    for (const name of names) {
      const row = known.get(name) ?? {
        name,
        runState: "stopped" as RunState,
        lastReason: "",
        pc: null,
      };
      const pcReply = await this.eval(`${name} pc`);
      if (pcReply.ok) {
        row.pc = Number(pcReply.result);
      }
      // run-state chips change only on service events and accepted run controls
      this.state.processors.push(row);
    }
    if (this.state.selected === null && names.length > 0) {
      this.state.selected = names[0];
    }
    if (this.state.selected !== null && !names.includes(this.state.selected)) {
      this.state.selected = names.length > 0 ? names[0] : null;
    }
    this.changed();
  }

  async refreshRegisters(instance: string): Promise<void> {
    const r = await this.eval(`${instance} ? R`);
    if (r.ok) {
      this.state.registers = parseRegisterTuples(r.result ?? "");
      this.changed();
    }
  }

  async refreshMemory(instance: string): Promise<void> {
    const { base } = this.state.memory;
    const end = base + MEMORY_WINDOW_WORDS;
    // one script round-trip collects the whole window
    const cmd =
      `set __uiw {}; for {set __uia ${base}} {$__uia < ${end}} {incr __uia} ` +
      `{ set __uiw "$__uiw [${instance} fxpr *$__uia]" }; set __uiw`;
    const r = await this.eval(cmd);
    if (r.ok) {
      const words = (r.result ?? "").trim().split(/\s+/).filter((w) => w !== "");
      this.state.memory = { space: "ymem", base, words: words.map(Number) };
      this.changed();
    }
  }

  async refreshBreakpoints(): Promise<void> {
    const r = await this.eval("query");
    if (r.ok) {
      this.state.breakpoints = parseBreakpointRows(r.result ?? "");
      this.changed();
    }
  }

  // -- panel actions

  async select(instance: string): Promise<void> {
    this.state.selected = instance;
    this.changed();
    await this.refreshRegisters(instance);
    await this.refreshMemory(instance);
  }

  async setMemoryBase(base: number): Promise<void> {
    this.state.memory.base = base;
    if (this.state.selected !== null) {
      await this.refreshMemory(this.state.selected);
    }
  }

  async runControl(
    action: "resume" | "resume_bg" | "stepi" | "halt" | "reset",
    instance: string,
  ): Promise<WireResponse> {
    const cmd = {
      resume: `${instance} resume`,
      resume_bg: `${instance} resume &`,
      stepi: `${instance} stepi`,
      halt: `halt ${instance}`,
      reset: `${instance} reset`,
    }[action];
    const response = await this.eval(cmd);
    if (!response.ok) {
      this.state.transcript.push({
        kind: "error",
        text: `Error: ${response.error ?? "unknown"}`,
      });
    } else if (action === "resume_bg") {
      // the accepted response is the service's word that the core now runs
      const row = this.state.processors.find((p) => p.name === instance);
      if (row) row.runState = "running";
    }
    this.changed();
    await this.refresh();
    return response;
  }

  async addBreakpoint(
    instance: string,
    location: string,
    access: "exec" | "read" | "write",
    callback: string,
  ): Promise<WireResponse> {
    let cmd = `${instance} stop ${location}`;
    if (access !== "exec") cmd += ` -${access}`;
    if (callback.trim() !== "") cmd += ` ${callback.trim()}`;
    const response = await this.eval(cmd);
    if (!response.ok) {
      this.state.transcript.push({
        kind: "error",
        text: `Error: ${response.error ?? "unknown"}`,
      });
      this.changed();
    }
    await this.refreshBreakpoints();
    return response;
  }

  async clearBreakpoint(id: number): Promise<void> {
    await this.eval(`clear ${id}`);
    await this.refreshBreakpoints();
  }

  async toggleBreakpoint(id: number, enabled: boolean): Promise<void> {
    await this.eval(`${enabled ? "enable" : "disable"} ${id}`);
    await this.refreshBreakpoints();
  }
}
