// Wire protocol types: one JSON object per message. Requests carry an id;
// responses echo it; broadcast events have no id.

export interface EvalRequest {
  id: number;
  op: "eval";
  cmd: string;
}

export interface WireResponse {
  id: number | string | null;
  ok: boolean;
  result?: string;
  error?: string;
}

export interface StoppedEvent {
  event: "stopped";
  processor: string;
  reason: string;
  pc: number;
  bp?: number;
  errnum?: number;
  errstr?: string;
}

export interface OutputEvent {
  event: "output";
  text: string;
}

export interface TargetEvent {
  event: "target";
  processor: string;
  kind: string;
  cycle: number;
  bp?: number;
  errnum?: number;
  severity?: string;
  errstr?: string;
  code?: number;
}

export type WireEvent = StoppedEvent | OutputEvent | TargetEvent;
export type WireMessage = WireResponse | WireEvent;

export function parseMessage(line: string): WireMessage | null {
  let obj: unknown;
  try {
    obj = JSON.parse(line);
  } catch {
    return null;
  }
  if (typeof obj !== "object" || obj === null) return null;
  const rec = obj as Record<string, unknown>;
  if (typeof rec.event === "string") return rec as unknown as WireEvent;
  if (typeof rec.ok === "boolean") return rec as unknown as WireResponse;
  return null;
}

export function isEvent(msg: WireMessage): msg is WireEvent {
  return "event" in msg;
}

// A register reflection tuple: {name value s|u width}.
export interface RegisterTuple {
  name: string;
  value: number;
  sign: string;
  width: number;
}

// Minimal parser for the brace-quoted list syntax the service returns
// (register tuples, breakpoint rows, processor lists).
export function parseBracedList(text: string): string[] {
  const items: string[] = [];
  let i = 0;
  const n = text.length;
  while (i < n) {
    const c = text[i];
    if (c === " " || c === "\t" || c === "\n") {
      i += 1;
      continue;
    }
    if (c === "{") {
      let depth = 1;
      let j = i + 1;
      while (j < n && depth > 0) {
        if (text[j] === "\\") j += 1;
        else if (text[j] === "{") depth += 1;
        else if (text[j] === "}") depth -= 1;
        j += 1;
      }
      items.push(text.slice(i + 1, j - 1));
      i = j;
    } else {
      let j = i;
      while (j < n && !" \t\n".includes(text[j])) j += 1;
      items.push(text.slice(i, j));
      i = j;
    }
  }
  return items;
}

export function parseRegisterTuples(text: string): RegisterTuple[] {
  return parseBracedList(text)
    .map((row) => row.split(/\s+/))
    .filter((f) => f.length === 4)
    .map((f) => ({
      name: f[0],
      value: Number(f[1]),
      sign: f[2],
      width: Number(f[3]),
    }));
}

export interface BreakpointRow {
  id: number;
  instance: string;
  location: string;
  access: string;
  enabled: boolean;
}

export function parseBreakpointRows(text: string): BreakpointRow[] {
  return parseBracedList(text).map((row) => {
    const fields = parseBracedList(row);
    return {
      id: Number(fields[0]),
      instance: fields[1],
      location: fields[2] ?? "",
      access: fields[3] ?? "",
      enabled: fields[4] === "1",
    };
  });
}
