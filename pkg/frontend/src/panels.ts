// DOM rendering for the four panels: processors, registers/memory,
// breakpoints, console + event feed. Pure view over UiSession state.

import { UiSession } from "./session.js";

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

export class Panels {
  constructor(
    private session: UiSession,
    private root: HTMLElement,
  ) {
    session.onChange(() => this.render());
  }

  render(): void {
    const s = this.session.state;
    const status = this.root.querySelector("#status")!;
    status.textContent = s.connection + (s.stale ? " (stale)" : "");
    status.className = s.connection === "connected" ? "status ok" : "status bad";

    this.renderProcessors();
    this.renderRegisters();
    this.renderMemory();
    this.renderBreakpoints();
    this.renderTranscript();
    this.root.classList.toggle("stale", s.stale || s.connection !== "connected");
  }

  private renderProcessors(): void {
    const s = this.session.state;
    const box = this.root.querySelector("#processors .body")!;
    box.textContent = "";
    for (const p of s.processors) {
      const row = el("div", "proc-row" + (p.name === s.selected ? " selected" : ""));
      row.appendChild(el("span", "proc-name", p.name));
      row.appendChild(el("span", `chip ${p.runState}`, p.runState));
      row.appendChild(el("span", "proc-pc", p.pc === null ? "" : `pc=${p.pc}`));
      if (p.lastReason) row.appendChild(el("span", "proc-reason", p.lastReason));
      row.addEventListener("click", () => void this.session.select(p.name));
      box.appendChild(row);
    }
  }

  private renderRegisters(): void {
    const s = this.session.state;
    const box = this.root.querySelector("#registers .body")!;
    box.textContent = "";
    const table = el("table");
    for (const r of s.registers) {
      const tr = el("tr");
      tr.appendChild(el("td", "reg-name", r.name));
      const val = el("td", "reg-value", String(r.value));
      val.dataset.reg = r.name;
      tr.appendChild(val);
      tr.appendChild(el("td", "reg-meta", `${r.sign}${r.width}`));
      table.appendChild(tr);
    }
    box.appendChild(table);
  }

  private renderMemory(): void {
    const s = this.session.state;
    const box = this.root.querySelector("#memory .body")!;
    box.textContent = "";
    const words = s.memory.words;
    for (let row = 0; row < words.length; row += 8) {
      const line = el("div", "mem-row");
      line.appendChild(el("span", "mem-addr", String(s.memory.base + row)));
      for (let k = row; k < Math.min(row + 8, words.length); k += 1) {
        line.appendChild(el("span", "mem-word", String(words[k])));
      }
      box.appendChild(line);
    }
  }

  private renderBreakpoints(): void {
    const s = this.session.state;
    const box = this.root.querySelector("#breakpoints .body")!;
    box.textContent = "";
    for (const bp of s.breakpoints) {
      const row = el("div", "bp-row");
      row.appendChild(el("span", "bp-id", String(bp.id)));
      row.appendChild(el("span", "bp-loc", `${bp.instance} ${bp.location}`));
      row.appendChild(el("span", "bp-access", bp.access));
      const toggle = el("button", "bp-toggle", bp.enabled ? "disable" : "enable");
      toggle.addEventListener("click", () =>
        void this.session.toggleBreakpoint(bp.id, !bp.enabled),
      );
      row.appendChild(toggle);
      const clear = el("button", "bp-clear", "clear");
      clear.addEventListener("click", () => void this.session.clearBreakpoint(bp.id));
      row.appendChild(clear);
      box.appendChild(row);
    }
  }

  private renderTranscript(): void {
    const s = this.session.state;
    const box = this.root.querySelector("#console .transcript")!;
    box.textContent = "";
    for (const entry of s.transcript.slice(-200)) {
      box.appendChild(el("div", `line ${entry.kind}`,
        entry.kind === "command" ? `> ${entry.text}` : entry.text));
    }
    box.scrollTop = box.scrollHeight;
  }

  wire(): void {
    const input = this.root.querySelector<HTMLInputElement>("#console input")!;
    input.addEventListener("keydown", (e) => {
      if (e.key === "Enter" && input.value.trim() !== "") {
        void this.session.console(input.value.trim());
        input.value = "";
      }
    });

    for (const action of ["resume", "resume_bg", "stepi", "halt", "reset"] as const) {
      this.root.querySelector(`#ctl-${action}`)?.addEventListener("click", () => {
        const sel = this.session.state.selected;
        if (sel !== null) void this.session.runControl(action, sel);
      });
    }

    const base = this.root.querySelector<HTMLInputElement>("#mem-base")!;
    base.addEventListener("change", () => {
      const v = Number.parseInt(base.value, base.value.startsWith("0x") ? 16 : 10);
      if (!Number.isNaN(v)) void this.session.setMemoryBase(v);
    });

    const form = this.root.querySelector<HTMLFormElement>("#bp-form")!;
    form.addEventListener("submit", (e) => {
      e.preventDefault();
      const loc = this.root.querySelector<HTMLInputElement>("#bp-location")!;
      const access = this.root.querySelector<HTMLSelectElement>("#bp-access")!;
      const cb = this.root.querySelector<HTMLInputElement>("#bp-callback")!;
      const sel = this.session.state.selected;
      if (sel !== null && loc.value.trim() !== "") {
        void this.session.addBreakpoint(
          sel,
          loc.value.trim(),
          access.value as "exec" | "read" | "write",
          cb.value,
        );
        loc.value = "";
        cb.value = "";
      }
    });
  }
}
