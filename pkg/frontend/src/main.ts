import { Panels } from "./panels.js";
import { UiSession } from "./session.js";
import { WsTransport } from "./transport.js";

function serviceUrl(): string {
  const params = new URLSearchParams(window.location.search);
  const explicit = params.get("service");
  if (explicit) return explicit;
  const host = window.location.hostname || "127.0.0.1";
  const port = params.get("port") ?? "8000";
  return `ws://${host}:${port}/ws`;
}

const session = new UiSession();
const panels = new Panels(session, document.body);
panels.wire();

function connect(): void {
  const transport = new WsTransport(serviceUrl(), () => {
    void session.attach(transport);
  });
  transport.onClose(() => {
    // the session froze its panels; offer a reconnect that re-queries all
    setTimeout(connect, 2000);
  });
}

document.querySelector("#reconnect")?.addEventListener("click", connect);
connect();
panels.render();
