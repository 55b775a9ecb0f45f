// Transports deliver whole wire-protocol messages as text lines. The session
// stays transport-agnostic so tests can script a fake service and the live
// end-to-end check can ride the TCP framing instead of a browser WebSocket.

export interface Transport {
  send(line: string): void;
  onMessage(handler: (line: string) => void): void;
  onClose(handler: () => void): void;
  close(): void;
}

export class WsTransport implements Transport {
  private ws: WebSocket;
  private messageHandler: (line: string) => void = () => {};
  private closeHandler: () => void = () => {};

  constructor(url: string, onOpen: () => void) {
    this.ws = new WebSocket(url);
    this.ws.onopen = () => onOpen();
    this.ws.onmessage = (e) => this.messageHandler(String(e.data));
    this.ws.onclose = () => this.closeHandler();
    this.ws.onerror = () => this.ws.close();
  }

  send(line: string): void {
    this.ws.send(line);
  }

  onMessage(handler: (line: string) => void): void {
    this.messageHandler = handler;
  }

  onClose(handler: () => void): void {
    this.closeHandler = handler;
  }

  close(): void {
    this.ws.close();
  }
}
