// Session lifecycle and the WebSocket command/snapshot channel.

import {
  AckMessage,
  EndMessage,
  SessionInfo,
  StateMessage,
  parseServerMessage,
} from "./protocol.js";

export interface ClientHandlers {
  onState?: (s: StateMessage) => void;
  onEnd?: (e: EndMessage) => void;
  onAck?: (a: AckMessage) => void;
  onError?: (message: string) => void;
  onConnectionChange?: (connected: boolean) => void;
}

export async function createSession(
  baseUrl: string,
  task: string,
  mode: string,
  seed: number,
  alpha?: number,
): Promise<SessionInfo> {
  const resp = await fetch(`${baseUrl}/sessions`, {
    method: "POST",
    headers: { "Content-Type": "application/json" },
    body: JSON.stringify({ task, mode, seed, alpha: alpha ?? null }),
  });
  if (!resp.ok) {
    throw new Error(`session create failed: ${resp.status} ${await resp.text()}`);
  }
  return (await resp.json()) as SessionInfo;
}

export async function endSession(baseUrl: string, id: string): Promise<unknown> {
  const resp = await fetch(`${baseUrl}/sessions/${id}`, { method: "DELETE" });
  if (!resp.ok) throw new Error(`session end failed: ${resp.status}`);
  return resp.json();
}

const RETRY_MS = 1000;

export class SessionSocket {
  private ws: WebSocket | null = null;
  private closed = false;

  constructor(
    private url: string,
    private handlers: ClientHandlers,
  ) {
    this.connect();
  }

  private connect(): void {
    const ws = new WebSocket(this.url);
    this.ws = ws;
    ws.onopen = () => this.handlers.onConnectionChange?.(true);
    ws.onmessage = (ev) => this.dispatch(String(ev.data));
    ws.onclose = () => {
      this.handlers.onConnectionChange?.(false);
      if (!this.closed) setTimeout(() => this.connect(), RETRY_MS);
    };
    ws.onerror = () => ws.close();
  }

  private dispatch(raw: string): void {
    let msg;
    try {
      msg = parseServerMessage(raw);
    } catch (err) {
      this.handlers.onError?.(String(err));
      return;
    }
    switch (msg.t) {
      case "state":
        this.handlers.onState?.(msg);
        break;
      case "end":
        this.handlers.onEnd?.(msg);
        break;
      case "ack":
        this.handlers.onAck?.(msg);
        break;
      case "error":
        this.handlers.onError?.(msg.message);
        break;
    }
  }

  send(frame: string): boolean {
    if (this.ws && this.ws.readyState === WebSocket.OPEN) {
      this.ws.send(frame);
      return true;
    }
    return false;
  }

  close(): void {
    this.closed = true;
    this.ws?.close();
  }
}

/** ws:// URL for a session socket given the REST base URL. */
export function socketUrl(baseUrl: string, sessionId: string): string {
  return `${baseUrl.replace(/^http/, "ws")}/session/${sessionId}`;
}
