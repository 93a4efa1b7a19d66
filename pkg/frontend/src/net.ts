/** Gateway connection: reconnect loop, message parsing, command sending.
 *
 * The WebSocket constructor is injectable so tests (and the headless
 * integration client) can supply a Node implementation.
 */

import {
  CommandMessage,
  ServerMessage,
  parseServerMessage,
} from "./types.js";

/** Structural subset of the WebSocket API the client needs. The handler
 * parameters are typed loosely so both browser and Node sockets fit. */
export interface SocketLike {
  send(data: string): void;
  close(): void;
  onopen: ((ev?: any) => void) | null;
  onclose: ((ev?: any) => void) | null;
  onerror: ((ev?: any) => void) | null;
  onmessage: ((ev: any) => void) | null;
  readyState: number;
}

export type SocketFactory = (url: string) => SocketLike;

export type ConnectionStatus = "connecting" | "open" | "closed";

export interface GatewayEvents {
  onMessage?: (msg: ServerMessage) => void;
  onStatus?: (status: ConnectionStatus) => void;
}

const SOCKET_OPEN = 1;
const RECONNECT_MIN_MS = 500;
const RECONNECT_MAX_MS = 5000;

export class GatewayClient {
  status: ConnectionStatus = "closed";
  private socket: SocketLike | null = null;
  private retryMs = RECONNECT_MIN_MS;
  private stopped = false;
  private timer: ReturnType<typeof setTimeout> | null = null;

  constructor(
    readonly url: string,
    private readonly events: GatewayEvents,
    private readonly factory: SocketFactory,
  ) {}

  connect(): void {
    this.stopped = false;
    this.open();
  }

  private open(): void {
    this.setStatus("connecting");
    const socket = this.factory(this.url);
    this.socket = socket;
    socket.onopen = () => {
      this.retryMs = RECONNECT_MIN_MS;
      this.setStatus("open");
    };
    socket.onmessage = (ev) => {
      if (typeof ev.data !== "string") return;
      const msg = parseServerMessage(ev.data);
      if (msg) this.events.onMessage?.(msg);
    };
    socket.onclose = () => this.scheduleRetry();
    socket.onerror = () => {
      // the close handler owns the retry; some implementations fire both
    };
  }

  private scheduleRetry(): void {
    this.socket = null;
    this.setStatus("closed");
    if (this.stopped) return;
    this.timer = setTimeout(() => this.open(), this.retryMs);
    this.retryMs = Math.min(this.retryMs * 2, RECONNECT_MAX_MS);
  }

  private setStatus(status: ConnectionStatus): void {
    this.status = status;
    this.events.onStatus?.(status);
  }

  /** Send a command; returns false when the socket is not open. */
  send(cmd: CommandMessage): boolean {
    if (!this.socket || this.socket.readyState !== SOCKET_OPEN) return false;
    this.socket.send(JSON.stringify(cmd));
    return true;
  }

  close(): void {
    this.stopped = true;
    if (this.timer !== null) clearTimeout(this.timer);
    this.socket?.close();
    this.socket = null;
    this.setStatus("closed");
  }
}

/** Gateway URL from ?host=…&port=… with sensible defaults. */
export function gatewayUrl(query: string, defaultHost = "127.0.0.1"): string {
  const params = new URLSearchParams(query);
  const host = params.get("host") ?? defaultHost;
  const port = params.get("port") ?? "8700";
  return `ws://${host}:${port}/session`;
}
