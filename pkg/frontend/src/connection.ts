/**
 * Session socket with automatic reconnect.
 *
 * Wraps one WebSocket to the /session endpoint.  On drop it retries with
 * exponential backoff (0.5 s doubling to 8 s, reset on a successful open).
 * The socket constructor and timer are injectable so tests can drive the
 * whole lifecycle synchronously.
 */

import { encodeCommand, parseServerMessage } from "./protocol.js";
import type { Command, ServerMessage } from "./protocol.js";

export interface SocketLike {
  onopen: (() => void) | null;
  onclose: (() => void) | null;
  onerror: (() => void) | null;
  onmessage: ((event: { data: string }) => void) | null;
  send(data: string): void;
  close(): void;
}

export interface ConnectionCallbacks {
  onMessage(msg: ServerMessage): void;
  onStatus(status: "connecting" | "open" | "closed", detail?: string): void;
}

export interface ConnectionOptions {
  socketFactory?: (url: string) => SocketLike;
  schedule?: (fn: () => void, delayMs: number) => unknown;
  initialBackoffMs?: number;
  maxBackoffMs?: number;
}

export const INITIAL_BACKOFF_MS = 500;
export const MAX_BACKOFF_MS = 8000;

export class SessionConnection {
  private readonly url: string;
  private readonly callbacks: ConnectionCallbacks;
  private readonly socketFactory: (url: string) => SocketLike;
  private readonly schedule: (fn: () => void, delayMs: number) => unknown;
  private readonly initialBackoffMs: number;
  private readonly maxBackoffMs: number;
  private socket: SocketLike | null = null;
  private backoffMs: number;
  private stopped = false;
  retryCount = 0;

  constructor(url: string, callbacks: ConnectionCallbacks, options: ConnectionOptions = {}) {
    this.url = url;
    this.callbacks = callbacks;
    this.socketFactory =
      options.socketFactory ?? ((u) => new WebSocket(u) as unknown as SocketLike);
    this.schedule = options.schedule ?? ((fn, ms) => setTimeout(fn, ms));
    this.initialBackoffMs = options.initialBackoffMs ?? INITIAL_BACKOFF_MS;
    this.maxBackoffMs = options.maxBackoffMs ?? MAX_BACKOFF_MS;
    this.backoffMs = this.initialBackoffMs;
  }

  connect(): void {
    if (this.stopped) return;
    this.callbacks.onStatus("connecting");
    let socket: SocketLike;
    try {
      socket = this.socketFactory(this.url);
    } catch {
      this.scheduleReconnect("server unreachable");
      return;
    }
    this.socket = socket;
    socket.onopen = () => {
      this.backoffMs = this.initialBackoffMs;
      this.callbacks.onStatus("open");
    };
    socket.onmessage = (event) => {
      this.callbacks.onMessage(parseServerMessage(event.data));
    };
    socket.onerror = () => {
      // the close handler owns reconnection; nothing to do here
    };
    socket.onclose = () => {
      if (this.socket !== socket) return;
      this.socket = null;
      this.scheduleReconnect("connection lost");
    };
  }

  private scheduleReconnect(detail: string): void {
    if (this.stopped) return;
    const wait = this.backoffMs;
    this.callbacks.onStatus(
      "closed",
      `${detail}; retrying in ${(wait / 1000).toFixed(1)} s`,
    );
    this.backoffMs = Math.min(this.backoffMs * 2, this.maxBackoffMs);
    this.retryCount += 1;
    this.schedule(() => this.connect(), wait);
  }

  /** Send one command; returns false (and reports) when not connected. */
  send(command: Command): boolean {
    if (!this.socket) return false;
    try {
      this.socket.send(encodeCommand(command));
      return true;
    } catch {
      return false;
    }
  }

  close(): void {
    this.stopped = true;
    const socket = this.socket;
    this.socket = null;
    if (socket) socket.close();
  }
}
