/**
 * Wire protocol for the /session socket.
 *
 * Every message in both directions carries "v": 1.  The server sends
 * {"v":1,"snapshot":{..}}, {"v":1,"ack":{"t":..}} or
 * {"v":1,"reject":{"reason":..,"t":..}}; the client sends command objects.
 * The console renders only what arrives in snapshots; it never simulates.
 */

export const PROTOCOL_VERSION = 1;

export interface Snapshot {
  t: number;
  positions: [number, number][];
  active: boolean[];
  detect: boolean[];
  u_c: [number, number];
  n_l: number;
  predicted_velocity: [number, number];
  distances: (number | null)[] | null;
  gathered: boolean;
  paused: boolean;
}

export type ServerMessage =
  | { kind: "snapshot"; snapshot: Snapshot }
  | { kind: "ack"; t: number }
  | { kind: "reject"; reason: string; t: number }
  | { kind: "protocol_error"; reason: string };

export type Command =
  | { cmd: "set_uc"; ux: number; uy: number }
  | { cmd: "set_leaders"; flags: number[] }
  | { cmd: "pause" }
  | { cmd: "resume" }
  | { cmd: "reset"; seed?: number }
  | { cmd: "set_speed"; x: number };

export function encodeCommand(command: Command): string {
  return JSON.stringify({ v: PROTOCOL_VERSION, ...command });
}

function isFinitePair(p: unknown): p is [number, number] {
  return (
    Array.isArray(p) &&
    p.length === 2 &&
    typeof p[0] === "number" &&
    typeof p[1] === "number" &&
    Number.isFinite(p[0]) &&
    Number.isFinite(p[1])
  );
}

function asSnapshot(raw: unknown): Snapshot | null {
  if (typeof raw !== "object" || raw === null) return null;
  const s = raw as Record<string, unknown>;
  if (typeof s.t !== "number" || !Array.isArray(s.positions)) return null;
  if (!s.positions.every(isFinitePair)) return null;
  if (!Array.isArray(s.active) || !Array.isArray(s.detect)) return null;
  if (!isFinitePair(s.u_c) || !isFinitePair(s.predicted_velocity)) return null;
  if (typeof s.n_l !== "number") return null;
  if (typeof s.gathered !== "boolean" || typeof s.paused !== "boolean") return null;
  const distances = s.distances === null || s.distances === undefined
    ? null
    : (s.distances as (number | null)[]);
  return {
    t: s.t,
    positions: s.positions as [number, number][],
    active: (s.active as unknown[]).map(Boolean),
    detect: (s.detect as unknown[]).map(Boolean),
    u_c: s.u_c,
    n_l: s.n_l,
    predicted_velocity: s.predicted_velocity,
    distances,
    gathered: s.gathered,
    paused: s.paused,
  };
}

export function parseServerMessage(text: string): ServerMessage {
  let doc: unknown;
  try {
    doc = JSON.parse(text);
  } catch {
    return { kind: "protocol_error", reason: "unparseable message" };
  }
  if (typeof doc !== "object" || doc === null) {
    return { kind: "protocol_error", reason: "message is not an object" };
  }
  const msg = doc as Record<string, unknown>;
  if (msg.v !== PROTOCOL_VERSION) {
    return {
      kind: "protocol_error",
      reason: `protocol version mismatch: server sent v=${String(msg.v)}, console speaks v=${PROTOCOL_VERSION}`,
    };
  }
  if ("snapshot" in msg) {
    const snap = asSnapshot(msg.snapshot);
    if (snap === null) return { kind: "protocol_error", reason: "malformed snapshot" };
    return { kind: "snapshot", snapshot: snap };
  }
  if ("ack" in msg) {
    const ack = msg.ack as Record<string, unknown>;
    if (typeof ack?.t !== "number") return { kind: "protocol_error", reason: "malformed ack" };
    return { kind: "ack", t: ack.t };
  }
  if ("reject" in msg) {
    const rej = msg.reject as Record<string, unknown>;
    if (typeof rej?.reason !== "string" || typeof rej?.t !== "number") {
      return { kind: "protocol_error", reason: "malformed reject" };
    }
    return { kind: "reject", reason: rej.reason, t: rej.t };
  }
  return { kind: "protocol_error", reason: "unknown server message" };
}
