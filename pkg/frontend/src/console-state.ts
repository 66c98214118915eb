/**
 * Console model: everything the view needs, derived from snapshots alone.
 *
 * Holds the last two snapshots (velocity measurement and interpolation need
 * a pair), per-agent trails, connection status and banner text.  All
 * mutation happens through the on* handlers; rendering reads getters.
 */

import type { ServerMessage, Snapshot } from "./protocol.js";

export type ConnectionStatus = "connecting" | "open" | "closed";

export interface TrailPoint {
  x: number;
  y: number;
  t: number;
}

const DEFAULT_TRAIL_LENGTH = 120;

export class ConsoleState {
  previous: Snapshot | null = null;
  latest: Snapshot | null = null;
  /** Wall-clock ms when `latest` arrived; interpolation anchor. */
  latestArrivedAt = 0;
  trails: TrailPoint[][] = [];
  trailLength = DEFAULT_TRAIL_LENGTH;
  status: ConnectionStatus = "connecting";
  banner: string | null = null;
  lastReject: string | null = null;
  snapshotCount = 0;

  onMessage(msg: ServerMessage, nowMs: number): void {
    switch (msg.kind) {
      case "snapshot":
        this.pushSnapshot(msg.snapshot, nowMs);
        break;
      case "ack":
        this.lastReject = null;
        break;
      case "reject":
        this.lastReject = msg.reason;
        break;
      case "protocol_error":
        this.banner = msg.reason;
        break;
    }
  }

  onStatus(status: ConnectionStatus, detail?: string): void {
    this.status = status;
    if (status === "open") {
      this.banner = null;
    } else if (detail) {
      this.banner = detail;
    }
  }

  setTrailLength(length: number): void {
    this.trailLength = Math.max(2, Math.floor(length));
    for (const trail of this.trails) {
      if (trail.length > this.trailLength) {
        trail.splice(0, trail.length - this.trailLength);
      }
    }
  }

  private pushSnapshot(snap: Snapshot, nowMs: number): void {
    // A reset (or a fresh server) rewinds t; stale trails would draw jumps.
    if (this.latest !== null && snap.t < this.latest.t) {
      this.trails = [];
      this.previous = null;
      this.latest = null;
    }
    if (this.trails.length !== snap.positions.length) {
      this.trails = snap.positions.map(() => []);
    }
    snap.positions.forEach(([x, y], i) => {
      const trail = this.trails[i];
      const last = trail[trail.length - 1];
      if (!last || last.t !== snap.t) {
        trail.push({ x, y, t: snap.t });
        if (trail.length > this.trailLength) trail.shift();
      }
    });
    this.previous = this.latest;
    this.latest = snap;
    this.latestArrivedAt = nowMs;
    this.snapshotCount += 1;
  }

  /** Mean velocity over the last snapshot gap: displacement / elapsed. */
  measuredMeanVelocity(): [number, number] | null {
    const a = this.previous;
    const b = this.latest;
    if (!a || !b) return null;
    const dt = b.t - a.t;
    if (!(dt > 0)) return null;
    let vx = 0;
    let vy = 0;
    const n = b.positions.length;
    for (let i = 0; i < n; i++) {
      vx += (b.positions[i][0] - a.positions[i][0]) / dt;
      vy += (b.positions[i][1] - a.positions[i][1]) / dt;
    }
    return [vx / n, vy / n];
  }

  predictedVelocity(): [number, number] | null {
    return this.latest ? this.latest.predicted_velocity : null;
  }

  /** Sum of live chaser-to-prey separations (bugs model only). */
  sumDistances(): number | null {
    const d = this.latest?.distances;
    if (!d) return null;
    let total = 0;
    for (const x of d) if (x !== null) total += x;
    return total;
  }

  clusterCount(): number | null {
    if (!this.latest) return null;
    return this.latest.active.filter(Boolean).length;
  }

  /** Command-magnitude threshold 1/(2 m^2) for the current cluster count. */
  gatherThreshold(): number | null {
    const m = this.clusterCount();
    if (m === null || m < 2) return null;
    return 1 / (2 * m * m);
  }
}
