/**
 * Display-rate position smoothing between snapshot arrivals.
 *
 * Positions are linearly interpolated from the previous snapshot toward the
 * latest by wall-clock progress through one snapshot gap; everything else
 * (flags, distances, readouts) always comes from the latest snapshot —
 * discrete state must never be blended.
 */

import type { Snapshot } from "./protocol.js";

export const SNAPSHOT_WALL_MS = 50;

export function interpolatePositions(
  previous: Snapshot | null,
  latest: Snapshot,
  latestArrivedAtMs: number,
  nowMs: number,
): [number, number][] {
  if (!previous || previous.positions.length !== latest.positions.length) {
    return latest.positions;
  }
  const progress = (nowMs - latestArrivedAtMs) / SNAPSHOT_WALL_MS;
  const k = Math.min(1, Math.max(0, progress));
  if (k >= 1) return latest.positions;
  return latest.positions.map(([x1, y1], i) => {
    const [x0, y0] = previous.positions[i];
    return [x0 + (x1 - x0) * k, y0 + (y1 - y0) * k] as [number, number];
  });
}
