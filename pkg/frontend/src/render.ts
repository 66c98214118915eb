/**
 * Canvas drawing of one frame: fading trails, agent markers, command arrow.
 *
 * Detecting agents draw solid (filled marker, solid trail); non-detecting
 * agents draw dotted (hollow marker, dashed trail).  Captured agents fade
 * out at their absorber.  The command vector draws as an arrow anchored at
 * the swarm centroid.
 */

import type { Snapshot } from "./protocol.js";
import type { TrailPoint } from "./console-state.js";
import {
  boundsOf,
  fitTransform,
  mergeBounds,
  worldToScreen,
} from "./view-transform.js";
import type { Bounds, Transform, Viewport } from "./view-transform.js";

export interface FrameInput {
  snapshot: Snapshot;
  positions: [number, number][];
  trails: TrailPoint[][];
}

export class SceneRenderer {
  private grownBounds: Bounds | null = null;

  constructor(private readonly ctx: CanvasRenderingContext2D) {}

  resetView(): void {
    this.grownBounds = null;
  }

  render(frame: FrameInput, viewport: Viewport): Transform {
    const { snapshot, positions, trails } = frame;
    const pts: [number, number][] = [...positions];
    for (const trail of trails) {
      for (const p of trail) pts.push([p.x, p.y]);
    }
    this.grownBounds = mergeBounds(this.grownBounds, boundsOf(pts));
    const bounds = this.grownBounds ?? { minX: -1, maxX: 1, minY: -1, maxY: 1 };
    const tf = fitTransform(bounds, viewport);

    const ctx = this.ctx;
    ctx.clearRect(0, 0, viewport.width, viewport.height);

    trails.forEach((trail, i) => {
      if (trail.length < 2 || !snapshot.active[i]) return;
      const color = agentColor(i);
      const detecting = snapshot.detect[i];
      for (let k = 1; k < trail.length; k++) {
        const alpha = (k / trail.length) * 0.8;
        ctx.strokeStyle = color;
        ctx.globalAlpha = alpha;
        ctx.lineWidth = 1.5;
        ctx.setLineDash(detecting ? [] : [3, 4]);
        ctx.beginPath();
        const [x0, y0] = worldToScreen(tf, trail[k - 1].x, trail[k - 1].y);
        const [x1, y1] = worldToScreen(tf, trail[k].x, trail[k].y);
        ctx.moveTo(x0, y0);
        ctx.lineTo(x1, y1);
        ctx.stroke();
      }
    });
    ctx.globalAlpha = 1;
    ctx.setLineDash([]);

    positions.forEach(([x, y], i) => {
      if (!snapshot.active[i]) return;
      const [sx, sy] = worldToScreen(tf, x, y);
      ctx.beginPath();
      ctx.arc(sx, sy, 5, 0, 2 * Math.PI);
      if (snapshot.detect[i]) {
        ctx.fillStyle = agentColor(i);
        ctx.fill();
      } else {
        ctx.strokeStyle = agentColor(i);
        ctx.lineWidth = 2;
        ctx.stroke();
      }
    });

    const [ux, uy] = snapshot.u_c;
    if (ux !== 0 || uy !== 0) {
      const live = positions.filter((_, i) => snapshot.active[i]);
      const cx = live.reduce((s, p) => s + p[0], 0) / Math.max(live.length, 1);
      const cy = live.reduce((s, p) => s + p[1], 0) / Math.max(live.length, 1);
      drawArrow(ctx, tf, cx, cy, ux, uy);
    }
    return tf;
  }
}

export function agentColor(i: number): string {
  const hue = (i * 137.508) % 360; // golden-angle spacing keeps neighbors apart
  return `hsl(${hue.toFixed(1)}, 70%, 55%)`;
}

function drawArrow(
  ctx: CanvasRenderingContext2D,
  tf: Transform,
  x: number,
  y: number,
  vx: number,
  vy: number,
): void {
  const norm = Math.hypot(vx, vy);
  if (norm === 0) return;
  const lengthPx = 40 + 20 * Math.min(norm, 3);
  const [sx, sy] = worldToScreen(tf, x, y);
  const dx = (vx / norm) * lengthPx;
  const dy = (-vy / norm) * lengthPx;
  const hx = sx + dx;
  const hy = sy + dy;
  ctx.strokeStyle = "#f5c542";
  ctx.fillStyle = "#f5c542";
  ctx.lineWidth = 2.5;
  ctx.beginPath();
  ctx.moveTo(sx, sy);
  ctx.lineTo(hx, hy);
  ctx.stroke();
  const angle = Math.atan2(dy, dx);
  ctx.beginPath();
  ctx.moveTo(hx, hy);
  ctx.lineTo(hx - 9 * Math.cos(angle - 0.4), hy - 9 * Math.sin(angle - 0.4));
  ctx.lineTo(hx - 9 * Math.cos(angle + 0.4), hy - 9 * Math.sin(angle + 0.4));
  ctx.closePath();
  ctx.fill();
}
