/**
 * World-to-screen mapping: fit a set of world points into a viewport,
 * preserving aspect ratio, with a margin.  Y flips (world y up, screen y
 * down).  The fit expands only (per session) so the view does not pump as
 * the swarm contracts.
 */

export interface Viewport {
  width: number;
  height: number;
  margin: number;
}

export interface Bounds {
  minX: number;
  maxX: number;
  minY: number;
  maxY: number;
}

export interface Transform {
  scale: number;
  offsetX: number;
  offsetY: number;
}

export function boundsOf(points: readonly [number, number][]): Bounds | null {
  if (points.length === 0) return null;
  let minX = Infinity;
  let maxX = -Infinity;
  let minY = Infinity;
  let maxY = -Infinity;
  for (const [x, y] of points) {
    if (x < minX) minX = x;
    if (x > maxX) maxX = x;
    if (y < minY) minY = y;
    if (y > maxY) maxY = y;
  }
  return { minX, maxX, minY, maxY };
}

export function mergeBounds(a: Bounds | null, b: Bounds | null): Bounds | null {
  if (!a) return b;
  if (!b) return a;
  return {
    minX: Math.min(a.minX, b.minX),
    maxX: Math.max(a.maxX, b.maxX),
    minY: Math.min(a.minY, b.minY),
    maxY: Math.max(a.maxY, b.maxY),
  };
}

export function fitTransform(bounds: Bounds, viewport: Viewport): Transform {
  const spanX = Math.max(bounds.maxX - bounds.minX, 1e-9);
  const spanY = Math.max(bounds.maxY - bounds.minY, 1e-9);
  const usableW = Math.max(viewport.width - 2 * viewport.margin, 1);
  const usableH = Math.max(viewport.height - 2 * viewport.margin, 1);
  const scale = Math.min(usableW / spanX, usableH / spanY);
  const cx = (bounds.minX + bounds.maxX) / 2;
  const cy = (bounds.minY + bounds.maxY) / 2;
  return {
    scale,
    offsetX: viewport.width / 2 - cx * scale,
    offsetY: viewport.height / 2 + cy * scale,
  };
}

export function worldToScreen(
  t: Transform,
  x: number,
  y: number,
): [number, number] {
  return [t.offsetX + x * t.scale, t.offsetY - y * t.scale];
}
