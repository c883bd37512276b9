/**
 * Mask editing tools. Each exported function is one user gesture and
 * therefore at most one history entry on the document.
 */

import { CanvasDocument } from "./document.js";

export interface Point {
  x: number;
  y: number;
}

/** Cells within Euclidean distance `radius` of the center, clipped to bounds. */
export function diskCells(
  center: Point,
  radius: number,
  width: number,
  height: number,
): Array<[number, number]> {
  const out: Array<[number, number]> = [];
  const r2 = radius * radius;
  const x0 = Math.max(0, Math.floor(center.x - radius));
  const x1 = Math.min(width - 1, Math.ceil(center.x + radius));
  const y0 = Math.max(0, Math.floor(center.y - radius));
  const y1 = Math.min(height - 1, Math.ceil(center.y + radius));
  for (let y = y0; y <= y1; y++) {
    for (let x = x0; x <= x1; x++) {
      const dx = x - center.x;
      const dy = y - center.y;
      if (dx * dx + dy * dy <= r2) {
        out.push([x, y]);
      }
    }
  }
  return out;
}

/**
 * Paint a disk of `label` along the polyline `points`. Segments are walked
 * in sub-cell steps so fast drags leave no gaps. Returns the number of
 * cells that actually changed; zero changes means zero history entries.
 */
export function brushStroke(
  doc: CanvasDocument,
  points: Point[],
  radius: number,
  label: number,
): number {
  doc.checkLabel(label);
  if (!(radius > 0)) {
    throw new RangeError(`brush radius must be positive, got ${radius}`);
  }
  if (points.length === 0) {
    return 0;
  }

  const touched = new Set<number>();
  const stamp = (p: Point) => {
    for (const [x, y] of diskCells(p, radius, doc.width, doc.height)) {
      touched.add(y * doc.width + x);
    }
  };

  stamp(points[0]);
  for (let i = 1; i < points.length; i++) {
    const a = points[i - 1];
    const b = points[i];
    const dist = Math.hypot(b.x - a.x, b.y - a.y);
    const steps = Math.max(1, Math.ceil(dist / 0.5));
    for (let s = 1; s <= steps; s++) {
      const t = s / steps;
      stamp({ x: a.x + (b.x - a.x) * t, y: a.y + (b.y - a.y) * t });
    }
  }

  const grid = doc.maskGrid().labels;
  let changed = 0;
  for (const idx of touched) {
    if (grid[idx] !== label) {
      changed++;
    }
  }
  if (changed === 0) {
    return 0;
  }

  doc.beginEdit();
  for (const idx of touched) {
    doc.setLabelUnchecked(idx % doc.width, Math.floor(idx / doc.width), label);
  }
  doc.markDirty();
  return changed;
}

/**
 * 4-connected flood fill from the seed cell. Filling a region that already
 * has the target label is a no-op and leaves history untouched.
 */
export function paintFill(doc: CanvasDocument, x: number, y: number, label: number): number {
  doc.checkLabel(label);
  if (!doc.inBounds(x, y)) {
    throw new RangeError(`fill seed (${x}, ${y}) outside ${doc.width}x${doc.height} canvas`);
  }
  const source = doc.label(x, y);
  if (source === label) {
    return 0;
  }

  doc.beginEdit();
  const w = doc.width;
  const h = doc.height;
  // Explicit stack: recursion would overflow on large single-label canvases.
  const stack: number[] = [y * w + x];
  const grid = doc.maskGrid().labels;
  let changed = 0;
  while (stack.length > 0) {
    const idx = stack.pop()!;
    if (grid[idx] !== source) {
      continue;
    }
    grid[idx] = label;
    doc.setLabelUnchecked(idx % w, Math.floor(idx / w), label);
    changed++;
    const cx = idx % w;
    const cy = Math.floor(idx / w);
    if (cx > 0) stack.push(idx - 1);
    if (cx < w - 1) stack.push(idx + 1);
    if (cy > 0) stack.push(idx - w);
    if (cy < h - 1) stack.push(idx + w);
  }
  doc.markDirty();
  return changed;
}
