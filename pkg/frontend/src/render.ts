/**
 * Pure rasterizers for the two local panes. No DOM types here so the
 * functions stay trivially unit testable; the browser shell wraps the
 * returned buffers in ImageData itself.
 */

import { MaskGrid, RGB } from "./document.js";

/**
 * Color-reflected view: every cell shows exactly the color chosen for its
 * label. Returns a tightly packed RGBA buffer, alpha fixed at 255.
 */
export function paintByPalette(grid: MaskGrid, colors: RGB[]): Uint8ClampedArray<ArrayBuffer> {
  const { width, height, labels } = grid;
  if (labels.length !== width * height) {
    throw new RangeError(`grid has ${labels.length} cells, expected ${width * height}`);
  }
  const out = new Uint8ClampedArray(width * height * 4);
  for (let i = 0; i < labels.length; i++) {
    const c = colors[labels[i]];
    if (c === undefined) {
      throw new RangeError(`no color chosen for label ${labels[i]}`);
    }
    out[i * 4] = c.r;
    out[i * 4 + 1] = c.g;
    out[i * 4 + 2] = c.b;
    out[i * 4 + 3] = 255;
  }
  return out;
}

/**
 * Label-pane view: like paintByPalette but the active label is highlighted
 * by blending toward white so the user can see what the brush writes.
 */
export function paintMaskView(
  grid: MaskGrid,
  colors: RGB[],
  activeLabel: number,
): Uint8ClampedArray<ArrayBuffer> {
  const out = paintByPalette(grid, colors);
  for (let i = 0; i < grid.labels.length; i++) {
    if (grid.labels[i] === activeLabel) {
      out[i * 4] = Math.round(out[i * 4] * 0.7 + 255 * 0.3);
      out[i * 4 + 1] = Math.round(out[i * 4 + 1] * 0.7 + 255 * 0.3);
      out[i * 4 + 2] = Math.round(out[i * 4 + 2] * 0.7 + 255 * 0.3);
    }
  }
  return out;
}
