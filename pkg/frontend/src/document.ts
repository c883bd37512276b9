/**
 * Editable canvas document: a label grid plus the colors chosen for each
 * label and a bounded undo/redo history.
 *
 * The mask is stored row major in a Uint8Array, one label id per cell.
 * Every mutation that should be undoable goes through beginEdit(), which
 * snapshots the grid once. Tools call beginEdit() exactly once per user
 * gesture so a stroke or fill is a single history entry.
 */

export interface RGB {
  r: number;
  g: number;
  b: number;
}

export interface MaskGrid {
  width: number;
  height: number;
  labels: Uint8Array;
}

/** Deepest undo depth kept; must stay comfortably above 20 steps. */
export const HISTORY_LIMIT = 64;

function checkChannel(value: number, name: string): number {
  if (!Number.isInteger(value) || value < 0 || value > 255) {
    throw new RangeError(`${name} must be an integer in [0, 255], got ${value}`);
  }
  return value;
}

export function rgb(r: number, g: number, b: number): RGB {
  return { r: checkChannel(r, "r"), g: checkChannel(g, "g"), b: checkChannel(b, "b") };
}

/** Evenly spaced fallback colors for labels the server did not name. */
export function defaultColors(numLabels: number): RGB[] {
  const out: RGB[] = [];
  for (let i = 0; i < numLabels; i++) {
    const hue = (i * 360) / Math.max(numLabels, 1);
    out.push(hsvToRgb(hue, 0.65, 0.9));
  }
  return out;
}

function hsvToRgb(hueDeg: number, s: number, v: number): RGB {
  const c = v * s;
  const hp = (((hueDeg % 360) + 360) % 360) / 60;
  const x = c * (1 - Math.abs((hp % 2) - 1));
  let r = 0;
  let g = 0;
  let b = 0;
  if (hp < 1) [r, g, b] = [c, x, 0];
  else if (hp < 2) [r, g, b] = [x, c, 0];
  else if (hp < 3) [r, g, b] = [0, c, x];
  else if (hp < 4) [r, g, b] = [0, x, c];
  else if (hp < 5) [r, g, b] = [x, 0, c];
  else [r, g, b] = [c, 0, x];
  const m = v - c;
  return rgb(Math.round((r + m) * 255), Math.round((g + m) * 255), Math.round((b + m) * 255));
}

export class CanvasDocument {
  readonly width: number;
  readonly height: number;
  readonly numLabels: number;

  private mask: Uint8Array;
  private colors: RGB[];
  private undoStack: Uint8Array[] = [];
  private redoStack: Uint8Array[] = [];

  activeLabel = 0;
  /** Data URL of the most recent synthesis, if any. */
  resultImage: string | null = null;
  /** True whenever the mask or palette changed after the last synthesis. */
  resultStale = false;

  constructor(width: number, height: number, numLabels: number, colors?: RGB[]) {
    if (!Number.isInteger(width) || !Number.isInteger(height) || width < 1 || height < 1) {
      throw new RangeError(`canvas size must be positive integers, got ${width}x${height}`);
    }
    if (!Number.isInteger(numLabels) || numLabels < 1 || numLabels > 256) {
      throw new RangeError(`numLabels must be in [1, 256], got ${numLabels}`);
    }
    this.width = width;
    this.height = height;
    this.numLabels = numLabels;
    this.mask = new Uint8Array(width * height);
    const chosen = colors ?? defaultColors(numLabels);
    if (chosen.length !== numLabels) {
      throw new RangeError(`expected ${numLabels} colors, got ${chosen.length}`);
    }
    this.colors = chosen.map((c) => rgb(c.r, c.g, c.b));
  }

  checkLabel(label: number): number {
    if (!Number.isInteger(label) || label < 0 || label >= this.numLabels) {
      throw new RangeError(`label ${label} out of range [0, ${this.numLabels})`);
    }
    return label;
  }

  inBounds(x: number, y: number): boolean {
    return x >= 0 && y >= 0 && x < this.width && y < this.height;
  }

  label(x: number, y: number): number {
    if (!this.inBounds(x, y)) {
      throw new RangeError(`(${x}, ${y}) outside ${this.width}x${this.height} canvas`);
    }
    return this.mask[y * this.width + x];
  }

  /** Raw cell write; callers are responsible for history. Out of bounds is ignored. */
  setLabelUnchecked(x: number, y: number, label: number): void {
    if (this.inBounds(x, y)) {
      this.mask[y * this.width + x] = label;
    }
  }

  /** Copy of the current label grid. */
  maskGrid(): MaskGrid {
    return { width: this.width, height: this.height, labels: this.mask.slice() };
  }

  /** Replace the whole grid, e.g. after segmentation import. One history entry. */
  loadMask(grid: MaskGrid): void {
    if (grid.width !== this.width || grid.height !== this.height) {
      throw new RangeError(
        `mask is ${grid.width}x${grid.height}, canvas is ${this.width}x${this.height}`,
      );
    }
    if (grid.labels.length !== this.width * this.height) {
      throw new RangeError(`grid has ${grid.labels.length} cells, expected ${this.width * this.height}`);
    }
    for (const v of grid.labels) {
      this.checkLabel(v);
    }
    this.beginEdit();
    this.mask.set(grid.labels);
    this.markDirty();
  }

  color(label: number): RGB {
    return { ...this.colors[this.checkLabel(label)] };
  }

  /** Chosen colors for all labels, always numLabels long. */
  allColors(): RGB[] {
    return this.colors.map((c) => ({ ...c }));
  }

  setColor(label: number, value: RGB): void {
    this.checkLabel(label);
    this.colors[label] = rgb(value.r, value.g, value.b);
    this.markDirty();
  }

  replaceColors(values: RGB[]): void {
    if (values.length !== this.numLabels) {
      throw new RangeError(`expected ${this.numLabels} colors, got ${values.length}`);
    }
    this.colors = values.map((c) => rgb(c.r, c.g, c.b));
    this.markDirty();
  }

  /** Snapshot the grid before a mutation burst. One call per gesture. */
  beginEdit(): void {
    this.undoStack.push(this.mask.slice());
    if (this.undoStack.length > HISTORY_LIMIT) {
      this.undoStack.shift();
    }
    this.redoStack.length = 0;
  }

  markDirty(): void {
    this.resultStale = true;
  }

  setResult(dataUrl: string): void {
    this.resultImage = dataUrl;
    this.resultStale = false;
  }

  get undoDepth(): number {
    return this.undoStack.length;
  }

  get redoDepth(): number {
    return this.redoStack.length;
  }

  undo(): boolean {
    const prev = this.undoStack.pop();
    if (prev === undefined) {
      return false;
    }
    this.redoStack.push(this.mask.slice());
    this.mask = prev;
    this.markDirty();
    return true;
  }

  redo(): boolean {
    const next = this.redoStack.pop();
    if (next === undefined) {
      return false;
    }
    this.undoStack.push(this.mask.slice());
    if (this.undoStack.length > HISTORY_LIMIT) {
      this.undoStack.shift();
    }
    this.mask = next;
    this.markDirty();
    return true;
  }
}
