/**
 * Browser shell wiring the pure modules to a three-pane layout: mask
 * editor, color-reflected preview, synthesized result. While dragging,
 * the stroke is previewed on an overlay canvas; the document only changes
 * at pointer-up, through the same gesture functions the tests cover.
 */

import { ApiError, BankColor, LabelInfo, StudioClient } from "./api.js";
import { bytesToBase64 } from "./bytes.js";
import { CanvasDocument, rgb } from "./document.js";
import { decodePng, encodeGrayPng } from "./png.js";
import { paintByPalette, paintMaskView } from "./render.js";
import { SynthesisScheduler } from "./scheduler.js";
import { brushStroke, paintFill, Point } from "./tools.js";

function $<T extends HTMLElement>(id: string): T {
  const el = document.getElementById(id);
  if (el === null) {
    throw new Error(`missing element #${id}`);
  }
  return el as T;
}

function toast(message: string, kind: "info" | "error" = "info"): void {
  const box = $<HTMLDivElement>("toasts");
  const item = document.createElement("div");
  item.className = `toast ${kind}`;
  item.textContent = message;
  box.appendChild(item);
  setTimeout(() => item.remove(), 5000);
}

function describeError(err: unknown): string {
  if (err instanceof ApiError) {
    return err.field !== null ? `${err.field}: ${err.message}` : err.message;
  }
  return String(err);
}

interface Studio {
  doc: CanvasDocument;
  client: StudioClient;
  scheduler: SynthesisScheduler;
  labels: LabelInfo[];
  bank: BankColor[];
  tool: "brush" | "fill";
  radius: number;
  seed: number;
}

function canvasPoint(canvas: HTMLCanvasElement, ev: PointerEvent, doc: CanvasDocument): Point {
  const rect = canvas.getBoundingClientRect();
  return {
    x: ((ev.clientX - rect.left) / rect.width) * doc.width,
    y: ((ev.clientY - rect.top) / rect.height) * doc.height,
  };
}

function refresh(studio: Studio): void {
  const { doc } = studio;
  const maskCanvas = $<HTMLCanvasElement>("mask-canvas");
  const reflectCanvas = $<HTMLCanvasElement>("reflect-canvas");
  for (const canvas of [maskCanvas, reflectCanvas, $<HTMLCanvasElement>("stroke-overlay")]) {
    canvas.width = doc.width;
    canvas.height = doc.height;
  }
  const colors = doc.allColors();
  const grid = doc.maskGrid();
  maskCanvas
    .getContext("2d")!
    .putImageData(new ImageData(paintMaskView(grid, colors, doc.activeLabel), doc.width, doc.height), 0, 0);
  reflectCanvas
    .getContext("2d")!
    .putImageData(new ImageData(paintByPalette(grid, colors), doc.width, doc.height), 0, 0);

  const result = $<HTMLImageElement>("result-image");
  if (doc.resultImage !== null) {
    result.src = doc.resultImage;
    result.style.display = "block";
  } else {
    result.style.display = "none";
  }
  $<HTMLSpanElement>("stale-badge").style.display = doc.resultStale && doc.resultImage ? "inline" : "none";
  $<HTMLButtonElement>("undo-button").disabled = doc.undoDepth === 0;
  $<HTMLButtonElement>("redo-button").disabled = doc.redoDepth === 0;
  renderLabelList(studio);
}

function renderLabelList(studio: Studio): void {
  const list = $<HTMLDivElement>("label-list");
  list.textContent = "";
  for (const info of studio.labels) {
    const row = document.createElement("div");
    row.className = "label-row" + (info.id === studio.doc.activeLabel ? " active" : "");
    const chosen = studio.doc.color(info.id);

    const pick = document.createElement("button");
    pick.className = "label-name";
    pick.textContent = `${info.id} ${info.name}`;
    pick.onclick = () => {
      studio.doc.activeLabel = info.id;
      refresh(studio);
    };

    const swatch = document.createElement("input");
    swatch.type = "color";
    swatch.value = `#${[chosen.r, chosen.g, chosen.b].map((v) => v.toString(16).padStart(2, "0")).join("")}`;
    swatch.title = "free color picker";
    swatch.oninput = () => {
      const v = swatch.value;
      studio.doc.setColor(info.id, rgb(parseInt(v.slice(1, 3), 16), parseInt(v.slice(3, 5), 16), parseInt(v.slice(5, 7), 16)));
      studio.scheduler.noteEdit();
      refresh(studio);
    };

    row.append(pick, swatch);
    list.appendChild(row);
  }

  const bankBox = $<HTMLDivElement>("bank-swatches");
  bankBox.textContent = "";
  for (const entry of studio.bank) {
    const b = document.createElement("button");
    b.className = "bank-swatch";
    b.title = `${entry.name} for label ${studio.doc.activeLabel}`;
    b.style.background = `rgb(${entry.rgb[0]}, ${entry.rgb[1]}, ${entry.rgb[2]})`;
    b.onclick = () => {
      studio.doc.setColor(studio.doc.activeLabel, rgb(entry.rgb[0], entry.rgb[1], entry.rgb[2]));
      studio.scheduler.noteEdit();
      refresh(studio);
    };
    bankBox.appendChild(b);
  }
}

function installPointerHandlers(studio: Studio): void {
  const overlay = $<HTMLCanvasElement>("stroke-overlay");
  let strokePoints: Point[] | null = null;

  const previewStroke = () => {
    const ctx = overlay.getContext("2d")!;
    ctx.clearRect(0, 0, overlay.width, overlay.height);
    if (strokePoints === null || strokePoints.length === 0) {
      return;
    }
    const c = studio.doc.color(studio.doc.activeLabel);
    ctx.strokeStyle = ctx.fillStyle = `rgba(${c.r}, ${c.g}, ${c.b}, 0.85)`;
    ctx.lineWidth = studio.radius * 2;
    ctx.lineCap = ctx.lineJoin = "round";
    ctx.beginPath();
    ctx.moveTo(strokePoints[0].x, strokePoints[0].y);
    for (const p of strokePoints.slice(1)) {
      ctx.lineTo(p.x, p.y);
    }
    ctx.stroke();
  };

  overlay.onpointerdown = (ev) => {
    const p = canvasPoint(overlay, ev, studio.doc);
    if (studio.tool === "fill") {
      const x = Math.floor(p.x);
      const y = Math.floor(p.y);
      if (studio.doc.inBounds(x, y) && paintFill(studio.doc, x, y, studio.doc.activeLabel) > 0) {
        studio.scheduler.noteEdit();
      }
      refresh(studio);
      return;
    }
    strokePoints = [p];
    overlay.setPointerCapture(ev.pointerId);
    previewStroke();
  };
  overlay.onpointermove = (ev) => {
    if (strokePoints !== null) {
      strokePoints.push(canvasPoint(overlay, ev, studio.doc));
      previewStroke();
    }
  };
  const finish = () => {
    if (strokePoints === null) {
      return;
    }
    const changed = brushStroke(studio.doc, strokePoints, studio.radius, studio.doc.activeLabel);
    strokePoints = null;
    overlay.getContext("2d")!.clearRect(0, 0, overlay.width, overlay.height);
    if (changed > 0) {
      studio.scheduler.noteEdit();
    }
    refresh(studio);
  };
  overlay.onpointerup = finish;
  overlay.onpointercancel = finish;
}

async function loadPhoto(studio: Studio, file: File): Promise<void> {
  const bytes = new Uint8Array(await file.arrayBuffer());
  const imageB64 = bytesToBase64(bytes);
  let grid;
  try {
    grid = await studio.client.segment(imageB64);
  } catch (err) {
    if (err instanceof ApiError && err.status === 501) {
      toast("no segmenter on the server; starting from a blank canvas instead", "info");
      return;
    }
    throw err;
  }
  studio.doc.loadMask(grid);
  try {
    const extracted = await studio.client.extractPalette(imageB64, grid);
    for (let i = 0; i < extracted.palette.length && i < studio.doc.numLabels; i++) {
      if (extracted.present[i]) {
        studio.doc.setColor(i, extracted.palette[i]);
      }
    }
  } catch (err) {
    toast(`palette extraction failed: ${describeError(err)}`, "error");
  }
  studio.scheduler.noteEdit();
  refresh(studio);
}

async function boot(): Promise<void> {
  const params = new URLSearchParams(window.location.search);
  const base = params.get("server") ?? "";
  const client = new StudioClient(base);

  const health = await client.health();
  if (health.status !== "ok") {
    toast("server has no model loaded; synthesis will return 409", "error");
  }
  const [labels, bank] = await Promise.all([client.labels(), client.colorbank()]);
  const size = Number(params.get("size") ?? "") || health.image_size?.[0] || 128;

  const doc = new CanvasDocument(
    size,
    size,
    health.num_labels,
    labels.map((l) => rgb(l.color[0], l.color[1], l.color[2])),
  );

  const studio: Studio = {
    doc,
    client,
    scheduler: null as unknown as SynthesisScheduler,
    labels,
    bank,
    tool: "brush",
    radius: Math.max(2, Math.round(size / 16)),
    seed: 1234,
  };

  studio.scheduler = new SynthesisScheduler(async (signal) => {
    const started = performance.now();
    const grid = doc.maskGrid();
    const palette = doc.allColors();
    try {
      const out = await client.synthesize(grid, palette, { seed: studio.seed, signal });
      doc.setResult(`data:image/png;base64,${out.imageBase64}`);
      const wall = performance.now() - started;
      $<HTMLSpanElement>("latency").textContent =
        `${wall.toFixed(0)} ms wall, ${out.latencyMs.toFixed(0)} ms inference`;
    } catch (err) {
      if (err instanceof DOMException && err.name === "AbortError") {
        return;
      }
      toast(`synthesis failed: ${describeError(err)}`, "error");
    }
    refresh(studio);
  });

  $<HTMLInputElement>("radius-input").oninput = (ev) => {
    studio.radius = Number((ev.target as HTMLInputElement).value);
  };
  $<HTMLInputElement>("seed-input").value = String(studio.seed);
  $<HTMLInputElement>("seed-input").onchange = (ev) => {
    studio.seed = Number((ev.target as HTMLInputElement).value) | 0;
    studio.scheduler.noteEdit();
  };
  $<HTMLButtonElement>("tool-brush").onclick = () => {
    studio.tool = "brush";
  };
  $<HTMLButtonElement>("tool-fill").onclick = () => {
    studio.tool = "fill";
  };
  $<HTMLButtonElement>("undo-button").onclick = () => {
    if (doc.undo()) {
      studio.scheduler.noteEdit();
    }
    refresh(studio);
  };
  $<HTMLButtonElement>("redo-button").onclick = () => {
    if (doc.redo()) {
      studio.scheduler.noteEdit();
    }
    refresh(studio);
  };
  document.addEventListener("keydown", (ev) => {
    if ((ev.ctrlKey || ev.metaKey) && ev.key.toLowerCase() === "z") {
      ev.preventDefault();
      if (ev.shiftKey ? doc.redo() : doc.undo()) {
        studio.scheduler.noteEdit();
      }
      refresh(studio);
    }
  });
  $<HTMLButtonElement>("synthesize-button").onclick = () => studio.scheduler.requestNow();

  $<HTMLButtonElement>("export-mask").onclick = () => {
    const grid = doc.maskGrid();
    const png = encodeGrayPng(grid.width, grid.height, grid.labels);
    const a = document.createElement("a");
    a.href = `data:image/png;base64,${bytesToBase64(png)}`;
    a.download = "mask.png";
    a.click();
  };
  $<HTMLInputElement>("import-mask").onchange = async (ev) => {
    const file = (ev.target as HTMLInputElement).files?.[0];
    if (file === undefined) {
      return;
    }
    try {
      const decoded = await decodePng(new Uint8Array(await file.arrayBuffer()));
      if (decoded.channels !== 1) {
        throw new Error("mask PNG must be grayscale with one label id per pixel");
      }
      doc.loadMask({ width: decoded.width, height: decoded.height, labels: decoded.pixels });
      studio.scheduler.noteEdit();
      refresh(studio);
    } catch (err) {
      toast(`mask import failed: ${describeError(err)}`, "error");
    }
  };
  $<HTMLInputElement>("load-photo").onchange = async (ev) => {
    const file = (ev.target as HTMLInputElement).files?.[0];
    if (file !== undefined) {
      try {
        await loadPhoto(studio, file);
      } catch (err) {
        toast(`photo load failed: ${describeError(err)}`, "error");
      }
    }
  };

  installPointerHandlers(studio);
  refresh(studio);
  toast(`connected: ${health.checkpoint_id ?? "no checkpoint"}, ${health.num_labels} labels`);
}

boot().catch((err) => {
  toast(describeError(err), "error");
});
