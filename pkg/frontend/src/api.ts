/**
 * Typed client for the synthesis server. The studio talks to the model
 * exclusively through these six endpoints; nothing here mutates server
 * state, so any number of studio tabs can share one server.
 */

import { base64ToBytes, bytesToBase64 } from "./bytes.js";
import { MaskGrid, RGB } from "./document.js";
import { decodePng, encodeGrayPng } from "./png.js";

export interface HealthInfo {
  status: "ok" | "no_model";
  checkpoint_id: string | null;
  num_labels: number;
  image_size: [number, number] | null;
}

export interface BankColor {
  name: string;
  rgb: [number, number, number];
}

export interface LabelInfo {
  id: number;
  name: string;
  color: [number, number, number];
}

export interface SynthesisResult {
  /** Base64 PNG straight off the wire, usable as a data URL payload. */
  imageBase64: string;
  /** Server-side inference time; client wall time is measured by the caller. */
  latencyMs: number;
}

export interface ExtractResult {
  palette: RGB[];
  present: boolean[];
}

/** Error with enough structure for a toast: status code plus field/message. */
export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly field: string | null,
    message: string,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

function intoApiError(status: number, detail: unknown): ApiError {
  if (detail !== null && typeof detail === "object" && "message" in detail) {
    const d = detail as { field?: string; message: string };
    return new ApiError(status, d.field ?? null, String(d.message));
  }
  return new ApiError(status, null, typeof detail === "string" ? detail : `HTTP ${status}`);
}

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class StudioClient {
  constructor(
    readonly baseUrl: string,
    private readonly fetchFn: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    let response: Response;
    try {
      response = await this.fetchFn(`${this.baseUrl}${path}`, init);
    } catch (err) {
      if (err instanceof DOMException && err.name === "AbortError") {
        throw err;
      }
      throw new ApiError(0, null, `server unreachable: ${String(err)}`);
    }
    let body: unknown = null;
    try {
      body = await response.json();
    } catch {
      // non-JSON error bodies fall through with a generic message
    }
    if (!response.ok) {
      const detail =
        body !== null && typeof body === "object" && "detail" in body
          ? (body as { detail: unknown }).detail
          : body;
      throw intoApiError(response.status, detail);
    }
    return body as T;
  }

  private post<T>(path: string, payload: unknown, signal?: AbortSignal): Promise<T> {
    return this.request<T>(path, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(payload),
      signal,
    });
  }

  health(): Promise<HealthInfo> {
    return this.request<HealthInfo>("/api/health");
  }

  colorbank(): Promise<BankColor[]> {
    return this.request<BankColor[]>("/api/colorbank");
  }

  labels(): Promise<LabelInfo[]> {
    return this.request<LabelInfo[]>("/api/labels");
  }

  async synthesize(
    mask: MaskGrid,
    palette: RGB[],
    opts: { seed?: number; size?: number; signal?: AbortSignal } = {},
  ): Promise<SynthesisResult> {
    const payload: Record<string, unknown> = {
      mask: bytesToBase64(encodeGrayPng(mask.width, mask.height, mask.labels)),
      palette: palette.map((c) => [c.r, c.g, c.b]),
    };
    if (opts.seed !== undefined) payload.seed = opts.seed;
    if (opts.size !== undefined) payload.size = opts.size;
    const raw = await this.post<{ image: string; latency_ms: number }>(
      "/api/synthesize",
      payload,
      opts.signal,
    );
    return { imageBase64: raw.image, latencyMs: raw.latency_ms };
  }

  async extractPalette(imagePngBase64: string, mask: MaskGrid): Promise<ExtractResult> {
    const raw = await this.post<{ palette: [number, number, number][]; present: boolean[] }>(
      "/api/palette/extract",
      {
        image: imagePngBase64,
        mask: bytesToBase64(encodeGrayPng(mask.width, mask.height, mask.labels)),
      },
    );
    return {
      palette: raw.palette.map(([r, g, b]) => ({ r, g, b })),
      present: raw.present,
    };
  }

  /** Returns the decoded label grid; throws ApiError 501 when unconfigured. */
  async segment(imagePngBase64: string): Promise<MaskGrid> {
    const raw = await this.post<{ mask: string }>("/api/segment", { image: imagePngBase64 });
    const decoded = await decodePng(base64ToBytes(raw.mask));
    if (decoded.channels !== 1) {
      throw new ApiError(0, "mask", "server returned a non-grayscale mask");
    }
    return { width: decoded.width, height: decoded.height, labels: decoded.pixels };
  }
}
