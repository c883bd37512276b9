"""HTTP service: synthesis, palette extraction, color bank, optional segmentation.

One model per process. Inference runs behind a lock so concurrent requests
reach the generator strictly one at a time; the HTTP layer itself stays
concurrent. Palettes cross the wire as [0, 255] integers and are converted at
this boundary — everything behind it works in [-1, 1].
"""

from __future__ import annotations

import base64
import binascii
import threading
import time
from collections import deque
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from fastapi import FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware
from pydantic import BaseModel

from .dataio import (default_label_map, encode_image_png, encode_mask_png,
                     load_image_png, load_label_map, load_mask_png)
from .errors import DimensionError, LabelRangeError
from .models import Generator, synthesize_image
from .palette import (ColorBank, PaletteVector, SegmentationMask,
                      bank_rgb_to_unit, default_color_bank, extract_palette,
                      unit_rgb_to_bank)
from .trainer import TrainConfig, load_generator

DEFAULT_SEED = 1234

# Plugin contract: takes a (3, H, W) float image in [-1, 1], returns an
# (H, W) integer label grid.
Segmenter = Callable[[np.ndarray], np.ndarray]


class SynthesisRequest(BaseModel):
    mask: str
    palette: list[list[int]]
    seed: int | None = None
    size: int | None = None


class ExtractRequest(BaseModel):
    image: str
    mask: str


class SegmentRequest(BaseModel):
    image: str


@dataclass
class ServerState:
    """Everything the endpoints share: the loaded model and its metadata."""

    generator: Generator | None = None
    model_config: TrainConfig | None = None
    checkpoint_id: str | None = None
    num_labels: int = 19
    label_map: list[dict] | None = None
    color_bank: ColorBank = field(default_factory=default_color_bank)
    segmenter: Segmenter | None = None
    default_seed: int = DEFAULT_SEED

    def __post_init__(self):
        if self.model_config is not None:
            self.num_labels = self.model_config.num_labels
        if self.label_map is None:
            self.label_map = default_label_map(self.num_labels)
        self.inference_lock = threading.Lock()
        self.latencies_ms: deque[float] = deque(maxlen=256)

    @classmethod
    def from_checkpoint(cls, path, label_map_path=None,
                        segmenter: Segmenter | None = None) -> "ServerState":
        generator, config = load_generator(path)
        label_map = None
        if label_map_path is not None:
            label_map = load_label_map(label_map_path, config.num_labels)
        return cls(
            generator=generator,
            model_config=config,
            checkpoint_id=str(path),
            label_map=label_map,
            segmenter=segmenter,
        )

    @property
    def image_size(self) -> tuple[int, int] | None:
        return None if self.model_config is None else tuple(self.model_config.image_size)


def _bad_request(field_name: str, message: str) -> HTTPException:
    return HTTPException(400, detail={"field": field_name, "message": message})


def _decode_b64(field_name: str, payload: str) -> bytes:
    try:
        return base64.b64decode(payload, validate=True)
    except (binascii.Error, ValueError) as exc:
        raise _bad_request(field_name, f"invalid base64: {exc}") from exc


def _decode_mask(data: bytes, num_labels: int, size=None) -> SegmentationMask:
    try:
        return load_mask_png(data, num_labels, image_size=size)
    except LabelRangeError as exc:
        raise HTTPException(422, detail={"field": "mask", "message": str(exc)}) from exc
    except (DimensionError, OSError, ValueError) as exc:
        raise _bad_request("mask", f"undecodable mask PNG: {exc}") from exc


def _decode_image(field_name: str, data: bytes) -> np.ndarray:
    try:
        return load_image_png(data)
    except (OSError, ValueError) as exc:
        raise _bad_request(field_name, f"undecodable image PNG: {exc}") from exc


def create_app(state: ServerState) -> FastAPI:
    app = FastAPI(title="referenceless color-controllable synthesis server")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )

    @app.get("/api/health")
    def health() -> dict:
        return {
            "status": "ok" if state.generator is not None else "no_model",
            "checkpoint_id": state.checkpoint_id,
            "num_labels": state.num_labels,
            "image_size": list(state.image_size) if state.image_size else None,
        }

    @app.get("/api/colorbank")
    def colorbank() -> list[dict]:
        return state.color_bank.to_json()

    @app.get("/api/labels")
    def labels() -> list[dict]:
        return state.label_map

    @app.post("/api/synthesize")
    def synthesize(req: SynthesisRequest) -> dict:
        if state.generator is None:
            raise HTTPException(409, detail="no model loaded; start the server with a checkpoint")
        s = state.num_labels
        if len(req.palette) != s:
            raise _bad_request("palette", f"expected {s} color entries, got {len(req.palette)}")
        for i, entry in enumerate(req.palette):
            if len(entry) != 3 or any(not 0 <= int(v) <= 255 for v in entry):
                raise _bad_request("palette", f"entry {i} is not an RGB triple in [0, 255]")
        if req.size is not None and req.size < 1:
            raise _bad_request("size", "size must be a positive integer")

        size = (req.size, req.size) if req.size is not None else state.image_size
        mask = _decode_mask(_decode_b64("mask", req.mask), s, size=size)
        palette = PaletteVector(bank_rgb_to_unit(np.asarray(req.palette)),
                                np.ones(s, dtype=bool))
        seed = state.default_seed if req.seed is None else req.seed

        started = time.perf_counter()
        with state.inference_lock:
            try:
                out = synthesize_image(state.generator, mask, palette, seed=seed)
            except DimensionError as exc:
                raise _bad_request("size", str(exc)) from exc
        latency_ms = (time.perf_counter() - started) * 1000.0
        state.latencies_ms.append(latency_ms)
        return {
            "image": base64.b64encode(encode_image_png(out)).decode("ascii"),
            "latency_ms": latency_ms,
        }

    @app.post("/api/palette/extract")
    def palette_extract(req: ExtractRequest) -> dict:
        image = _decode_image("image", _decode_b64("image", req.image))
        mask = _decode_mask(_decode_b64("mask", req.mask), state.num_labels)
        try:
            extracted = extract_palette(image, mask)
        except DimensionError as exc:
            raise _bad_request("mask", str(exc)) from exc
        return {
            "palette": unit_rgb_to_bank(extracted.colors).tolist(),
            "present": [bool(p) for p in extracted.present],
        }

    @app.post("/api/segment")
    def segment(req: SegmentRequest) -> dict:
        if state.segmenter is None:
            raise HTTPException(
                501,
                detail="no segmentation plugin configured; supply a mask directly "
                       "or start the server with a segmenter",
            )
        image = _decode_image("image", _decode_b64("image", req.image))
        try:
            labels_grid = np.asarray(state.segmenter(image))
        except Exception as exc:
            raise HTTPException(502, detail=f"segmentation plugin failed: {exc}") from exc
        if labels_grid.ndim != 2 or not np.issubdtype(labels_grid.dtype, np.integer):
            raise HTTPException(
                502, detail=f"plugin returned {labels_grid.dtype} array of shape "
                            f"{labels_grid.shape}, expected 2-D integer labels")
        if labels_grid.min(initial=0) < 0 or labels_grid.max(initial=0) >= state.num_labels:
            raise HTTPException(
                502, detail=f"plugin produced label {int(labels_grid.max())} outside "
                            f"[0, {state.num_labels})")
        mask = SegmentationMask(labels_grid.astype(np.int64), state.num_labels)
        return {"mask": base64.b64encode(encode_mask_png(mask)).decode("ascii")}

    return app


def run_server(state: ServerState, host: str = "127.0.0.1", port: int = 8000) -> None:
    import uvicorn

    uvicorn.run(create_app(state), host=host, port=port)
