"""Dataset ingestion: manifests, PNG codecs, resizing, one-hot encoding.

A manifest is a JSON-lines file with one ``{"image": ..., "mask": ...}``
record per line, paths relative to the manifest file. Masks are stored as
8-bit single-channel PNGs whose pixel values are the label indices; a
separate label-map JSON carries display names and colors for the UI.
"""

from __future__ import annotations

import io
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image

from .errors import ConfigurationError, DimensionError, LabelRangeError
from .palette import SegmentationMask, default_color_bank


@dataclass
class SampleRecord:
    image_path: Path
    mask_path: Path


@dataclass
class DatasetManifest:
    records: list[SampleRecord]
    num_labels: int
    image_size: tuple[int, int]
    split: str = "train"

    def __len__(self) -> int:
        return len(self.records)

    def load(self, index: int) -> tuple[np.ndarray, SegmentationMask]:
        return load_sample(self.records[index], self.image_size, self.num_labels)


def load_manifest(path, num_labels: int, image_size, split: str = "train") -> DatasetManifest:
    """Read a JSONL manifest and verify every referenced file exists."""
    path = Path(path)
    if not path.is_file():
        raise ConfigurationError(f"manifest not found: {path}")
    records = []
    for lineno, line in enumerate(path.read_text().splitlines(), start=1):
        line = line.strip()
        if not line:
            continue
        rec = json.loads(line)
        image_path = (path.parent / rec["image"]).resolve()
        mask_path = (path.parent / rec["mask"]).resolve()
        for p in (image_path, mask_path):
            if not p.is_file():
                raise ConfigurationError(f"manifest line {lineno}: missing file {p}")
        records.append(SampleRecord(image_path, mask_path))
    h, w = (image_size, image_size) if isinstance(image_size, int) else tuple(image_size)
    return DatasetManifest(records, num_labels, (h, w), split)


def write_manifest(records, path) -> None:
    """Write records as JSONL with paths relative to the manifest."""
    path = Path(path)
    lines = []
    for rec in records:
        lines.append(json.dumps({
            "image": str(Path(rec.image_path).relative_to(path.parent)),
            "mask": str(Path(rec.mask_path).relative_to(path.parent)),
        }))
    path.write_text("\n".join(lines) + "\n")


def image_to_unit(arr: np.ndarray) -> np.ndarray:
    """(H, W, 3) uint8 -> (3, H, W) float32 in [-1, 1]."""
    return (arr.astype(np.float32) / 127.5 - 1.0).transpose(2, 0, 1)


def unit_to_image(img: np.ndarray) -> np.ndarray:
    """(3, H, W) float32 in [-1, 1] -> (H, W, 3) uint8."""
    arr = (np.asarray(img, dtype=np.float64).transpose(1, 2, 0) + 1.0) * 127.5
    return np.clip(np.rint(arr), 0, 255).astype(np.uint8)


def load_image_png(path_or_bytes, image_size=None) -> np.ndarray:
    """Decode an RGB PNG, optionally resizing bilinearly, into [-1, 1]."""
    src = io.BytesIO(path_or_bytes) if isinstance(path_or_bytes, bytes) else path_or_bytes
    with Image.open(src) as im:
        im = im.convert("RGB")
        if image_size is not None:
            h, w = image_size
            if im.size != (w, h):
                im = im.resize((w, h), Image.BILINEAR)
        return image_to_unit(np.asarray(im))


def save_image_png(img: np.ndarray, path) -> None:
    Image.fromarray(unit_to_image(img)).save(path, format="PNG")


def encode_image_png(img: np.ndarray) -> bytes:
    buf = io.BytesIO()
    Image.fromarray(unit_to_image(img)).save(buf, format="PNG")
    return buf.getvalue()


def load_mask_png(path_or_bytes, num_labels: int, image_size=None) -> SegmentationMask:
    """Decode a label-indexed grayscale PNG; resizing is nearest-neighbor only."""
    src = io.BytesIO(path_or_bytes) if isinstance(path_or_bytes, bytes) else path_or_bytes
    with Image.open(src) as im:
        if im.mode not in ("L", "P", "I", "I;16"):
            raise DimensionError(f"mask PNG must be single-channel, got mode {im.mode}")
        if im.mode not in ("L", "P"):
            im = im.convert("I")
        if image_size is not None:
            h, w = image_size
            if im.size != (w, h):
                im = im.resize((w, h), Image.NEAREST)
        labels = np.asarray(im).astype(np.int64)
    if labels.max(initial=0) >= num_labels:
        raise LabelRangeError(
            f"mask contains label {int(labels.max())} >= num_labels {num_labels}"
        )
    return SegmentationMask(labels, num_labels)


def save_mask_png(mask: SegmentationMask, path) -> None:
    if mask.num_labels > 256:
        raise LabelRangeError("8-bit mask PNGs support at most 256 labels")
    Image.fromarray(mask.labels.astype(np.uint8), mode="L").save(path, format="PNG")


def encode_mask_png(mask: SegmentationMask) -> bytes:
    buf = io.BytesIO()
    Image.fromarray(mask.labels.astype(np.uint8), mode="L").save(buf, format="PNG")
    return buf.getvalue()


def load_sample(record: SampleRecord, image_size, num_labels: int):
    """Load one (image, mask) pair resized to ``image_size`` (H, W)."""
    try:
        image = load_image_png(record.image_path, image_size)
    except OSError as exc:
        raise ConfigurationError(f"unreadable image {record.image_path}: {exc}") from exc
    try:
        mask = load_mask_png(record.mask_path, num_labels, image_size)
    except OSError as exc:
        raise ConfigurationError(f"unreadable mask {record.mask_path}: {exc}") from exc
    return image, mask


def one_hot(mask: SegmentationMask, num_labels: int | None = None) -> np.ndarray:
    """Indicator encoding of a label mask, shape (s, H, W) float32."""
    s = mask.num_labels if num_labels is None else num_labels
    if mask.labels.max(initial=0) >= s:
        raise LabelRangeError(f"mask label exceeds {s} channels")
    planes = mask.labels[None, :, :] == np.arange(s)[:, None, None]
    return planes.astype(np.float32)


def default_label_map(num_labels: int) -> list[dict]:
    """Fallback id -> name/display-color table cycling the color bank."""
    bank = default_color_bank().entries
    return [
        {"id": i, "name": f"label {i}", "color": list(bank[i % len(bank)][1])}
        for i in range(num_labels)
    ]


def load_label_map(path, num_labels: int) -> list[dict]:
    entries = json.loads(Path(path).read_text())
    if len(entries) != num_labels:
        raise ConfigurationError(
            f"label map has {len(entries)} entries, expected {num_labels}"
        )
    try:
        return [
            {"id": int(e["id"]), "name": str(e["name"]), "color": [int(v) for v in e["color"]]}
            for e in entries
        ]
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigurationError(f"label map entries need id, name, color: {exc}") from exc
