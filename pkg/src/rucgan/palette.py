"""Per-label representative colors, the color bank, and semantic style maps.

Images are float32 arrays of shape (3, H, W) with channel values in [-1, 1].
Label masks are integer arrays of shape (H, W). A palette holds one RGB
triple per label class; the style map broadcasts each label's color into
its mask region, one 3-channel block per label, concatenated channel-wise.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DimensionError, LabelRangeError


@dataclass
class SegmentationMask:
    """Integer label map plus the dataset's label-class count."""

    labels: np.ndarray
    num_labels: int

    def __post_init__(self):
        self.labels = np.asarray(self.labels)
        if not np.issubdtype(self.labels.dtype, np.integer):
            rounded = np.rint(self.labels)
            if self.labels.size and not np.array_equal(rounded, self.labels):
                raise DimensionError("mask labels must be integral")
            self.labels = rounded.astype(np.int64)
        if self.labels.ndim != 2 or self.labels.shape[0] < 1 or self.labels.shape[1] < 1:
            raise DimensionError(f"mask must be 2-D and nonempty, got shape {self.labels.shape}")
        if self.num_labels < 1:
            raise LabelRangeError(f"num_labels must be >= 1, got {self.num_labels}")
        lo, hi = int(self.labels.min()), int(self.labels.max())
        if lo < 0 or hi >= self.num_labels:
            raise LabelRangeError(
                f"mask labels span [{lo}, {hi}] outside [0, {self.num_labels})"
            )

    @property
    def shape(self) -> tuple[int, int]:
        return self.labels.shape

    def present_labels(self) -> np.ndarray:
        """Sorted array of label values that actually occur in the mask."""
        return np.unique(self.labels)


@dataclass
class PaletteVector:
    """One RGB triple per label class, channel values in [-1, 1].

    ``present[l]`` records whether label ``l`` was observed in the source the
    palette was extracted from; unobserved labels carry (0, 0, 0).
    """

    colors: np.ndarray
    present: np.ndarray

    def __post_init__(self):
        self.colors = np.asarray(self.colors, dtype=np.float32)
        self.present = np.asarray(self.present, dtype=bool)
        if self.colors.ndim != 2 or self.colors.shape[1] != 3:
            raise DimensionError(f"palette colors must be (s, 3), got {self.colors.shape}")
        if self.present.shape != (self.colors.shape[0],):
            raise DimensionError("present flags must align with palette length")
        if self.colors.size and (self.colors.min() < -1.0 or self.colors.max() > 1.0):
            raise LabelRangeError("palette channel values must lie in [-1, 1]")

    @property
    def num_labels(self) -> int:
        return self.colors.shape[0]

    def replace(self, label: int, rgb) -> "PaletteVector":
        """New palette with one entry overwritten (marked present)."""
        colors = self.colors.copy()
        colors[label] = np.asarray(rgb, dtype=np.float32)
        present = self.present.copy()
        present[label] = True
        return PaletteVector(colors, present)

    def to_json(self) -> dict:
        return {
            "num_labels": self.num_labels,
            "colors": [[float(c) for c in rgb] for rgb in self.colors],
            "present": [bool(p) for p in self.present],
        }

    @classmethod
    def from_json(cls, payload: dict) -> "PaletteVector":
        colors = np.asarray(payload["colors"], dtype=np.float32)
        present = np.asarray(payload.get("present", [True] * len(colors)), dtype=bool)
        pal = cls(colors, present)
        declared = payload.get("num_labels")
        if declared is not None and declared != pal.num_labels:
            raise LabelRangeError(
                f"palette declares num_labels={declared} but has {pal.num_labels} colors"
            )
        return pal

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_json(), indent=2))

    @classmethod
    def load(cls, path) -> "PaletteVector":
        return cls.from_json(json.loads(Path(path).read_text()))


def bank_rgb_to_unit(rgb) -> np.ndarray:
    """[0, 255] integer RGB -> [-1, 1] float RGB (the one conversion boundary)."""
    return np.asarray(rgb, dtype=np.float32) / 127.5 - 1.0


def unit_rgb_to_bank(rgb) -> np.ndarray:
    """[-1, 1] float RGB -> [0, 255] integer RGB, rounded and clipped."""
    scaled = (np.asarray(rgb, dtype=np.float64) + 1.0) * 127.5
    return np.clip(np.rint(scaled), 0, 255).astype(np.int64)


@dataclass
class ColorBank:
    """Named [0, 255] RGB colors users pick per-label styles from."""

    entries: list[tuple[str, tuple[int, int, int]]] = field(default_factory=list)

    def __post_init__(self):
        names = [name for name, _ in self.entries]
        if len(names) != len(set(names)):
            raise ValueError("color bank names must be unique")
        for name, rgb in self.entries:
            if len(rgb) != 3 or any(not (0 <= int(v) <= 255) for v in rgb):
                raise ValueError(f"color {name!r} has components outside [0, 255]")

    def names(self) -> list[str]:
        return [name for name, _ in self.entries]

    def rgb(self, name: str) -> tuple[int, int, int]:
        for entry_name, rgb in self.entries:
            if entry_name == name:
                return rgb
        raise KeyError(name)

    def unit_rgb(self, name: str) -> np.ndarray:
        return bank_rgb_to_unit(self.rgb(name))

    def to_json(self) -> list[dict]:
        return [{"name": name, "rgb": list(rgb)} for name, rgb in self.entries]

    @classmethod
    def from_json(cls, payload: list[dict]) -> "ColorBank":
        return cls([(e["name"], tuple(int(v) for v in e["rgb"])) for e in payload])


def default_color_bank() -> ColorBank:
    """Fixed bank: a 12-step hue wheel at full and half value, plus neutrals."""
    wheel = [
        ("red", (255, 0, 0)),
        ("orange", (255, 128, 0)),
        ("yellow", (255, 255, 0)),
        ("chartreuse", (128, 255, 0)),
        ("green", (0, 255, 0)),
        ("spring green", (0, 255, 128)),
        ("cyan", (0, 255, 255)),
        ("azure", (0, 128, 255)),
        ("blue", (0, 0, 255)),
        ("violet", (128, 0, 255)),
        ("magenta", (255, 0, 255)),
        ("rose", (255, 0, 128)),
    ]
    dark = [(f"dark {name}", (r // 2, g // 2, b // 2)) for name, (r, g, b) in wheel]
    neutrals = [
        ("black", (0, 0, 0)),
        ("dark gray", (64, 64, 64)),
        ("gray", (128, 128, 128)),
        ("light gray", (192, 192, 192)),
        ("white", (255, 255, 255)),
        ("brown", (139, 69, 19)),
        ("tan", (210, 180, 140)),
        ("navy", (0, 0, 96)),
    ]
    return ColorBank(wheel + dark + neutrals)


def extract_palette(image: np.ndarray, mask: SegmentationMask) -> PaletteVector:
    """Per-label mean color of ``image`` over each mask region.

    Labels absent from the mask get (0, 0, 0) and present=False.
    """
    image = np.asarray(image, dtype=np.float32)
    if image.ndim != 3 or image.shape[0] != 3:
        raise DimensionError(f"image must be (3, H, W), got {image.shape}")
    if image.shape[1:] != mask.shape:
        raise DimensionError(
            f"image spatial size {image.shape[1:]} != mask size {mask.shape}"
        )
    s = mask.num_labels
    flat_labels = mask.labels.reshape(-1)
    flat_pixels = image.reshape(3, -1)
    counts = np.bincount(flat_labels, minlength=s).astype(np.float64)
    sums = np.stack(
        [np.bincount(flat_labels, weights=flat_pixels[c].astype(np.float64), minlength=s)
         for c in range(3)],
        axis=1,
    )
    present = counts > 0
    colors = np.zeros((s, 3), dtype=np.float32)
    colors[present] = (sums[present] / counts[present, None]).astype(np.float32)
    # Channel means of in-range pixels can only drift out of [-1, 1] by round-off.
    return PaletteVector(np.clip(colors, -1.0, 1.0), present)


def semantic_sampling(palette: PaletteVector, mask: SegmentationMask) -> np.ndarray:
    """Broadcast palette colors into mask regions, one 3-channel block per label.

    Returns a (3*s, H, W) float32 array where block ``l`` holds palette[l]
    at positions labelled ``l`` and zeros elsewhere.
    """
    if palette.num_labels != mask.num_labels:
        raise LabelRangeError(
            f"palette has {palette.num_labels} entries, mask expects {mask.num_labels}"
        )
    s = mask.num_labels
    h, w = mask.shape
    onehot = mask.labels[None, :, :] == np.arange(s)[:, None, None]
    planes = onehot[:, None, :, :] * palette.colors[:, :, None, None]
    return planes.reshape(3 * s, h, w).astype(np.float32)


def render_palette_map(palette: PaletteVector, mask: SegmentationMask) -> np.ndarray:
    """Paint-by-palette rendering: pixel (y, x) = palette[mask[y, x]].

    Returns a (3, H, W) float32 image; this is what the style map collapses
    to when its label blocks are summed.
    """
    if palette.num_labels != mask.num_labels:
        raise LabelRangeError(
            f"palette has {palette.num_labels} entries, mask expects {mask.num_labels}"
        )
    return palette.colors[mask.labels].transpose(2, 0, 1).astype(np.float32)


def downsample_mask(mask: SegmentationMask, factor: int) -> SegmentationMask:
    """Nearest-neighbor label subsampling by a power-of-two factor.

    Keeps the top-left cell of each factor x factor block; labels are never
    blended.
    """
    if factor < 1 or (factor & (factor - 1)) != 0:
        raise DimensionError(f"factor must be a power of two, got {factor}")
    h, w = mask.shape
    if h % factor or w % factor:
        raise DimensionError(f"factor {factor} does not divide mask size {h}x{w}")
    if factor == 1:
        return SegmentationMask(mask.labels.copy(), mask.num_labels)
    return SegmentationMask(mask.labels[::factor, ::factor].copy(), mask.num_labels)
