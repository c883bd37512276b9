"""Hue-only color jitter plus label-restricted semantic color mixing.

Training-time augmentation that shifts every pixel's hue by one shared
random amount, then keeps the original pixels on a randomly chosen half of
the labels present in the mask. Brightness, contrast, and saturation are
deliberately left untouched so chosen colors survive the jitter.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, ParameterError
from .palette import SegmentationMask


@dataclass
class MixSelection:
    """The labels that keep their original pixels, plus their indicator grid."""

    selected: frozenset[int]
    indicator: np.ndarray  # (H, W) bool, True where mask label is selected

    @classmethod
    def from_mask(cls, mask: SegmentationMask, selected) -> "MixSelection":
        selected = frozenset(int(l) for l in selected)
        indicator = np.isin(mask.labels, list(selected))
        return cls(selected, indicator)


def _rotate_hue_unit(unit: np.ndarray, delta: float) -> np.ndarray:
    """Shift the hue of a (3, H, W) float64 image in [0, 1] by ``delta`` turns.

    Standard max/min hue extraction followed by the chroma sector
    construction, entirely in double precision. Ties resolve toward the red
    then green channel, matching the textbook piecewise definition.
    """
    r, g, b = unit
    mx = np.maximum(np.maximum(r, g), b)
    mn = np.minimum(np.minimum(r, g), b)
    chroma = mx - mn
    safe_chroma = np.where(chroma > 0.0, chroma, 1.0)
    hue = np.where(
        chroma == 0.0,
        0.0,
        np.where(
            mx == r,
            ((g - b) / safe_chroma) % 6.0,
            np.where(mx == g, (b - r) / safe_chroma + 2.0, (r - g) / safe_chroma + 4.0),
        ),
    )
    hue = (hue / 6.0 + delta) % 1.0
    sat = np.where(mx > 0.0, chroma / np.where(mx > 0.0, mx, 1.0), 0.0)

    hp = hue * 6.0
    c = mx * sat
    x = c * (1.0 - np.abs(hp % 2.0 - 1.0))
    m = mx - c
    zero = np.zeros_like(c)
    # non-finite pixels stay non-finite through c/x/m; route them to sector 0
    # so the integer cast below is defined
    sector = np.where(np.isfinite(hp), hp, 0.0).astype(np.int64) % 6
    r_out = np.choose(sector, (c, x, zero, zero, x, c))
    g_out = np.choose(sector, (x, c, c, x, zero, zero))
    b_out = np.choose(sector, (zero, zero, x, c, c, x))
    return np.stack((r_out, g_out, b_out)) + m


def hue_jitter(image: np.ndarray, delta: float) -> np.ndarray:
    """Rotate every pixel's hue by ``delta`` (fraction of the hue wheel).

    Saturation and value are unchanged; a zero delta returns the input
    exactly. The rotation runs in float64 so the float32 result is exact up
    to the final cast.
    """
    if not -0.5 <= delta <= 0.5:
        raise ParameterError(f"hue delta must lie in [-0.5, 0.5], got {delta}")
    image = np.asarray(image, dtype=np.float32)
    if image.ndim != 3 or image.shape[0] != 3:
        raise DimensionError(f"image must be (3, H, W), got {image.shape}")
    if delta == 0.0:
        return image.copy()
    unit = (image.astype(np.float64) + 1.0) * 0.5
    shifted = _rotate_hue_unit(np.clip(unit, 0.0, 1.0), delta) * 2.0 - 1.0
    return np.clip(shifted, -1.0, 1.0).astype(np.float32)


def select_labels(mask: SegmentationMask, rng: np.random.Generator) -> MixSelection:
    """Uniformly pick floor(L/2) of the L labels present in the mask."""
    present = mask.present_labels()
    k = len(present) // 2
    chosen = rng.choice(present, size=k, replace=False) if k else np.empty(0, dtype=int)
    return MixSelection.from_mask(mask, chosen)


def semantic_color_mix(
    image: np.ndarray,
    mask: SegmentationMask,
    rng: np.random.Generator,
) -> tuple[np.ndarray, float, MixSelection]:
    """Hue-jitter the image everywhere except on a random half of the labels.

    One delta ~ Uniform[-0.5, 0.5] is drawn for the whole image. Selected
    labels keep the original pixels bit-for-bit; the rest take the jittered
    ones. Returns (mixed image, delta, selection) so callers can log and
    replay the draw.
    """
    image = np.asarray(image, dtype=np.float32)
    if image.ndim != 3 or image.shape[0] != 3:
        raise DimensionError(f"image must be (3, H, W), got {image.shape}")
    if image.shape[1:] != mask.shape:
        raise DimensionError(
            f"image spatial size {image.shape[1:]} != mask size {mask.shape}"
        )
    delta = float(rng.uniform(-0.5, 0.5))
    selection = select_labels(mask, rng)
    jittered = hue_jitter(image, delta)
    mixed = np.where(selection.indicator[None, :, :], image, jittered)
    return mixed, delta, selection
