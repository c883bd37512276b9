"""Generator and multi-scale patch discriminator.

The generator starts from the one-hot mask at a coarse base resolution and
alternates palette-normalized residual blocks with nearest-neighbor x2
upsampling; its only inputs are a mask, a palette, and optional noise — no
reference image anywhere. The discriminator judges (one-hot mask, image)
concatenations at two scales and exposes intermediate features for the
feature-matching loss.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
import torch
import torch.nn as nn
import torch.nn.functional as F
from torch.nn.utils import spectral_norm

from .errors import DimensionError, LabelRangeError
from .netblocks import PaletteNormResBlock
from .palette import PaletteVector, SegmentationMask

DEFAULT_STAGE_CHANNELS = (1024, 1024, 512, 256, 128, 64)


@dataclass
class GeneratorConfig:
    output_size: tuple[int, int] = (256, 256)
    num_labels: int = 19
    stage_channels: tuple[int, ...] = DEFAULT_STAGE_CHANNELS
    modulation_hidden: int = 128

    def __post_init__(self):
        self.output_size = tuple(self.output_size)
        self.stage_channels = tuple(self.stage_channels)
        if not self.stage_channels:
            raise ValueError("stage_channels must be nonempty")
        h, w = self.output_size
        f = 2 ** len(self.stage_channels)
        if h % f or w % f:
            raise DimensionError(
                f"output size {h}x{w} not divisible by 2^{len(self.stage_channels)}"
            )

    @property
    def base_resolution(self) -> tuple[int, int]:
        f = 2 ** len(self.stage_channels)
        return self.output_size[0] // f, self.output_size[1] // f

    def to_dict(self) -> dict:
        return {
            "output_size": list(self.output_size),
            "num_labels": self.num_labels,
            "stage_channels": list(self.stage_channels),
            "modulation_hidden": self.modulation_hidden,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "GeneratorConfig":
        return cls(
            output_size=tuple(d["output_size"]),
            num_labels=int(d["num_labels"]),
            stage_channels=tuple(d["stage_channels"]),
            modulation_hidden=int(d["modulation_hidden"]),
        )


@dataclass
class DiscriminatorConfig:
    num_scales: int = 2
    layers_per_scale: int = 4
    base_channels: int = 64

    def __post_init__(self):
        if self.num_scales < 1:
            raise ValueError("num_scales must be >= 1")

    def to_dict(self) -> dict:
        return {
            "num_scales": self.num_scales,
            "layers_per_scale": self.layers_per_scale,
            "base_channels": self.base_channels,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "DiscriminatorConfig":
        return cls(int(d["num_scales"]), int(d["layers_per_scale"]), int(d["base_channels"]))


class Generator(nn.Module):
    """Mask + palette -> RGB image in (-1, 1).

    Fully convolutional: any mask whose sides are divisible by
    2^len(stage_channels) works, with ``config.output_size`` as the
    training-time default.
    """

    def __init__(self, config: GeneratorConfig):
        super().__init__()
        self.config = config
        s = config.num_labels
        chans = config.stage_channels
        self.entry = nn.Conv2d(s, chans[0], kernel_size=3, padding=1)
        blocks = []
        prev = chans[0]
        for ch in chans:
            blocks.append(PaletteNormResBlock(prev, ch, s, config.modulation_hidden))
            prev = ch
        self.blocks = nn.ModuleList(blocks)
        self.to_rgb = nn.Conv2d(prev, 3, kernel_size=3, padding=1)

    def forward(self, mask: torch.Tensor, palette: torch.Tensor,
                noise_source: torch.Generator | None = None) -> torch.Tensor:
        if mask.ndim != 3:
            raise DimensionError(f"mask must be (N, H, W), got {tuple(mask.shape)}")
        n, h, w = mask.shape
        k = len(self.config.stage_channels)
        if h % (2 ** k) or w % (2 ** k):
            raise DimensionError(f"mask size {h}x{w} not divisible by 2^{k}")
        s = self.config.num_labels
        if int(mask.max()) >= s or int(mask.min()) < 0:
            raise LabelRangeError(f"mask labels outside [0, {s})")
        if palette.shape != (n, s, 3):
            raise LabelRangeError(f"palette must be ({n}, {s}, 3), got {tuple(palette.shape)}")

        base = mask[:, :: 2 ** k, :: 2 ** k]
        x = self.entry(F.one_hot(base, s).permute(0, 3, 1, 2).to(palette.dtype))
        for i, block in enumerate(self.blocks):
            step = 2 ** (k - i)
            x = block(x, palette, mask[:, ::step, ::step], noise_source)
            x = F.interpolate(x, scale_factor=2, mode="nearest")
        return torch.tanh(self.to_rgb(F.leaky_relu(x, 0.2)))


class ScaleOutput(NamedTuple):
    features: list[torch.Tensor]
    logits: torch.Tensor


class _PatchScale(nn.Module):
    """One patch-discriminator pyramid: stride-2 4x4 convs, then a logit map."""

    def __init__(self, in_channels: int, layers: int, base_channels: int):
        super().__init__()
        convs = []
        norms = []
        prev = in_channels
        ch = base_channels
        for i in range(layers):
            convs.append(spectral_norm(nn.Conv2d(prev, ch, kernel_size=4, stride=2, padding=1)))
            norms.append(nn.InstanceNorm2d(ch, affine=False) if i > 0 else nn.Identity())
            prev = ch
            ch = min(ch * 2, 512)
        self.convs = nn.ModuleList(convs)
        self.norms = nn.ModuleList(norms)
        self.logit_conv = spectral_norm(nn.Conv2d(prev, 1, kernel_size=3, padding=1))

    def forward(self, x: torch.Tensor) -> ScaleOutput:
        features = []
        for conv, norm in zip(self.convs, self.norms):
            x = F.leaky_relu(norm(conv(x)), 0.2)
            features.append(x)
        return ScaleOutput(features, self.logit_conv(x))


class MultiScaleDiscriminator(nn.Module):
    """Patch discriminators at full and half resolution over (mask, image)."""

    def __init__(self, num_labels: int, config: DiscriminatorConfig | None = None):
        super().__init__()
        self.config = config or DiscriminatorConfig()
        self.num_labels = num_labels
        in_channels = num_labels + 3
        self.scales = nn.ModuleList(
            _PatchScale(in_channels, self.config.layers_per_scale, self.config.base_channels)
            for _ in range(self.config.num_scales)
        )

    def minimum_input_size(self) -> int:
        # The deepest scale still needs >= 2x2 activations under its
        # per-sample normalization after every stride-2 layer.
        return 2 ** (self.config.layers_per_scale + self.config.num_scales)

    def forward(self, image: torch.Tensor, mask: torch.Tensor) -> list[ScaleOutput]:
        if image.shape[-2:] != mask.shape[-2:]:
            raise DimensionError(
                f"image size {tuple(image.shape[-2:])} != mask size {tuple(mask.shape[-2:])}"
            )
        min_size = self.minimum_input_size()
        if min(image.shape[-2:]) < min_size:
            raise DimensionError(
                f"input size {tuple(image.shape[-2:])} below the {min_size}x{min_size} "
                f"minimum for {self.config.num_scales} scales of "
                f"{self.config.layers_per_scale} stride-2 layers"
            )
        onehot = F.one_hot(mask, self.num_labels).permute(0, 3, 1, 2).to(image.dtype)
        x = torch.cat([onehot, image], dim=1)
        outputs = []
        for i, scale in enumerate(self.scales):
            if i > 0:
                x = F.avg_pool2d(x, kernel_size=3, stride=2, padding=1,
                                 count_include_pad=False)
            outputs.append(scale(x))
        return outputs


def count_parameters(model: nn.Module) -> int:
    """Total learnable scalar count."""
    return sum(p.numel() for p in model.parameters() if p.requires_grad)


def describe(model: nn.Module) -> dict:
    """Parameter counts for the model and its top-level children."""
    return {
        "class": type(model).__name__,
        "parameters": count_parameters(model),
        "children": {name: count_parameters(child) for name, child in model.named_children()},
    }


def synthesize_image(generator: Generator, mask: SegmentationMask,
                     palette: PaletteVector, seed: int | None = None) -> np.ndarray:
    """Run the generator on one mask/palette pair; returns (3, H, W) in [-1, 1].

    A fixed seed gives byte-identical output; seed=None disables noise
    injection entirely.
    """
    if palette.num_labels != generator.config.num_labels:
        raise LabelRangeError(
            f"palette has {palette.num_labels} entries, model expects "
            f"{generator.config.num_labels}"
        )
    noise_source = None
    if seed is not None:
        noise_source = torch.Generator().manual_seed(int(seed))
    mask_t = torch.from_numpy(np.ascontiguousarray(mask.labels))[None].long()
    palette_t = torch.from_numpy(palette.colors)[None]
    was_training = generator.training
    generator.eval()
    try:
        with torch.no_grad():
            out = generator(mask_t, palette_t, noise_source)
    finally:
        generator.train(was_training)
    return out[0].numpy()
