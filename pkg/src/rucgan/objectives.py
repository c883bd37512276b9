"""Training losses: perceptual, feature matching, hinge adversarial, total.

Layer averaging is uniform everywhere: the perceptual loss is the plain
mean over backbone stages of per-element L1 distances, and feature
matching is the mean over discriminator layers within a scale. Per-scale
terms are summed across the two discriminator scales.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Protocol, Sequence

import torch
import torch.nn as nn

from .errors import ConfigurationError


class PerceptualBackbone(Protocol):
    def extract(self, x: torch.Tensor) -> list[torch.Tensor]:
        """Ordered feature maps, shallow to deep, for a (N, 3, H, W) batch."""
        ...


class IdentityBackbone:
    """Single-layer backbone whose only feature map is the image itself.

    Keeps the losses testable and the smoke trainer runnable without
    pretrained weights; the perceptual loss degrades to plain pixel L1.
    """

    def extract(self, x: torch.Tensor) -> list[torch.Tensor]:
        return [x]


class VggFeatureBackbone(nn.Module):
    """Five early-to-deep VGG19 stages; weights come from an external file."""

    _IMAGENET_MEAN = (0.485, 0.456, 0.406)
    _IMAGENET_STD = (0.229, 0.224, 0.225)
    # Slice boundaries after each first ReLU of the five conv stages.
    _STAGE_ENDS = (2, 7, 12, 21, 30)

    def __init__(self, weights_path):
        super().__init__()
        from torchvision.models import vgg19

        weights_path = Path(weights_path)
        if not weights_path.is_file():
            raise ConfigurationError(f"backbone weights not found: {weights_path}")
        vgg = vgg19(weights=None)
        state = torch.load(weights_path, map_location="cpu", weights_only=True)
        vgg.load_state_dict(state)
        features = vgg.features
        start = 0
        self.stages = nn.ModuleList()
        for end in self._STAGE_ENDS:
            self.stages.append(nn.Sequential(*features[start:end]))
            start = end
        for p in self.parameters():
            p.requires_grad_(False)
        self.eval()
        mean = torch.tensor(self._IMAGENET_MEAN).view(1, 3, 1, 1)
        std = torch.tensor(self._IMAGENET_STD).view(1, 3, 1, 1)
        self.register_buffer("mean", mean)
        self.register_buffer("std", std)

    def extract(self, x: torch.Tensor) -> list[torch.Tensor]:
        x = ((x + 1.0) * 0.5 - self.mean) / self.std
        feats = []
        for stage in self.stages:
            x = stage(x)
            feats.append(x)
        return feats


def load_backbone(spec: str | None) -> PerceptualBackbone:
    """"identity" (or None) -> IdentityBackbone, anything else -> VGG weights path."""
    if spec is None or spec == "identity":
        return IdentityBackbone()
    return VggFeatureBackbone(spec)


@dataclass
class LossWeights:
    perceptual: float = 10.0
    feature_matching: float = 10.0

    def __post_init__(self):
        if self.perceptual < 0 or self.feature_matching < 0:
            raise ValueError("loss weights must be nonnegative")


def perceptual_loss(x: torch.Tensor, y: torch.Tensor,
                    backbone: PerceptualBackbone) -> torch.Tensor:
    """Mean over backbone layers of per-element L1 feature distance."""
    if backbone is None:
        raise ConfigurationError("perceptual loss requires a backbone")
    if x.shape != y.shape:
        raise ValueError(f"shape mismatch {tuple(x.shape)} vs {tuple(y.shape)}")
    feats_x = backbone.extract(x)
    feats_y = backbone.extract(y)
    total = x.new_zeros(())
    for fx, fy in zip(feats_x, feats_y):
        total = total + (fx - fy).abs().mean()
    return total / len(feats_x)


def feature_matching_loss(real_feats: Sequence[torch.Tensor],
                          fake_feats: Sequence[torch.Tensor]) -> torch.Tensor:
    """Mean over layers of per-element L1 distance, one discriminator scale.

    Real features are treated as constants so gradients reach only the
    generator path.
    """
    if len(real_feats) != len(fake_feats):
        raise ValueError(f"feature lists differ in length: {len(real_feats)} vs {len(fake_feats)}")
    total = fake_feats[0].new_zeros(())
    for real, fake in zip(real_feats, fake_feats):
        if real.shape != fake.shape:
            raise ValueError(f"feature shape mismatch {tuple(real.shape)} vs {tuple(fake.shape)}")
        total = total + (real.detach() - fake).abs().mean()
    return total / len(fake_feats)


def _as_list(logits) -> list[torch.Tensor]:
    return list(logits) if isinstance(logits, (list, tuple)) else [logits]


def hinge_d_loss(real_logits, fake_logits) -> torch.Tensor:
    """Discriminator hinge: push real patches above +1 and fake below -1.

    Patch positions are averaged within a scale; scales are summed.
    """
    real_logits = _as_list(real_logits)
    fake_logits = _as_list(fake_logits)
    total = real_logits[0].new_zeros(())
    for real, fake in zip(real_logits, fake_logits):
        total = total + torch.relu(1.0 - real).mean() + torch.relu(1.0 + fake).mean()
    return total


def hinge_g_loss(fake_logits) -> torch.Tensor:
    """Generator hinge: maximize discriminator output on fakes, summed over scales."""
    fake_logits = _as_list(fake_logits)
    total = fake_logits[0].new_zeros(())
    for fake in fake_logits:
        total = total - fake.mean()
    return total


@dataclass
class GeneratorLossParts:
    perceptual: torch.Tensor
    feature_matching: list[torch.Tensor]  # one entry per discriminator scale
    adversarial: list[torch.Tensor]  # one entry per discriminator scale


def total_g_loss(parts: GeneratorLossParts, weights: LossWeights) -> torch.Tensor:
    """Weighted perceptual term plus per-scale (weighted FM + adversarial) sums."""
    total = weights.perceptual * parts.perceptual
    for fm, adv in zip(parts.feature_matching, parts.adversarial):
        total = total + weights.feature_matching * fm + adv
    return total
