"""Palette-conditioned normalization layers for the generator.

The normalization standardizes activations per channel over the whole
batch, then applies a spatially varying affine modulation whose scale and
shift maps are predicted from the semantic style map (each label's palette
color broadcast into its mask region).
"""

from __future__ import annotations

import torch
import torch.nn as nn
import torch.nn.functional as F

from .errors import DimensionError, LabelRangeError


def batch_style_map(palette: torch.Tensor, mask: torch.Tensor, num_labels: int) -> torch.Tensor:
    """Batched semantic sampling: (N, s, 3) palette + (N, H, W) mask -> (N, 3s, H, W).

    Block ``l`` occupies channels [3l, 3l+3) and holds palette[:, l] where
    mask == l, zeros elsewhere.
    """
    n, h, w = mask.shape
    onehot = F.one_hot(mask, num_labels).permute(0, 3, 1, 2).to(palette.dtype)
    planes = torch.einsum("nlhw,nlc->nlchw", onehot, palette)
    return planes.reshape(n, 3 * num_labels, h, w)


def _check_inputs(x, palette, mask, num_labels):
    if mask.shape[-2:] != x.shape[-2:]:
        raise DimensionError(
            f"mask spatial size {tuple(mask.shape[-2:])} != activation size {tuple(x.shape[-2:])}"
        )
    if palette.ndim != 3 or palette.shape[1] != num_labels or palette.shape[2] != 3:
        raise LabelRangeError(
            f"palette must be (N, {num_labels}, 3), got {tuple(palette.shape)}"
        )


class PaletteNorm(nn.Module):
    """Channel standardization modulated by palette-colored mask regions.

    Optional single-channel noise is added to the input first, scaled by a
    learned per-channel gain initialized to zero so training starts
    noise-free.
    """

    def __init__(self, num_channels: int, num_labels: int, hidden: int = 128,
                 eps: float = 1e-5):
        super().__init__()
        if eps <= 0:
            raise ValueError("eps must be positive")
        self.num_channels = num_channels
        self.num_labels = num_labels
        self.eps = eps
        self.shared = nn.Sequential(
            nn.Conv2d(3 * num_labels, hidden, kernel_size=3, padding=1),
            nn.ReLU(),
        )
        self.gamma_conv = nn.Conv2d(hidden, num_channels, kernel_size=3, padding=1)
        self.beta_conv = nn.Conv2d(hidden, num_channels, kernel_size=3, padding=1)
        self.noise_scale = nn.Parameter(torch.zeros(num_channels))
        # Start near plain standardization: scale map ~= 1, shift map ~= 0.
        nn.init.zeros_(self.gamma_conv.weight)
        nn.init.ones_(self.gamma_conv.bias)
        nn.init.zeros_(self.beta_conv.weight)
        nn.init.zeros_(self.beta_conv.bias)

    def standardize(self, x: torch.Tensor, noise: torch.Tensor | None = None) -> torch.Tensor:
        """Noise injection plus per-channel batch standardization."""
        if noise is not None:
            x = x + self.noise_scale.view(1, -1, 1, 1) * noise
        mu = x.mean(dim=(0, 2, 3), keepdim=True)
        var = (x * x).mean(dim=(0, 2, 3), keepdim=True) - mu * mu
        sigma = var.clamp_min(0.0).sqrt().clamp_min(self.eps)
        return (x - mu) / sigma

    def forward(self, x: torch.Tensor, palette: torch.Tensor, mask: torch.Tensor,
                noise: torch.Tensor | None = None) -> torch.Tensor:
        _check_inputs(x, palette, mask, self.num_labels)
        normalized = self.standardize(x, noise)
        style = batch_style_map(palette, mask, self.num_labels)
        hidden = self.shared(style)
        gamma = self.gamma_conv(hidden)
        beta = self.beta_conv(hidden)
        return gamma * normalized + beta


class PaletteNormResBlock(nn.Module):
    """Residual block: three (norm, LeakyReLU, 3x3 conv) stages on the main path.

    The shortcut is a learned 1x1 conv only when the channel count changes;
    it carries no normalization, keeping exactly three norm layers per
    block. Fresh noise is drawn per norm layer from ``noise_source``.
    """

    def __init__(self, in_channels: int, out_channels: int, num_labels: int,
                 hidden: int = 128):
        super().__init__()
        mid = min(in_channels, out_channels)
        self.norm1 = PaletteNorm(in_channels, num_labels, hidden)
        self.conv1 = nn.Conv2d(in_channels, mid, kernel_size=3, padding=1)
        self.norm2 = PaletteNorm(mid, num_labels, hidden)
        self.conv2 = nn.Conv2d(mid, mid, kernel_size=3, padding=1)
        self.norm3 = PaletteNorm(mid, num_labels, hidden)
        self.conv3 = nn.Conv2d(mid, out_channels, kernel_size=3, padding=1)
        if in_channels != out_channels:
            self.shortcut = nn.Conv2d(in_channels, out_channels, kernel_size=1, bias=False)
        else:
            self.shortcut = None

    def _noise(self, x: torch.Tensor, source) -> torch.Tensor | None:
        if source is None:
            return None
        n, _, h, w = x.shape
        return torch.randn(n, 1, h, w, generator=source, dtype=x.dtype, device=x.device)

    def forward(self, x: torch.Tensor, palette: torch.Tensor, mask: torch.Tensor,
                noise_source: torch.Generator | None = None) -> torch.Tensor:
        h = self.conv1(F.leaky_relu(
            self.norm1(x, palette, mask, self._noise(x, noise_source)), 0.2))
        h = self.conv2(F.leaky_relu(
            self.norm2(h, palette, mask, self._noise(h, noise_source)), 0.2))
        h = self.conv3(F.leaky_relu(
            self.norm3(h, palette, mask, self._noise(h, noise_source)), 0.2))
        skip = x if self.shortcut is None else self.shortcut(x)
        return skip + h
