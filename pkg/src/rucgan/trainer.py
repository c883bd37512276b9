"""Adversarial training loop: color-mix augmentation, TTUR Adam, checkpoints.

Each step jitters the batch with the semantic color mix, extracts the palette
from the jittered image (so the style input and the reconstruction target are
the same tensor), then runs one discriminator update followed by one generator
update. All randomness flows through two owned RNGs whose states ride along in
checkpoints, which is what makes an interrupted run resumable bit for bit.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import torch
from torch.optim import Adam

from .augment import semantic_color_mix
from .dataio import DatasetManifest, load_manifest
from .errors import CheckpointError, ConfigurationError, TrainingDiverged
from .models import (DEFAULT_STAGE_CHANNELS, Generator, GeneratorConfig,
                     MultiScaleDiscriminator, synthesize_image)
from .objectives import (GeneratorLossParts, LossWeights, feature_matching_loss,
                         hinge_d_loss, hinge_g_loss, load_backbone,
                         perceptual_loss, total_g_loss)
from .palette import extract_palette

CHECKPOINT_MAGIC = "RUCGAN-CKPT-1"


@dataclass
class TrainConfig:
    """Flat training configuration; the config file uses these exact keys."""

    manifest: str | None = None
    out_dir: str = "runs/default"
    num_labels: int = 19
    image_size: tuple[int, int] = (256, 256)
    stage_channels: tuple[int, ...] = DEFAULT_STAGE_CHANNELS
    modulation_hidden: int = 128
    lr_g: float = 0.0001
    lr_d: float = 0.0004
    adam_beta1: float = 0.5
    adam_beta2: float = 0.999
    batch_size: int = 1
    max_steps: int = 1000
    scm_enabled: bool = True
    checkpoint_every: int = 500
    seed: int = 1234
    backbone: str = "identity"
    lambda_perceptual: float = 10.0
    lambda_feature_matching: float = 10.0

    def __post_init__(self):
        if isinstance(self.image_size, int):
            self.image_size = (self.image_size, self.image_size)
        self.image_size = tuple(int(v) for v in self.image_size)
        self.stage_channels = tuple(int(c) for c in self.stage_channels)
        if self.lr_g <= 0 or self.lr_d <= 0:
            raise ConfigurationError("learning rates must be positive")
        if self.batch_size < 1:
            raise ConfigurationError("batch_size must be >= 1")
        if self.max_steps < 1:
            raise ConfigurationError("max_steps must be >= 1")
        if self.checkpoint_every < 1:
            raise ConfigurationError("checkpoint_every must be >= 1")
        if self.num_labels < 1:
            raise ConfigurationError("num_labels must be >= 1")
        if not self.stage_channels:
            raise ConfigurationError("stage_channels must name at least one stage")
        if self.lambda_perceptual < 0 or self.lambda_feature_matching < 0:
            raise ConfigurationError("loss weights must be nonnegative")

    def generator_config(self) -> GeneratorConfig:
        return GeneratorConfig(
            output_size=self.image_size,
            num_labels=self.num_labels,
            stage_channels=self.stage_channels,
            modulation_hidden=self.modulation_hidden,
        )

    def to_dict(self) -> dict:
        return {
            "manifest": self.manifest,
            "out_dir": self.out_dir,
            "num_labels": self.num_labels,
            "image_size": list(self.image_size),
            "stage_channels": list(self.stage_channels),
            "modulation_hidden": self.modulation_hidden,
            "lr_g": self.lr_g,
            "lr_d": self.lr_d,
            "adam_beta1": self.adam_beta1,
            "adam_beta2": self.adam_beta2,
            "batch_size": self.batch_size,
            "max_steps": self.max_steps,
            "scm_enabled": self.scm_enabled,
            "checkpoint_every": self.checkpoint_every,
            "seed": self.seed,
            "backbone": self.backbone,
            "lambda_perceptual": self.lambda_perceptual,
            "lambda_feature_matching": self.lambda_feature_matching,
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "TrainConfig":
        known = set(cls.__dataclass_fields__)
        unknown = set(payload) - known
        if unknown:
            raise ConfigurationError(f"unknown config keys: {sorted(unknown)}")
        return cls(**payload)


def load_train_config(path) -> TrainConfig:
    """Read a flat JSON config file."""
    path = Path(path)
    if not path.is_file():
        raise ConfigurationError(f"config file not found: {path}")
    try:
        payload = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"config file {path} is not valid JSON: {exc}") from exc
    if not isinstance(payload, dict):
        raise ConfigurationError(f"config file {path} must hold a JSON object")
    return TrainConfig.from_dict(payload)


class Trainer:
    """Owns the models, both optimizers, and every RNG the loop touches.

    The whole mutable state (step counter, parameter tensors, optimizer
    moments, RNG states) round-trips through save()/restore(), so a resumed
    run continues the exact loss trace of an uninterrupted one.
    """

    def __init__(self, config: TrainConfig, dataset: DatasetManifest | None = None):
        self.config = config
        if dataset is None and config.manifest is not None:
            dataset = load_manifest(config.manifest, config.num_labels, config.image_size)
        self.dataset = dataset
        torch.manual_seed(config.seed)
        self.generator = Generator(config.generator_config())
        self.discriminator = MultiScaleDiscriminator(config.num_labels)
        betas = (config.adam_beta1, config.adam_beta2)
        self.opt_g = Adam(self.generator.parameters(), lr=config.lr_g, betas=betas)
        self.opt_d = Adam(self.discriminator.parameters(), lr=config.lr_d, betas=betas)
        self.backbone = load_backbone(config.backbone)
        self.weights = LossWeights(config.lambda_perceptual, config.lambda_feature_matching)
        # data_rng drives batch sampling and the color-mix draws; noise_source
        # feeds the per-layer noise maps. Both are checkpointed.
        self.data_rng = np.random.default_rng(config.seed)
        self.noise_source = torch.Generator().manual_seed(config.seed)
        self.step = 0
        self._cache: dict[int, tuple] = {}

    # -- data ------------------------------------------------------------

    def _sample(self, index: int):
        if index not in self._cache:
            self._cache[index] = self.dataset.load(index)
        return self._cache[index]

    def next_batch(self) -> list:
        if self.dataset is None or len(self.dataset) == 0:
            raise ConfigurationError("no dataset configured for training")
        indices = self.data_rng.integers(0, len(self.dataset), size=self.config.batch_size)
        return [self._sample(int(i)) for i in indices]

    def _prepare_batch(self, batch):
        images, masks, palettes, deltas, label_sets = [], [], [], [], []
        for image, mask in batch:
            if self.config.scm_enabled:
                mixed, delta, selection = semantic_color_mix(image, mask, self.data_rng)
                deltas.append(delta)
                label_sets.append(sorted(selection.selected))
            else:
                mixed = np.asarray(image, dtype=np.float32)
                deltas.append(0.0)
                label_sets.append([])
            palettes.append(extract_palette(mixed, mask).colors)
            images.append(mixed)
            masks.append(np.ascontiguousarray(mask.labels))
        target = torch.from_numpy(np.stack(images))
        mask_t = torch.from_numpy(np.stack(masks).astype(np.int64))
        palette_t = torch.from_numpy(np.stack(palettes))
        return target, mask_t, palette_t, deltas, label_sets

    # -- optimization ----------------------------------------------------

    def _check_finite(self, name: str, value: torch.Tensor) -> float:
        scalar = float(value.detach())
        if not math.isfinite(scalar):
            raise TrainingDiverged(self.step, name, scalar)
        return scalar

    def train_step(self, batch=None) -> dict:
        """One discriminator update then one generator update; returns the log record."""
        if batch is None:
            batch = self.next_batch()
        target, mask_t, palette_t, deltas, label_sets = self._prepare_batch(batch)

        # Discriminator: hinge on the jittered real vs a detached synthesis.
        with torch.no_grad():
            fake = self.generator(mask_t, palette_t, self.noise_source)
        real_out = self.discriminator(target, mask_t)
        fake_out = self.discriminator(fake, mask_t)
        loss_d = hinge_d_loss([o.logits for o in real_out],
                              [o.logits for o in fake_out])
        loss_d_value = self._check_finite("loss_d", loss_d)
        self.opt_d.zero_grad(set_to_none=True)
        loss_d.backward()
        self.opt_d.step()

        # Generator: perceptual + feature matching + adversarial, all against
        # the same jittered target the palette came from.
        fake = self.generator(mask_t, palette_t, self.noise_source)
        fake_out = self.discriminator(fake, mask_t)
        with torch.no_grad():
            real_out = self.discriminator(target, mask_t)
        percept = perceptual_loss(fake, target, self.backbone)
        fm = [feature_matching_loss(r.features, f.features)
              for r, f in zip(real_out, fake_out)]
        adv = [hinge_g_loss(o.logits) for o in fake_out]
        loss_g = total_g_loss(GeneratorLossParts(percept, fm, adv), self.weights)
        loss_g_value = self._check_finite("loss_g", loss_g)
        self.opt_g.zero_grad(set_to_none=True)
        loss_g.backward()
        self.opt_g.step()

        self.step += 1
        return {
            "step": self.step,
            "loss_d": loss_d_value,
            "loss_g": loss_g_value,
            "loss_percept": float(percept.detach()),
            "loss_fm": float(sum(x.detach() for x in fm)),
            "scm_delta": deltas,
            "scm_labels": label_sets,
        }

    def train(self, callback=None) -> Path:
        """Run to max_steps, appending JSONL records and periodic checkpoints."""
        out_dir = Path(self.config.out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        log_path = out_dir / "train_log.jsonl"
        last_ckpt = None
        with log_path.open("a") as log:
            while self.step < self.config.max_steps:
                record = self.train_step()
                log.write(json.dumps(record) + "\n")
                log.flush()
                if callback is not None:
                    callback(record)
                if (self.step % self.config.checkpoint_every == 0
                        or self.step == self.config.max_steps):
                    last_ckpt = out_dir / f"checkpoint_{self.step:06d}.pt"
                    self.save(last_ckpt)
        if last_ckpt is None:
            last_ckpt = Path(self.config.out_dir) / f"checkpoint_{self.step:06d}.pt"
            self.save(last_ckpt)
        return last_ckpt

    def reconstruction_l1(self, samples) -> float:
        """Mean |G(extract_palette(X), M) - X| over samples, noise disabled."""
        total = 0.0
        for image, mask in samples:
            palette = extract_palette(np.asarray(image, dtype=np.float32), mask)
            out = synthesize_image(self.generator, mask, palette, seed=None)
            total += float(np.abs(out - np.asarray(image, dtype=np.float32)).mean())
        return total / len(samples)

    # -- persistence -----------------------------------------------------

    def state_payload(self) -> dict:
        return {
            "magic": CHECKPOINT_MAGIC,
            "config": self.config.to_dict(),
            "step": self.step,
            "generator": self.generator.state_dict(),
            "discriminator": self.discriminator.state_dict(),
            "opt_g": self.opt_g.state_dict(),
            "opt_d": self.opt_d.state_dict(),
            "noise_rng": self.noise_source.get_state(),
            "data_rng": json.dumps(self.data_rng.bit_generator.state, default=int),
        }

    def save(self, path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        torch.save(self.state_payload(), path)
        return path

    def restore(self, payload: dict) -> None:
        check_config_compatible(self.config, TrainConfig.from_dict(payload["config"]))
        self.generator.load_state_dict(payload["generator"])
        self.discriminator.load_state_dict(payload["discriminator"])
        self.opt_g.load_state_dict(payload["opt_g"])
        self.opt_d.load_state_dict(payload["opt_d"])
        self.noise_source.set_state(payload["noise_rng"])
        self.data_rng.bit_generator.state = json.loads(payload["data_rng"])
        self.step = int(payload["step"])

    @classmethod
    def from_checkpoint(cls, path, dataset: DatasetManifest | None = None,
                        config: TrainConfig | None = None) -> "Trainer":
        payload = load_checkpoint(path)
        saved = TrainConfig.from_dict(payload["config"])
        if config is not None:
            check_config_compatible(config, saved)
            saved = config
        trainer = cls(saved, dataset)
        trainer.restore(payload)
        return trainer


def check_config_compatible(expected: TrainConfig, found: TrainConfig) -> None:
    """Reject checkpoints whose model geometry differs from the active config."""
    if expected.num_labels != found.num_labels:
        raise ConfigurationError(
            f"checkpoint has num_labels={found.num_labels}, expected {expected.num_labels}"
        )
    if tuple(expected.image_size) != tuple(found.image_size):
        raise ConfigurationError(
            f"checkpoint has image_size={found.image_size}, expected {expected.image_size}"
        )
    if tuple(expected.stage_channels) != tuple(found.stage_channels):
        raise ConfigurationError(
            f"checkpoint has stage_channels={found.stage_channels}, "
            f"expected {expected.stage_channels}"
        )


def load_checkpoint(path) -> dict:
    """Read and validate a checkpoint payload (tensors and primitives only)."""
    path = Path(path)
    if not path.is_file():
        raise CheckpointError(f"checkpoint not found: {path}")
    try:
        payload = torch.load(path, map_location="cpu", weights_only=True)
    except Exception as exc:
        raise CheckpointError(f"unreadable checkpoint {path}: {exc}") from exc
    if not isinstance(payload, dict) or payload.get("magic") != CHECKPOINT_MAGIC:
        raise CheckpointError(f"{path} is not a {CHECKPOINT_MAGIC} checkpoint")
    return payload


def load_generator(path) -> tuple[Generator, TrainConfig]:
    """Rebuild just the generator from a checkpoint, ready for synthesis."""
    payload = load_checkpoint(path)
    config = TrainConfig.from_dict(payload["config"])
    generator = Generator(config.generator_config())
    generator.load_state_dict(payload["generator"])
    generator.eval()
    return generator, config
