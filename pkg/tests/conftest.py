import json
from pathlib import Path

import numpy as np
import pytest

from rucgan import SegmentationMask, TrainConfig
from rucgan.dataio import save_image_png, save_mask_png

# Region base colors for the synthetic dataset, chosen far apart so palette
# effects dominate the additive noise.
BASE_COLORS = np.array([
    [0.7, -0.6, -0.6],
    [-0.6, 0.55, -0.5],
    [-0.5, -0.5, 0.8],
], dtype=np.float32)


def build_tiny_dataset(root: Path, n_images: int = 4, size: int = 64, seed: int = 11) -> Path:
    """Four piecewise-constant-color images with 3-label masks; returns the manifest path."""
    root.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)
    lines = []
    for i in range(n_images):
        labels = np.zeros((size, size), dtype=np.int64)
        labels[:, size // 2:] = 1
        block = size // 4
        y0 = (i * block) % (size - block)
        labels[y0:y0 + block, :block] = 2
        img = BASE_COLORS[labels].transpose(2, 0, 1).copy()
        img += rng.normal(0, 0.03, img.shape).astype(np.float32)
        img = np.clip(img, -1.0, 1.0).astype(np.float32)
        save_image_png(img, root / f"img_{i}.png")
        save_mask_png(SegmentationMask(labels, 3), root / f"mask_{i}.png")
        lines.append(json.dumps({"image": f"img_{i}.png", "mask": f"mask_{i}.png"}))
    manifest = root / "manifest.jsonl"
    manifest.write_text("\n".join(lines) + "\n")
    return manifest


def tiny_train_config(manifest: Path, out_dir: Path, max_steps: int = 4,
                      **overrides) -> TrainConfig:
    """Small but real training config; fast enough for per-test runs."""
    values = dict(
        manifest=None if manifest is None else str(manifest),
        out_dir=str(out_dir),
        num_labels=3,
        image_size=64,
        stage_channels=(32, 16),
        modulation_hidden=16,
        batch_size=2,
        max_steps=max_steps,
        checkpoint_every=max_steps,
        seed=1234,
    )
    values.update(overrides)
    return TrainConfig(**values)


@pytest.fixture()
def tiny_dataset(tmp_path):
    return build_tiny_dataset(tmp_path / "data")


@pytest.fixture(scope="session")
def shared_dataset(tmp_path_factory):
    return build_tiny_dataset(tmp_path_factory.mktemp("shared_data"))


@pytest.fixture(scope="session")
def trained_checkpoint(tmp_path_factory, shared_dataset):
    """A briefly trained checkpoint reused by server/CLI tests."""
    from rucgan import Trainer

    out_dir = tmp_path_factory.mktemp("shared_run")
    config = tiny_train_config(shared_dataset, out_dir, max_steps=3)
    trainer = Trainer(config)
    for _ in range(3):
        trainer.train_step()
    return trainer.save(out_dir / "shared.pt")
