"""Command-line entry points: train, synthesize, extract-palette, evaluate, serve.

Exit codes: 0 success, 2 validation/usage problems, 1 runtime failures.
Every subcommand prints its resolved configuration before doing work, and
every random choice flows from --seed (default 1234) so reruns reproduce.
"""

from __future__ import annotations

import functools
import importlib
import json
import sys
from pathlib import Path

import click
import numpy as np

from .dataio import load_image_png, load_manifest, load_mask_png, save_image_png
from .errors import (CheckpointError, ConfigurationError, DimensionError,
                     LabelRangeError, ParameterError)
from .metrics import (evaluation_report, frechet_distance, lpips_adapter,
                      pooled_color_embedding, segmentation_scores,
                      style_relevance)
from .models import count_parameters, synthesize_image
from .objectives import load_backbone
from .palette import PaletteVector, extract_palette, unit_rgb_to_bank
from .trainer import Trainer, load_generator, load_train_config

VALIDATION_ERRORS = (ConfigurationError, CheckpointError, DimensionError,
                     LabelRangeError, ParameterError)


def guarded(fn):
    """Map error classes onto the exit-code contract."""

    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except VALIDATION_ERRORS as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(2)
        except click.ClickException:
            raise
        except Exception as exc:
            click.echo(f"runtime failure: {exc}", err=True)
            sys.exit(1)

    return wrapper


def _echo_config(values: dict) -> None:
    click.echo("resolved config:")
    for key in sorted(values):
        click.echo(f"  {key} = {json.dumps(values[key])}")


def _load_plugin(spec: str):
    """Import a 'module:attribute' callable."""
    module_name, _, attr = spec.partition(":")
    if not module_name or not attr:
        raise ConfigurationError(f"plugin spec must be 'module:attribute', got {spec!r}")
    try:
        module = importlib.import_module(module_name)
    except ImportError as exc:
        raise ConfigurationError(f"cannot import plugin module {module_name!r}: {exc}") from exc
    try:
        return getattr(module, attr)
    except AttributeError as exc:
        raise ConfigurationError(f"module {module_name!r} has no attribute {attr!r}") from exc


@click.group()
def main() -> None:
    """Referenceless, color-controllable semantic image synthesis."""


@main.command()
@click.option("--config", "config_path", required=True, help="Path to a flat JSON training config.")
@click.option("--resume", "resume_path", default=None, help="Checkpoint to continue from.")
@click.option("--seed", default=None, type=int, help="Override the config's seed.")
@guarded
def train(config_path, resume_path, seed):
    """Run the adversarial training loop."""
    config = load_train_config(config_path)
    if seed is not None:
        config.seed = seed
    _echo_config(config.to_dict())
    if resume_path is not None:
        trainer = Trainer.from_checkpoint(resume_path, config=config)
        click.echo(f"resumed from {resume_path} at step {trainer.step}")
    else:
        trainer = Trainer(config)
    click.echo(f"generator parameters: {count_parameters(trainer.generator)}")
    click.echo(f"discriminator parameters: {count_parameters(trainer.discriminator)}")
    stride = max(1, config.max_steps // 10)

    def progress(record):
        if record["step"] % stride == 0 or record["step"] == config.max_steps:
            click.echo(f"step {record['step']}: loss_d={record['loss_d']:.4f} "
                       f"loss_g={record['loss_g']:.4f}")

    last = trainer.train(callback=progress)
    click.echo(f"finished at step {trainer.step}; checkpoint: {last}")


@main.command()
@click.option("--ckpt", "ckpt_path", required=True, help="Trained checkpoint.")
@click.option("--mask", "mask_path", required=True, help="Label-indexed mask PNG.")
@click.option("--palette", "palette_path", required=True, help="Palette JSON file.")
@click.option("--out", "out_path", required=True, help="Where to write the output PNG.")
@click.option("--seed", default=1234, show_default=True, type=int)
@guarded
def synthesize(ckpt_path, mask_path, palette_path, out_path, seed):
    """Generate one image from a mask and a palette."""
    generator, config = load_generator(ckpt_path)
    _echo_config({"ckpt": ckpt_path, "mask": mask_path, "palette": palette_path,
                  "out": out_path, "seed": seed,
                  "image_size": list(config.image_size),
                  "num_labels": config.num_labels})
    if not Path(mask_path).is_file():
        raise ConfigurationError(f"mask file not found: {mask_path}")
    if not Path(palette_path).is_file():
        raise ConfigurationError(f"palette file not found: {palette_path}")
    mask = load_mask_png(mask_path, config.num_labels, image_size=config.image_size)
    palette = PaletteVector.load(palette_path)
    out = synthesize_image(generator, mask, palette, seed=seed)
    save_image_png(out, out_path)
    click.echo("palette used (RGB in [0, 255]):")
    for label, rgb in enumerate(unit_rgb_to_bank(palette.colors).tolist()):
        click.echo(f"  label {label}: {rgb}")
    click.echo(f"wrote {out_path}")


@main.command("extract-palette")
@click.option("--image", "image_path", required=True, help="RGB image PNG.")
@click.option("--mask", "mask_path", required=True, help="Label-indexed mask PNG.")
@click.option("--num-labels", required=True, type=int, help="Label-class count s.")
@click.option("--out", "out_path", default=None, help="Optional palette JSON output path.")
@guarded
def extract_palette_cmd(image_path, mask_path, num_labels, out_path):
    """Compute per-label mean colors of an image."""
    _echo_config({"image": image_path, "mask": mask_path,
                  "num_labels": num_labels, "out": out_path})
    for path in (image_path, mask_path):
        if not Path(path).is_file():
            raise ConfigurationError(f"input file not found: {path}")
    image = load_image_png(image_path)
    mask = load_mask_png(mask_path, num_labels)
    palette = extract_palette(image, mask)
    click.echo("extracted palette (RGB in [0, 255]):")
    bank = unit_rgb_to_bank(palette.colors).tolist()
    for label in range(num_labels):
        marker = "" if palette.present[label] else "  (absent)"
        click.echo(f"  label {label}: {bank[label]}{marker}")
    if out_path is not None:
        palette.save(out_path)
        click.echo(f"wrote {out_path}")


@main.command()
@click.option("--ckpt", "ckpt_path", required=True, help="Trained checkpoint.")
@click.option("--manifest", "manifest_path", required=True, help="Evaluation manifest JSONL.")
@click.option("--report", "report_path", required=True, help="Where to write the metrics JSON.")
@click.option("--seed", default=1234, show_default=True, type=int)
@click.option("--backbone", default="identity", show_default=True,
              help="Perceptual backbone for the style score: 'identity' or a VGG weights path.")
@click.option("--lpips", "lpips_spec", default=None,
              help="Patch-similarity scorer plugin as 'module:attribute'.")
@click.option("--segmenter", "segmenter_spec", default=None,
              help="Segmentation plugin as 'module:attribute' for mIoU/accuracy.")
@guarded
def evaluate(ckpt_path, manifest_path, report_path, seed, backbone, lpips_spec, segmenter_spec):
    """Synthesize over a manifest and write the metrics report."""
    generator, config = load_generator(ckpt_path)
    _echo_config({"ckpt": ckpt_path, "manifest": manifest_path, "report": report_path,
                  "seed": seed, "backbone": backbone, "lpips": lpips_spec,
                  "segmenter": segmenter_spec})
    dataset = load_manifest(manifest_path, config.num_labels, config.image_size, split="val")
    feature_backbone = load_backbone(backbone)
    scorer = _load_plugin(lpips_spec) if lpips_spec else None
    segmenter = _load_plugin(segmenter_spec) if segmenter_spec else None

    reals, synths, sr_scores, lpips_scores = [], [], [], []
    pred_masks, gt_masks = [], []
    for index in range(len(dataset)):
        image, mask = dataset.load(index)
        palette = extract_palette(image, mask)
        synth = synthesize_image(generator, mask, palette, seed=seed + index)
        reals.append(image)
        synths.append(synth)
        sr_scores.append(style_relevance(synth, image, feature_backbone))
        if scorer is not None:
            lpips_scores.append(lpips_adapter(synth, image, scorer).value)
        if segmenter is not None:
            pred_masks.append(np.asarray(segmenter(synth)))
            gt_masks.append(mask.labels)

    fid = frechet_distance(pooled_color_embedding(reals), pooled_color_embedding(synths))
    sr = float(np.mean(sr_scores))
    if scorer is not None:
        lpips_value = float(np.mean(lpips_scores))
        provenance = lpips_spec
    else:
        lpips_value, provenance = None, "no scorer configured"
    if segmenter is not None:
        miou, acc = segmentation_scores(pred_masks, gt_masks, config.num_labels)
    else:
        miou, acc = "unavailable", "unavailable"

    report = evaluation_report(fid, None, sr, miou, acc, len(dataset))
    report["lpips"] = lpips_value if lpips_value is not None else "unavailable"
    report["scorer_provenance"] = provenance
    Path(report_path).write_text(json.dumps(report, indent=2) + "\n")
    click.echo(json.dumps(report, indent=2))
    click.echo(f"wrote {report_path}")


@main.command()
@click.option("--ckpt", "ckpt_path", required=True, help="Checkpoint to serve.")
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True, type=int)
@click.option("--label-map", "label_map_path", default=None,
              help="Label id/name/display-color JSON; defaults to a generated table.")
@click.option("--segmenter", "segmenter_spec", default=None,
              help="Segmentation plugin as 'module:attribute'.")
@guarded
def serve(ckpt_path, host, port, label_map_path, segmenter_spec):
    """Serve the HTTP synthesis API."""
    from .server import ServerState, run_server

    _echo_config({"ckpt": ckpt_path, "host": host, "port": port,
                  "label_map": label_map_path, "segmenter": segmenter_spec})
    segmenter = _load_plugin(segmenter_spec) if segmenter_spec else None
    state = ServerState.from_checkpoint(ckpt_path, label_map_path=label_map_path,
                                        segmenter=segmenter)
    click.echo(f"serving checkpoint {ckpt_path} on http://{host}:{port}")
    run_server(state, host=host, port=port)


if __name__ == "__main__":
    main()
