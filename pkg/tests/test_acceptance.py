"""Release gate: one test per shipping criterion, each printing a PASS line
with its measured numbers. Every tolerance here is part of the public
contract; loosening one is a release decision, not a test fix.
"""

import time
from types import SimpleNamespace

import numpy as np
import pytest
import torch

from rucgan import (EmbeddingSet, Generator, GeneratorConfig, PaletteNorm,
                    SegmentationMask, TrainConfig, Trainer, count_parameters,
                    extract_palette, feature_matching_loss, frechet_distance,
                    hinge_d_loss, hinge_g_loss, hue_jitter, one_hot,
                    perceptual_loss, semantic_color_mix, semantic_sampling,
                    synthesize_image, total_g_loss)
from rucgan.dataio import encode_image_png
from rucgan.objectives import GeneratorLossParts, IdentityBackbone, LossWeights
from rucgan.trainer import load_generator

from conftest import build_tiny_dataset
from oracles import (finite_difference_gradient, max_relative_error,
                     oracle_extract_palette, oracle_hinge_d, oracle_hinge_g,
                     oracle_hue_rotate, oracle_l1_layer_mean, oracle_one_hot,
                     oracle_pnorm_forward, oracle_semantic_sampling,
                     oracle_total_g, oracle_value_saturation)

ORACLE_TOL = 1e-6
GRADIENT_TOL = 1e-4


def announce(name: str, detail: str) -> None:
    print(f"ACCEPTANCE {name}: PASS ({detail})")


def randomized_pnorm(seed: int, channels: int = 2, labels: int = 2,
                     hidden: int = 3) -> PaletteNorm:
    """Double-precision layer with every weight randomized away from init."""
    torch.manual_seed(seed)
    layer = PaletteNorm(channels, labels, hidden=hidden).double()
    with torch.no_grad():
        for p in layer.parameters():
            p.copy_(torch.randn_like(p) * 0.5)
    return layer


# -- criterion 1: math-oracle suite ---------------------------------------

def test_math_oracle_suite():
    started = time.perf_counter()
    rng = np.random.default_rng(7)
    worst = 0.0

    # label one-hot encoding
    labels = rng.integers(0, 5, size=(8, 8))
    got = one_hot(SegmentationMask(labels, 5))
    worst = max(worst, float(np.abs(got - oracle_one_hot(labels, 5)).max()))

    # per-label mean color extraction (labels 3 and 4 left absent)
    image = rng.uniform(-1, 1, size=(3, 8, 8))
    mask_labels = rng.integers(0, 3, size=(8, 8))
    mask = SegmentationMask(mask_labels, 5)
    palette = extract_palette(image, mask)
    ref_colors, ref_present = oracle_extract_palette(image, mask_labels, 5)
    worst = max(worst, float(np.abs(palette.colors - ref_colors).max()))
    assert np.array_equal(palette.present, ref_present)

    # palette broadcast into label regions
    sampled = semantic_sampling(palette, mask)
    worst = max(worst, float(np.abs(
        sampled - oracle_semantic_sampling(palette.colors, mask_labels)).max()))

    # label-restricted hue mixing
    for case in range(10):
        case_rng = np.random.default_rng(100 + case)
        img32 = case_rng.uniform(-1, 1, size=(3, 8, 8)).astype(np.float32)
        m = SegmentationMask(case_rng.integers(0, 4, size=(8, 8)), 4)
        mixed, delta, selection = semantic_color_mix(img32, m, case_rng)
        unit = (img32.astype(np.float64) + 1.0) * 0.5
        ref_jittered = np.clip(oracle_hue_rotate(unit, delta) * 2.0 - 1.0, -1.0, 1.0)
        ref_mixed = np.where(selection.indicator[None], img32.astype(np.float64), ref_jittered)
        worst = max(worst, float(np.abs(mixed - ref_mixed).max()))

    # palette normalization forward, with and without noise
    layer = randomized_pnorm(0, channels=3, labels=3, hidden=4)
    x = torch.from_numpy(rng.normal(size=(2, 3, 8, 8)))
    colors = torch.from_numpy(rng.uniform(-1, 1, size=(2, 3, 3)))
    norm_mask = torch.from_numpy(rng.integers(0, 3, size=(2, 8, 8)))
    noise = torch.from_numpy(rng.normal(size=(2, 1, 8, 8)))
    for noise_arg in (None, noise):
        with torch.no_grad():
            got_t = layer(x, colors, norm_mask, noise_arg)
        ref = oracle_pnorm_forward(x.numpy(), colors.numpy(), norm_mask.numpy(), layer,
                                   None if noise_arg is None else noise.numpy())
        worst = max(worst, float(np.abs(got_t.numpy() - ref).max()))

    # every loss: hinge both sides, perceptual, feature matching, total
    real = [torch.from_numpy(rng.normal(size=(2, 1, 4, 4))) for _ in range(2)]
    fake = [torch.from_numpy(rng.normal(size=(2, 1, 4, 4))) for _ in range(2)]
    worst = max(worst, abs(hinge_d_loss(real, fake).item()
                           - oracle_hinge_d([r.numpy() for r in real],
                                            [f.numpy() for f in fake])))
    worst = max(worst, abs(hinge_g_loss(fake).item()
                           - oracle_hinge_g([f.numpy() for f in fake])))
    xa = torch.from_numpy(rng.normal(size=(1, 3, 8, 8)))
    xb = torch.from_numpy(rng.normal(size=(1, 3, 8, 8)))
    worst = max(worst, abs(perceptual_loss(xa, xb, IdentityBackbone()).item()
                           - oracle_l1_layer_mean([xa.numpy()], [xb.numpy()])))
    feats_r = [torch.from_numpy(rng.normal(size=(1, c, 4, 4))) for c in (2, 3)]
    feats_f = [torch.from_numpy(rng.normal(size=(1, c, 4, 4))) for c in (2, 3)]
    worst = max(worst, abs(feature_matching_loss(feats_r, feats_f).item()
                           - oracle_l1_layer_mean([f.numpy() for f in feats_r],
                                                  [f.numpy() for f in feats_f])))
    scalars = rng.normal(size=5)
    parts = GeneratorLossParts(torch.tensor(scalars[0]),
                               [torch.tensor(scalars[1]), torch.tensor(scalars[2])],
                               [torch.tensor(scalars[3]), torch.tensor(scalars[4])])
    worst = max(worst, abs(total_g_loss(parts, LossWeights(10.0, 10.0)).item()
                           - oracle_total_g(scalars[0], scalars[1:3], scalars[3:5],
                                            10.0, 10.0)))

    elapsed = time.perf_counter() - started
    assert worst <= ORACLE_TOL, f"worst oracle deviation {worst:.3e}"
    assert elapsed < 60.0, f"oracle suite took {elapsed:.1f}s"
    announce("math-oracle-suite", f"max deviation {worst:.2e}, {elapsed:.1f}s")


# -- criterion 2: gradient checks ------------------------------------------

def test_gradient_checks():
    started = time.perf_counter()
    rng = np.random.default_rng(3)
    worst = 0.0

    # palette-normalization parameters and input
    layer = randomized_pnorm(1)
    x = torch.from_numpy(rng.normal(size=(1, 2, 3, 3)))
    colors = torch.from_numpy(rng.uniform(-1, 1, size=(1, 2, 3)))
    mask = torch.from_numpy(rng.integers(0, 2, size=(1, 3, 3)))
    noise = torch.from_numpy(rng.normal(size=(1, 1, 3, 3)))
    probe = torch.from_numpy(rng.normal(size=(1, 2, 3, 3)))

    def scalar_out(inp):
        return (layer(inp, colors, mask, noise) * probe).sum()

    for name, param in layer.named_parameters():
        layer.zero_grad()
        scalar_out(x).backward()
        analytic = param.grad.numpy().copy()
        numeric = finite_difference_gradient(lambda: scalar_out(x).item(), param.data,
                                             eps=1e-5)
        err = max_relative_error(analytic, numeric)
        worst = max(worst, err)
        assert err < GRADIENT_TOL, f"pnorm parameter {name}: rel err {err:.2e}"

    x_in = x.clone().requires_grad_(True)
    scalar_out(x_in).backward()
    numeric = finite_difference_gradient(lambda: scalar_out(x).item(), x, eps=1e-5)
    err = max_relative_error(x_in.grad.numpy(), numeric)
    worst = max(worst, err)
    assert err < GRADIENT_TOL, f"pnorm input: rel err {err:.2e}"

    # hinge (both sides), away from the margin kink at |logit| = 1
    real = torch.from_numpy(rng.uniform(-0.5, 0.5, size=(2, 1, 3, 3)))
    fake = torch.from_numpy(rng.uniform(-0.5, 0.5, size=(2, 1, 3, 3)))
    for tensor, fn in ((real, lambda: hinge_d_loss(real, fake).item()),
                       (fake, lambda: hinge_g_loss(fake).item())):
        leaf = tensor.clone().requires_grad_(True)
        if tensor is real:
            hinge_d_loss(leaf, fake).backward()
        else:
            hinge_g_loss(leaf).backward()
        numeric = finite_difference_gradient(fn, tensor, eps=1e-5)
        err = max_relative_error(leaf.grad.numpy(), numeric)
        worst = max(worst, err)
        assert err < GRADIENT_TOL, f"hinge: rel err {err:.2e}"

    # perceptual, entries kept apart so |a - b| has no kink near the samples
    pa = torch.from_numpy(rng.uniform(0.2, 1.0, size=(1, 3, 3, 3)))
    pb = torch.from_numpy(rng.uniform(-1.0, -0.2, size=(1, 3, 3, 3)))
    leaf = pa.clone().requires_grad_(True)
    perceptual_loss(leaf, pb, IdentityBackbone()).backward()
    numeric = finite_difference_gradient(
        lambda: perceptual_loss(pa, pb, IdentityBackbone()).item(), pa, eps=1e-5)
    err = max_relative_error(leaf.grad.numpy(), numeric)
    worst = max(worst, err)
    assert err < GRADIENT_TOL, f"perceptual: rel err {err:.2e}"

    # feature matching with respect to the generated features
    feats_r = [torch.from_numpy(rng.uniform(0.2, 1.0, size=(1, 2, 3, 3)))]
    feats_f = [torch.from_numpy(rng.uniform(-1.0, -0.2, size=(1, 2, 3, 3)))]
    leaf = feats_f[0].clone().requires_grad_(True)
    feature_matching_loss(feats_r, [leaf]).backward()
    numeric = finite_difference_gradient(
        lambda: feature_matching_loss(feats_r, feats_f).item(), feats_f[0], eps=1e-5)
    err = max_relative_error(leaf.grad.numpy(), numeric)
    worst = max(worst, err)
    assert err < GRADIENT_TOL, f"feature matching: rel err {err:.2e}"

    elapsed = time.perf_counter() - started
    assert elapsed < 120.0, f"gradient checks took {elapsed:.1f}s"
    announce("gradient-checks", f"worst rel err {worst:.2e}, {elapsed:.1f}s")


# -- criterion 3: color-mix partition property ------------------------------

def test_color_mix_partition_property():
    cases = 1000
    worst_vs = 0.0
    for case in range(cases):
        rng = np.random.default_rng(20_000 + case)
        image = rng.uniform(-1, 1, size=(3, 6, 6)).astype(np.float32)
        labels = rng.integers(0, 4, size=(6, 6))
        mask = SegmentationMask(labels, 4)
        mixed, delta, selection = semantic_color_mix(image, mask, rng)

        keep = selection.indicator
        jittered = hue_jitter(image, delta)
        assert np.array_equal(mixed[:, keep], image[:, keep])
        assert np.array_equal(mixed[:, ~keep], jittered[:, ~keep])
        for label in selection.selected:
            assert keep[labels == label].all()

        unit_before = (image.astype(np.float64) + 1.0) * 0.5
        unit_after = (jittered.astype(np.float64) + 1.0) * 0.5
        v0, s0 = oracle_value_saturation(unit_before)
        v1, s1 = oracle_value_saturation(unit_after)
        worst_vs = max(worst_vs, float(np.abs(v0 - v1).max()),
                       float(np.abs(s0 - s1).max()))
    assert worst_vs <= 1e-5, f"value/saturation drift {worst_vs:.3e}"
    announce("color-mix-partition", f"{cases} cases bitwise, V/S drift {worst_vs:.2e}")


# -- criterion 4: distribution-distance anchor ------------------------------

def test_frechet_gaussian_anchor():
    rng = np.random.default_rng(0)
    d, n = 8, 50_000
    a = rng.standard_normal((n, d))
    b = rng.standard_normal((n, d)) + np.sqrt(4.0 / d)  # ||mean shift||^2 = 4
    distance = frechet_distance(EmbeddingSet(a), EmbeddingSet(b))
    assert abs(distance - 4.0) <= 0.1, f"sampled distance {distance:.4f}"

    self_distance = frechet_distance(EmbeddingSet(a), EmbeddingSet(a.copy()))
    assert abs(self_distance) < 1e-6, f"identical-set distance {self_distance:.3e}"
    announce("frechet-anchor",
             f"shifted {distance:.4f} vs 4.0, identical {self_distance:.2e}")


# -- criteria 5, 6, 8 share one smoke training run --------------------------

@pytest.fixture(scope="module")
def smoke_run(tmp_path_factory):
    root = tmp_path_factory.mktemp("smoke")
    manifest = build_tiny_dataset(root / "data", n_images=4, size=64, seed=11)
    config = TrainConfig(
        manifest=str(manifest),
        out_dir=str(root / "run"),
        num_labels=3,
        image_size=64,
        stage_channels=(64, 64, 32, 16),
        modulation_hidden=64,
        batch_size=4,
        max_steps=500,
        checkpoint_every=250,
        seed=1234,
        scm_enabled=True,
    )
    trainer = Trainer(config)
    samples = [trainer.dataset.load(i) for i in range(len(trainer.dataset))]
    before = trainer.reconstruction_l1(samples)
    started = time.perf_counter()
    checkpoint = trainer.train()
    wall = time.perf_counter() - started
    after = trainer.reconstruction_l1(samples)
    return SimpleNamespace(config=config, trainer=trainer, samples=samples,
                           checkpoint=checkpoint, before=before, after=after,
                           wall=wall)


def test_smoke_training_reconstruction(smoke_run):
    drop = 1.0 - smoke_run.after / smoke_run.before
    assert smoke_run.after <= 0.5 * smoke_run.before, (
        f"reconstruction L1 {smoke_run.before:.4f} -> {smoke_run.after:.4f} "
        f"({drop:.0%} drop, needed >= 50%)")
    assert smoke_run.wall < 900.0, f"smoke training took {smoke_run.wall:.0f}s"
    announce("smoke-training",
             f"L1 {smoke_run.before:.4f} -> {smoke_run.after:.4f} "
             f"({drop:.0%} drop), {smoke_run.wall:.0f}s wall")


def test_palette_steering(smoke_run):
    generator, config = load_generator(smoke_run.checkpoint)
    image, mask = smoke_run.samples[0]
    counts = np.bincount(mask.labels.ravel(), minlength=config.num_labels)
    target = int(counts.argmax())

    base_palette = extract_palette(np.asarray(image, dtype=np.float32), mask)
    red = np.array([1.0, -1.0, -1.0], dtype=np.float32)
    steered_palette = base_palette.replace(target, red)

    base_out = synthesize_image(generator, mask, base_palette, seed=99)
    steered_out = synthesize_image(generator, mask, steered_palette, seed=99)

    def region_mean(out, label):
        return out[:, mask.labels == label].mean(axis=1)

    before_dist = float(np.linalg.norm(region_mean(base_out, target) - red))
    after_dist = float(np.linalg.norm(region_mean(steered_out, target) - red))
    assert after_dist < before_dist, (
        f"steered region dist to red {before_dist:.3f} -> {after_dist:.3f}")

    steered_move = float(np.linalg.norm(
        region_mean(steered_out, target) - region_mean(base_out, target)))
    other_moves = {}
    for label in range(config.num_labels):
        if label == target or counts[label] == 0:
            continue
        move = float(np.linalg.norm(
            region_mean(steered_out, label) - region_mean(base_out, label)))
        other_moves[label] = move
        assert move < steered_move, (
            f"label {label} moved {move:.3f} >= steered region {steered_move:.3f}")
    announce("palette-steering",
             f"label {target} dist to red {before_dist:.3f} -> {after_dist:.3f}, "
             f"moved {steered_move:.3f}, others "
             + ", ".join(f"{l}: {m:.3f}" for l, m in sorted(other_moves.items())))


# -- criterion 7: default model size ----------------------------------------

def test_parameter_count_band():
    generator = Generator(GeneratorConfig())
    total = count_parameters(generator)
    del generator
    assert 45_000_000 <= total <= 180_000_000, f"default generator has {total} parameters"
    announce("parameter-band", f"exact count {total:,} in [45M, 180M]")


# -- criterion 8: determinism and persistence --------------------------------

def test_determinism_and_persistence(smoke_run, tmp_path):
    # fixed-seed synthesis is byte-identical, including across a fresh load
    generator, config = load_generator(smoke_run.checkpoint)
    image, mask = smoke_run.samples[1]
    palette = extract_palette(np.asarray(image, dtype=np.float32), mask)
    first = encode_image_png(synthesize_image(generator, mask, palette, seed=5))
    second = encode_image_png(synthesize_image(generator, mask, palette, seed=5))
    assert first == second
    reloaded, _ = load_generator(smoke_run.checkpoint)
    third = encode_image_png(synthesize_image(reloaded, mask, palette, seed=5))
    assert first == third

    # save/load/resume reproduces the uninterrupted loss trace exactly
    def fresh(out_name):
        cfg = TrainConfig(**{**smoke_run.config.to_dict(),
                             "out_dir": str(tmp_path / out_name),
                             "max_steps": 6, "checkpoint_every": 6, "seed": 4321})
        return Trainer(cfg, dataset=smoke_run.trainer.dataset)

    straight = fresh("straight")
    full_trace = [straight.train_step() for _ in range(6)]
    interrupted = fresh("interrupted")
    head = [interrupted.train_step() for _ in range(3)]
    ckpt = interrupted.save(tmp_path / "mid.pt")
    resumed = Trainer.from_checkpoint(ckpt, dataset=smoke_run.trainer.dataset)
    tail = [resumed.train_step() for _ in range(3)]
    assert head + tail == full_trace
    announce("determinism-persistence",
             "byte-identical synthesis; resumed trace == uninterrupted trace")
