import numpy as np
import pytest

from rucgan import (DimensionError, MixSelection, ParameterError,
                    SegmentationMask, hue_jitter, select_labels,
                    semantic_color_mix)

from oracles import oracle_hue_rotate, oracle_value_saturation


def random_image(rng, h=8, w=8):
    return rng.uniform(-1.0, 1.0, size=(3, h, w)).astype(np.float32)


class TestHueJitter:
    def test_zero_delta_is_exact_copy(self):
        rng = np.random.default_rng(0)
        image = random_image(rng)
        out = hue_jitter(image, 0.0)
        assert np.array_equal(out, image)
        assert out is not image

    def test_delta_out_of_range(self):
        image = np.zeros((3, 2, 2), dtype=np.float32)
        for delta in (-0.51, 0.51, 2.0):
            with pytest.raises(ParameterError):
                hue_jitter(image, delta)

    def test_bad_shape(self):
        with pytest.raises(DimensionError):
            hue_jitter(np.zeros((1, 4, 4), dtype=np.float32), 0.1)

    def test_value_and_saturation_preserved(self):
        rng = np.random.default_rng(1)
        for _ in range(20):
            image = random_image(rng)
            delta = float(rng.uniform(-0.5, 0.5))
            out = hue_jitter(image, delta)
            v0, s0 = oracle_value_saturation((image + 1.0) * 0.5)
            v1, s1 = oracle_value_saturation((out + 1.0) * 0.5)
            assert np.abs(v1 - v0).max() <= 1e-5
            assert np.abs(s1 - s0).max() <= 1e-5

    def test_matches_hsv_rotation_oracle(self):
        rng = np.random.default_rng(2)
        for _ in range(5):
            image = random_image(rng, 4, 4)
            delta = float(rng.uniform(-0.5, 0.5))
            out = hue_jitter(image, delta)
            expected = oracle_hue_rotate((image + 1.0) * 0.5, delta) * 2.0 - 1.0
            assert np.abs(out - expected).max() < 1e-5

    def test_full_half_turn_allowed(self):
        image = np.full((3, 2, 2), -1.0, dtype=np.float32)
        image[0] = 1.0  # pure red
        out = hue_jitter(image, 0.5)
        # red rotated half the wheel lands on cyan
        unit = (out + 1.0) * 0.5
        assert unit[0].max() < 1e-5
        assert np.abs(unit[1] - 1.0).max() < 1e-5
        assert np.abs(unit[2] - 1.0).max() < 1e-5

    def test_grays_unchanged_by_any_delta(self):
        image = np.full((3, 3, 3), 0.25, dtype=np.float32)
        out = hue_jitter(image, 0.37)
        assert np.abs(out - image).max() < 1e-6


class TestSelectLabels:
    def test_selects_floor_half_of_present(self):
        labels = np.zeros((4, 4), dtype=int)
        labels[0, 0] = 1
        labels[0, 1] = 2
        mask = SegmentationMask(labels, 5)  # labels 3, 4 absent
        rng = np.random.default_rng(0)
        sel = select_labels(mask, rng)
        assert len(sel.selected) == 1  # floor(3 / 2)
        assert sel.selected <= {0, 1, 2}

    def test_single_label_selects_none(self):
        mask = SegmentationMask(np.zeros((2, 2), dtype=int), 4)
        sel = select_labels(mask, np.random.default_rng(0))
        assert sel.selected == frozenset()
        assert not sel.indicator.any()

    def test_indicator_matches_membership(self):
        labels = np.array([[0, 1], [2, 3]])
        mask = SegmentationMask(labels, 4)
        sel = MixSelection.from_mask(mask, [1, 3])
        assert np.array_equal(sel.indicator, np.isin(labels, [1, 3]))

    def test_deterministic_for_seeded_rng(self):
        labels = np.arange(16).reshape(4, 4) % 4
        mask = SegmentationMask(labels, 4)
        a = select_labels(mask, np.random.default_rng(99)).selected
        b = select_labels(mask, np.random.default_rng(99)).selected
        assert a == b

    def test_every_present_label_reachable(self):
        labels = np.arange(16).reshape(4, 4) % 4
        mask = SegmentationMask(labels, 4)
        rng = np.random.default_rng(7)
        seen = set()
        for _ in range(200):
            seen |= select_labels(mask, rng).selected
        assert seen == {0, 1, 2, 3}


class TestSemanticColorMix:
    def test_partition_property(self):
        rng = np.random.default_rng(3)
        for _ in range(50):
            image = random_image(rng)
            labels = rng.integers(0, 4, size=(8, 8))
            mask = SegmentationMask(labels, 4)
            mixed, delta, sel = semantic_color_mix(image, mask, rng)
            jittered = hue_jitter(image, delta)
            selected_px = sel.indicator
            assert np.array_equal(mixed[:, selected_px], image[:, selected_px])
            assert np.array_equal(mixed[:, ~selected_px], jittered[:, ~selected_px])

    def test_delta_within_half_wheel(self):
        rng = np.random.default_rng(4)
        image = random_image(rng)
        mask = SegmentationMask(rng.integers(0, 3, size=(8, 8)), 3)
        for _ in range(100):
            _, delta, _ = semantic_color_mix(image, mask, rng)
            assert -0.5 <= delta <= 0.5

    def test_selection_only_from_present_labels(self):
        rng = np.random.default_rng(5)
        labels = np.zeros((8, 8), dtype=int)
        labels[:4] = 2  # only labels {0, 2} present out of 6
        mask = SegmentationMask(labels, 6)
        for _ in range(50):
            _, _, sel = semantic_color_mix(random_image(rng), mask, rng)
            assert sel.selected <= {0, 2}
            assert len(sel.selected) == 1

    def test_deterministic_replay(self):
        image = random_image(np.random.default_rng(6))
        mask = SegmentationMask(np.random.default_rng(7).integers(0, 3, size=(8, 8)), 3)
        out_a = semantic_color_mix(image, mask, np.random.default_rng(42))
        out_b = semantic_color_mix(image, mask, np.random.default_rng(42))
        assert np.array_equal(out_a[0], out_b[0])
        assert out_a[1] == out_b[1]
        assert out_a[2].selected == out_b[2].selected

    def test_shape_mismatch(self):
        image = np.zeros((3, 4, 4), dtype=np.float32)
        mask = SegmentationMask(np.zeros((5, 5), dtype=int), 2)
        with pytest.raises(DimensionError):
            semantic_color_mix(image, mask, np.random.default_rng(0))

    def test_output_dtype_and_range(self):
        rng = np.random.default_rng(8)
        image = random_image(rng)
        mask = SegmentationMask(rng.integers(0, 3, size=(8, 8)), 3)
        mixed, _, _ = semantic_color_mix(image, mask, rng)
        assert mixed.dtype == np.float32
        assert mixed.min() >= -1.0 and mixed.max() <= 1.0
