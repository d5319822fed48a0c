import numpy as np
import pytest

from lungsynth.brush import BrushConfig, paint_base
from lungsynth.errors import DimensionMismatch
from lungsynth.image import gaussian_blur, make_stream
from lungsynth.transforms import (STAGE_ORDER, TransformConfig, blur_transform,
                                  compose, crystallize, crystallize_with_seeds,
                                  rib_intensity_map, rib_scale)


def disc_layer(shape=(64, 64), center=(32, 32), radius=12, value=0.4):
    ys, xs = np.mgrid[0:shape[0], 0:shape[1]]
    layer = np.zeros(shape)
    layer[(ys - center[0]) ** 2 + (xs - center[1]) ** 2 <= radius ** 2] = value
    return layer


def random_layer(seed, shape=(48, 48)):
    rng = np.random.default_rng(seed)
    layer = rng.random(shape)
    layer[layer < 0.55] = 0.0  # sparse support
    return layer


class TestCrystallize:
    def test_single_cell_yields_support_mean(self):
        layer = disc_layer()
        layer[30:35, 30:35] = 0.8  # non-constant support
        rows, cols = np.nonzero(layer > 0)
        mean = layer[rows, cols].mean()
        out = crystallize(layer, density=1e-6, rng=make_stream(0, 0))
        np.testing.assert_allclose(out[rows, cols], mean)
        assert not out[layer == 0].any()

    def test_zero_layer_unchanged(self):
        layer = np.zeros((32, 32))
        out = crystallize(layer, density=2.0, rng=make_stream(0, 0))
        assert np.array_equal(out, layer)

    def test_two_seed_ramp_matches_brute_force(self):
        # a linear ramp split by two seeds: piecewise constant halves
        layer = np.tile(np.array([0.1, 0.2, 0.3, 0.4, 0.5, 0.6]), (4, 1))
        seeds = np.array([[1, 1], [1, 4]])
        out = crystallize_with_seeds(layer, seeds)
        # brute-force nearest-seed assignment, ties to the lower index
        expected = np.zeros_like(layer)
        cells = {0: [], 1: []}
        for r in range(4):
            for c in range(6):
                d = [(r - sr) ** 2 + (c - sc) ** 2 for sr, sc in seeds]
                cells[int(np.argmin(d))].append((r, c))
        for idx, pixels in cells.items():
            mean = np.mean([layer[p] for p in pixels])
            for p in pixels:
                expected[p] = mean
        np.testing.assert_allclose(out, expected)
        assert len(np.unique(out)) == 2
        np.testing.assert_allclose(np.unique(out), [0.2, 0.5])

    def test_support_mean_conserved(self):
        for seed in range(5):
            layer = random_layer(seed)
            support = layer > 0
            out = crystallize(layer, density=3.0, rng=make_stream(seed, 1))
            assert abs(out[support].mean() - layer[support].mean()) < 1e-6
            assert not out[~support].any()

    def test_deterministic(self):
        layer = random_layer(9)
        a = crystallize(layer, 2.0, make_stream(2, 2))
        b = crystallize(layer, 2.0, make_stream(2, 2))
        assert np.array_equal(a, b)

    def test_range_preserved(self):
        layer = random_layer(3)
        out = crystallize(layer, 2.0, make_stream(0, 3))
        assert out.min() >= 0.0 and out.max() <= 1.0

    def test_bad_density(self):
        with pytest.raises(ValueError):
            crystallize(np.zeros((4, 4)), 0.0, make_stream(0, 0))


class TestBlurTransform:
    def test_sigma_zero_identity(self):
        layer = disc_layer()
        assert np.array_equal(blur_transform(layer, 0.0), layer)

    def test_smoothing_reduces_max(self):
        layer = disc_layer(value=0.9)
        out = blur_transform(layer, 6.0)
        assert out.max() < layer.max()

    def test_delegates_to_gaussian_blur(self):
        layer = np.zeros((31, 31))
        layer[15, 15] = 1.0
        assert np.array_equal(blur_transform(layer, 1.0), gaussian_blur(layer, 1.0))


class TestRibIntensityMap:
    def test_dark_image_all_zero(self):
        img = np.full((16, 16), 0.2)
        assert not rib_intensity_map(img, 0.8).any()

    def test_brightest_pixel_maps_to_one(self):
        img = np.linspace(0.0, 1.0, 101)[None, :].repeat(4, axis=0)
        out = rib_intensity_map(img, 0.8)
        assert out[0, -1] == 1.0

    def test_linear_interpolation(self):
        # quantile 0.8 of a 0..1 ramp is 0.8; a 0.9 pixel maps to 0.5
        img = np.linspace(0.0, 1.0, 101)[None, :].repeat(4, axis=0)
        out = rib_intensity_map(img, 0.8)
        assert out[0, 90] == pytest.approx(0.5)

    def test_degenerate_saturated_image(self):
        img = np.ones((8, 8))
        assert not rib_intensity_map(img, 0.5).any()


class TestRibScale:
    def test_alpha_zero_identity(self):
        layer = disc_layer()
        rib = np.random.default_rng(0).random(layer.shape)
        assert np.array_equal(rib_scale(layer, rib, 0.0), layer)

    def test_full_suppression(self):
        layer = disc_layer(value=0.7)
        rib = np.ones_like(layer)
        assert not rib_scale(layer, rib, 1.0).any()

    def test_direct_product(self):
        layer = np.full((4, 4), 0.6)
        rib = np.full((4, 4), 0.5)
        np.testing.assert_allclose(rib_scale(layer, rib, 1.0), 0.3)

    def test_never_increases(self):
        layer = random_layer(4)
        rib = np.random.default_rng(1).random(layer.shape)
        out = rib_scale(layer, rib, 0.8)
        assert (out <= layer + 1e-15).all()

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            rib_scale(np.zeros((4, 4)), np.zeros((5, 4)), 0.5)


class TestCompose:
    def image_and_layer(self):
        rng = np.random.default_rng(42)
        image = rng.random((96, 96)) * 0.3 + 0.4
        lung = np.zeros((96, 96), dtype=np.uint8)
        lung[20:80, 15:80] = 1
        layer = paint_base(lung, BrushConfig(), make_stream(7, 0))
        return image, layer

    def test_all_probabilities_zero_is_identity(self):
        image, layer = self.image_and_layer()
        cfg = TransformConfig(cryst_prob=0.0, blur_prob=0.0, rib_prob=0.0)
        out, applied = compose(layer, image, cfg, make_stream(0, 0))
        assert applied == []
        assert np.array_equal(out, layer)

    def test_near_identity_stages_yield_constant_mean(self):
        image, layer = self.image_and_layer()
        cfg = TransformConfig(cryst_prob=1.0, blur_prob=1.0, rib_prob=1.0,
                              blur_sigma=0.0, rib_alpha=0.0,
                              cryst_cells_per_1k_px=1e-6)
        out, applied = compose(layer, image, cfg, make_stream(1, 0))
        assert applied == ["cryst", "blur", "rib"]
        support = layer > 0
        np.testing.assert_allclose(out[support], layer[support].mean())

    def test_deterministic_stage_selection(self):
        image, layer = self.image_and_layer()
        cfg = TransformConfig(cryst_prob=0.5, blur_prob=0.5, rib_prob=0.5)
        out1, applied1 = compose(layer, image, cfg, make_stream(3, 5))
        out2, applied2 = compose(layer, image, cfg, make_stream(3, 5))
        assert applied1 == applied2
        assert np.array_equal(out1, out2)

    def test_applied_respects_canonical_order(self):
        image, layer = self.image_and_layer()
        cfg = TransformConfig(cryst_prob=1.0, blur_prob=1.0, rib_prob=1.0)
        _, applied = compose(layer, image, cfg, make_stream(4, 0))
        assert applied == list(STAGE_ORDER)

    def test_pipeline_subset(self):
        image, layer = self.image_and_layer()
        cfg = TransformConfig(pipeline=("blur",), blur_prob=1.0)
        out, applied = compose(layer, image, cfg, make_stream(5, 0))
        assert applied == ["blur"]
        assert np.array_equal(out, blur_transform(layer, cfg.blur_sigma))

    def test_output_in_range(self):
        image, layer = self.image_and_layer()
        for stream in range(8):
            out, _ = compose(layer, image, TransformConfig(), make_stream(6, stream))
            assert out.min() >= 0.0 and out.max() <= 1.0

    def test_stage_sink_collects_layers(self):
        image, layer = self.image_and_layer()
        cfg = TransformConfig(cryst_prob=1.0, blur_prob=1.0, rib_prob=1.0)
        sink = []
        compose(layer, image, cfg, make_stream(8, 0), stage_sink=sink)
        assert [name for name, _ in sink] == list(STAGE_ORDER)
        assert all(arr.shape == layer.shape for _, arr in sink)

    def test_config_validation(self):
        with pytest.raises(ValueError):
            TransformConfig(pipeline=("blur", "blur")).validate()
        with pytest.raises(ValueError):
            TransformConfig(pipeline=("sharpen",)).validate()
        with pytest.raises(ValueError):
            TransformConfig(rib_alpha=1.5).validate()
        with pytest.raises(ValueError):
            TransformConfig(cryst_cells_per_1k_px=0).validate()
