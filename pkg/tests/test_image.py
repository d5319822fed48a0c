import numpy as np
import pytest

from lungsynth.image import (Region, connected_components, gaussian_blur,
                             make_stream, normalize, threshold_below)

from oracles import component_stats, flood_fill_components, gaussian_kernel_2d


class TestNormalize:
    def test_constant_image_maps_to_zero(self):
        img = np.full((8, 8), 0.7)
        assert np.array_equal(normalize(img, 0.0, 1.0), np.zeros((8, 8)))

    def test_identity_on_full_range(self):
        img = np.array([[0.0, 0.5, 1.0]])
        np.testing.assert_allclose(normalize(img, 0.0, 1.0), img)

    def test_rescales_narrow_range(self):
        # 16-bit-style values squeezed into a narrow band
        img = np.array([[0.1, 0.2, 0.3]])
        np.testing.assert_allclose(normalize(img, 0.0, 1.0),
                                   [[0.0, 0.5, 1.0]], atol=1e-12)

    def test_output_clamped(self):
        rng = np.random.default_rng(0)
        img = rng.random((32, 32))
        out = normalize(img, 0.1, 0.9)
        assert out.min() >= 0.0 and out.max() <= 1.0

    def test_bad_percentiles_raise(self):
        img = np.zeros((4, 4))
        with pytest.raises(ValueError):
            normalize(img, 0.9, 0.1)
        with pytest.raises(ValueError):
            normalize(img, 0.0, 1.5)


class TestThresholdBelow:
    def test_uniform_below(self):
        img = np.full((5, 5), 0.5)
        assert threshold_below(img, 0.6).all()

    def test_strict_inequality_at_boundary(self):
        img = np.full((5, 5), 0.5)
        assert not threshold_below(img, 0.5).any()

    def test_elementwise(self):
        img = np.array([[0.2, 0.5, 0.8]])
        assert threshold_below(img, 0.5).tolist() == [[1, 0, 0]]

    def test_monotone_in_threshold(self):
        rng = np.random.default_rng(1)
        for _ in range(20):
            img = rng.random((16, 16))
            t1, t2 = sorted(rng.random(2))
            m1 = threshold_below(img, t1)
            m2 = threshold_below(img, t2)
            assert not (m1 & ~m2).any()  # mask(t1) is a subset of mask(t2)


class TestConnectedComponents:
    def test_two_regions_4_connected(self):
        mask = np.array([
            [1, 1, 0, 0],
            [1, 1, 0, 0],
            [0, 0, 0, 0],
            [0, 0, 1, 1],
        ], dtype=np.uint8)
        regions = connected_components(mask, connectivity=4)
        assert sorted(r.area for r in regions) == [2, 4]

    def test_empty_mask(self):
        assert connected_components(np.zeros((6, 6), dtype=np.uint8)) == []

    def test_full_3x3(self):
        regions = connected_components(np.ones((3, 3), dtype=np.uint8))
        assert len(regions) == 1
        r = regions[0]
        assert r.area == 9
        assert r.border_contact == 8
        assert r.perimeter == 8  # every pixel except the center is boundary
        assert r.bbox == (0, 0, 2, 2)

    def test_single_pixel(self):
        mask = np.zeros((5, 5), dtype=np.uint8)
        mask[2, 3] = 1
        (r,) = connected_components(mask)
        assert r.area == 1 and r.perimeter == 1 and r.border_contact == 0
        assert r.centroid == (3.0, 2.0)

    @pytest.mark.parametrize("connectivity", [4, 8])
    def test_matches_flood_fill_oracle(self, connectivity):
        rng = np.random.default_rng(2)
        for _ in range(25):
            h, w = rng.integers(3, 33, size=2)
            mask = (rng.random((h, w)) < 0.4).astype(np.uint8)
            regions = connected_components(mask, connectivity)
            got = {frozenset(map(tuple, r.coords)) for r in regions}
            expected = set(flood_fill_components(mask, connectivity))
            assert got == expected
            for region in regions:
                stats = component_stats(set(map(tuple, region.coords)), (h, w))
                assert region.area == stats["area"]
                assert region.bbox == stats["bbox"]
                assert region.centroid == pytest.approx(stats["centroid"])
                assert region.perimeter == stats["perimeter"]
                assert region.border_contact == stats["border_contact"]

    def test_region_invariants(self):
        rng = np.random.default_rng(3)
        mask = (rng.random((24, 24)) < 0.35).astype(np.uint8)
        for r in connected_components(mask):
            assert r.area >= 1
            assert 0 <= r.bbox[0] <= r.bbox[2] < 24
            assert 0 <= r.bbox[1] <= r.bbox[3] < 24
            assert r.bbox[0] <= r.centroid[0] <= r.bbox[2]
            assert r.bbox[1] <= r.centroid[1] <= r.bbox[3]
            assert r.border_contact <= r.perimeter
            assert r.circularity > 0

    def test_labels_in_raster_order(self):
        mask = np.array([
            [0, 0, 1, 0],
            [1, 0, 1, 0],
            [0, 0, 0, 1],
        ], dtype=np.uint8)
        regions = connected_components(mask, connectivity=4)
        firsts = [tuple(r.coords[np.lexsort((r.coords[:, 1], r.coords[:, 0]))][0])
                  for r in regions]
        assert firsts == sorted(firsts)
        assert [r.label for r in regions] == [1, 2, 3]

    def test_to_mask_roundtrip(self):
        rng = np.random.default_rng(4)
        mask = (rng.random((10, 12)) < 0.5).astype(np.uint8)
        regions = connected_components(mask)
        rebuilt = np.zeros_like(mask)
        for r in regions:
            rebuilt |= r.to_mask(mask.shape)
        assert np.array_equal(rebuilt, mask)


class TestGaussianBlur:
    def test_sigma_zero_is_identity(self):
        rng = np.random.default_rng(5)
        img = rng.random((20, 20))
        assert np.array_equal(gaussian_blur(img, 0.0), img)

    def test_constant_unchanged(self):
        img = np.full((15, 15), 0.37)
        np.testing.assert_allclose(gaussian_blur(img, 2.5), img, atol=1e-12)

    def test_impulse_center_value(self):
        img = np.zeros((41, 41))
        img[20, 20] = 1.0
        out = gaussian_blur(img, 1.0)
        kernel = gaussian_kernel_2d(1.0)
        expected = kernel[kernel.shape[0] // 2, kernel.shape[1] // 2]
        assert out[20, 20] == pytest.approx(expected, abs=1e-12)
        assert out[20, 20] == pytest.approx(0.159, abs=1e-2)

    def test_impulse_matches_full_kernel(self):
        img = np.zeros((41, 41))
        img[20, 20] = 1.0
        out = gaussian_blur(img, 1.5)
        kernel = gaussian_kernel_2d(1.5)
        r = kernel.shape[0] // 2
        np.testing.assert_allclose(out[20 - r:20 + r + 1, 20 - r:20 + r + 1],
                                   kernel, atol=1e-12)

    def test_mean_preserved_for_interior_support(self):
        rng = np.random.default_rng(6)
        img = np.zeros((48, 48))
        img[16:32, 16:32] = rng.random((16, 16))
        out = gaussian_blur(img, 2.0)  # radius 6 stays clear of the border
        assert abs(out.mean() - img.mean()) < 1e-6

    def test_range_stays_valid(self):
        rng = np.random.default_rng(7)
        for sigma in (0.4, 1.0, 3.0):
            img = rng.random((24, 24))
            out = gaussian_blur(img, sigma)
            assert out.min() >= 0.0 and out.max() <= 1.0

    def test_negative_sigma_raises(self):
        with pytest.raises(ValueError):
            gaussian_blur(np.zeros((4, 4)), -1.0)


class TestRandomStream:
    def test_reproducible_sequences(self):
        a = make_stream(12345, 7).random(10_000)
        b = make_stream(12345, 7).random(10_000)
        assert np.array_equal(a, b)

    def test_streams_differ(self):
        a = make_stream(12345, 7).random(1000)
        b = make_stream(12345, 8).random(1000)
        c = make_stream(12346, 7).random(1000)
        assert not np.array_equal(a, b)
        assert not np.array_equal(a, c)

    def test_negative_seed_rejected(self):
        with pytest.raises(ValueError):
            make_stream(-1, 0)
