import numpy as np
import pytest

from lungsynth.errors import DimensionMismatch, ZeroVector
from lungsynth.losses import (anomaly_map, binarize_error, dice_coefficient,
                              dice_loss, feature_alignment_loss,
                              global_recon_loss, global_recon_loss_grad,
                              local_recon_loss, local_recon_loss_grad,
                              total_loss)
from lungsynth.metrics import dice_score


class TestFeatureAlignment:
    def test_identical(self):
        v = np.array([0.3, -1.2, 2.0])
        assert feature_alignment_loss(v, v) == 0.0

    def test_orthogonal(self):
        assert feature_alignment_loss([1.0, 0.0], [0.0, 1.0]) == 1.0

    def test_opposite(self):
        v = np.array([0.5, -2.0, 1.0])
        assert feature_alignment_loss(v, -v) == 2.0

    def test_scale_invariant(self):
        rng = np.random.default_rng(0)
        for _ in range(20):
            u = rng.normal(size=16)
            v = rng.normal(size=16)
            c = float(rng.uniform(0.01, 100.0))
            assert feature_alignment_loss(c * u, v) == pytest.approx(
                feature_alignment_loss(u, v), abs=1e-12)

    def test_zero_vector_raises(self):
        with pytest.raises(ZeroVector):
            feature_alignment_loss([0.0, 0.0], [1.0, 0.0])

    def test_length_mismatch(self):
        with pytest.raises(DimensionMismatch):
            feature_alignment_loss([1.0, 2.0], [1.0, 2.0, 3.0])


class TestGlobalReconLoss:
    def test_identical_images(self):
        img = np.random.default_rng(1).random((8, 8))
        assert global_recon_loss(img, img) == 0.0

    def test_constant_difference(self):
        a = np.zeros((6, 6))
        b = np.full((6, 6), 0.5)
        assert global_recon_loss(a, b) == pytest.approx(0.25)

    def test_single_pixel_difference(self):
        a = np.zeros((2, 2))
        b = np.zeros((2, 2))
        b[0, 0] = 0.4
        assert global_recon_loss(a, b) == pytest.approx(0.16 / 4)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            global_recon_loss(np.zeros((2, 2)), np.zeros((3, 2)))


class TestLocalReconLoss:
    def test_empty_mask_is_zero(self):
        rng = np.random.default_rng(2)
        a, b = rng.random((5, 5)), rng.random((5, 5))
        assert local_recon_loss(a, b, np.zeros((5, 5))) == 0.0

    def test_full_mask_matches_global(self):
        rng = np.random.default_rng(3)
        a, b = rng.random((12, 12)), rng.random((12, 12))
        local = local_recon_loss(a, b, np.ones((12, 12)), eps=1e-8)
        glob = global_recon_loss(a, b)
        assert local == pytest.approx(glob, rel=1e-6)

    def test_single_pixel_mask(self):
        a = np.zeros((3, 3))
        b = np.zeros((3, 3))
        b[1, 1] = 0.3
        m = np.zeros((3, 3))
        m[1, 1] = 1
        eps = 1e-8
        assert local_recon_loss(a, b, m, eps) == pytest.approx(0.09 / (1 + eps))


class TestBinarizeError:
    def test_identical_images(self):
        img = np.random.default_rng(4).random((6, 6))
        assert not binarize_error(img, img, 0.1).any()

    def test_boundary_inclusive(self):
        a = np.full((4, 4), 0.5)
        b = np.zeros((4, 4))
        assert binarize_error(a, b, 0.25).all()  # 0.25 >= 0.25

    def test_elementwise(self):
        a = np.array([[0.1, 0.6]])
        b = np.zeros((1, 2))
        assert binarize_error(a, b, 0.25).tolist() == [[0, 1]]

    def test_consistent_with_anomaly_map(self):
        rng = np.random.default_rng(5)
        for _ in range(10):
            a, b = rng.random((16, 16)), rng.random((16, 16))
            tau = float(rng.uniform(0.001, 0.2))
            via_sq = binarize_error(a, b, tau)
            via_abs = (anomaly_map(a, b) >= np.sqrt(tau)).astype(np.uint8)
            assert np.array_equal(via_sq, via_abs)


class TestDiceLoss:
    def test_identical(self):
        m = np.zeros((6, 6), dtype=np.uint8)
        m[2:4, 2:4] = 1
        assert dice_loss(m, m) == 0.0

    def test_disjoint(self):
        a = np.zeros((6, 6), dtype=np.uint8)
        b = np.zeros((6, 6), dtype=np.uint8)
        a[0, 0] = 1
        b[5, 5] = 1
        assert dice_loss(a, b) == 1.0

    def test_partial_overlap(self):
        a = np.zeros((4, 4), dtype=np.uint8)
        b = np.zeros((4, 4), dtype=np.uint8)
        a.flat[:4] = 1
        b.flat[2:8] = 1
        # |a| = 4, |b| = 6, overlap = 2 -> coefficient 0.4
        assert dice_loss(a, b) == pytest.approx(0.6)

    def test_both_empty(self):
        z = np.zeros((4, 4), dtype=np.uint8)
        assert dice_loss(z, z) == 0.0
        assert dice_coefficient(z, z) == 1.0

    def test_symmetry(self):
        rng = np.random.default_rng(6)
        a = (rng.random((10, 10)) > 0.5).astype(np.uint8)
        b = (rng.random((10, 10)) > 0.5).astype(np.uint8)
        assert dice_loss(a, b) == dice_loss(b, a)

    def test_matches_metric_complement(self):
        rng = np.random.default_rng(7)
        a = (rng.random((9, 9)) > 0.6).astype(np.uint8)
        b = (rng.random((9, 9)) > 0.6).astype(np.uint8)
        assert dice_loss(a, b) == pytest.approx(1.0 - dice_score(a, b))


class TestAnomalyMap:
    def test_identical(self):
        img = np.random.default_rng(8).random((5, 5))
        assert not anomaly_map(img, img).any()

    def test_constant_difference(self):
        a = np.ones((4, 4))
        b = np.full((4, 4), 0.25)
        np.testing.assert_allclose(anomaly_map(a, b), 0.75)

    def test_symmetric(self):
        rng = np.random.default_rng(9)
        a, b = rng.random((7, 7)), rng.random((7, 7))
        assert np.array_equal(anomaly_map(a, b), anomaly_map(b, a))


class TestTotalLoss:
    def test_all_zero(self):
        img = np.random.default_rng(10).random((8, 8))
        mask = np.zeros((8, 8), dtype=np.uint8)
        v = np.array([1.0, 2.0])
        report = total_loss(img, img, img, mask, f_syn=v, f_norm=v)
        assert report.total == 0.0

    def test_sum_identity(self):
        rng = np.random.default_rng(11)
        i_norm = rng.random((10, 10))
        i_syn = np.clip(i_norm + 0.1, 0, 1)
        i_hat = rng.random((10, 10))
        mask = (rng.random((10, 10)) > 0.7).astype(np.uint8)
        f_a, f_b = rng.normal(size=8), rng.normal(size=8)
        report = total_loss(i_norm, i_syn, i_hat, mask, f_syn=f_a, f_norm=f_b)
        assert report.total == report.feat + report.global_recon + \
            report.local_recon + report.dice

    def test_terms_match_standalone_ops(self):
        rng = np.random.default_rng(12)
        i_norm = rng.random((9, 9))
        i_syn = np.clip(i_norm + 0.2, 0, 1)
        i_hat = rng.random((9, 9))
        mask = (rng.random((9, 9)) > 0.6).astype(np.uint8)
        f_a, f_b = rng.normal(size=5), rng.normal(size=5)
        tau, eps = 0.02, 1e-8
        report = total_loss(i_norm, i_syn, i_hat, mask, f_syn=f_a, f_norm=f_b,
                            tau=tau, eps=eps)
        assert report.feat == feature_alignment_loss(f_a, f_b)
        assert report.global_recon == global_recon_loss(i_norm, i_hat)
        assert report.local_recon == local_recon_loss(i_norm, i_hat, mask, eps)
        assert report.dice == dice_loss(binarize_error(i_syn, i_hat, tau), mask)

    def test_weighted(self):
        rng = np.random.default_rng(13)
        i_norm = rng.random((6, 6))
        i_hat = rng.random((6, 6))
        mask = np.ones((6, 6), dtype=np.uint8)
        report = total_loss(i_norm, i_norm, i_hat, mask,
                            weights=(1.0, 2.0, 0.0, 0.5))
        expected = 2.0 * report.global_recon + 0.5 * report.dice
        assert report.total == pytest.approx(expected)

    def test_feature_vectors_must_pair(self):
        img = np.zeros((4, 4))
        with pytest.raises(ValueError):
            total_loss(img, img, img, np.zeros((4, 4)), f_syn=[1.0])


class TestGradients:
    def finite_difference(self, fn, i_hat, h=1e-5):
        grad = np.zeros_like(i_hat)
        for idx in np.ndindex(i_hat.shape):
            plus = i_hat.copy()
            minus = i_hat.copy()
            plus[idx] += h
            minus[idx] -= h
            grad[idx] = (fn(plus) - fn(minus)) / (2 * h)
        return grad

    def test_global_grad_matches_central_differences(self):
        rng = np.random.default_rng(14)
        for _ in range(20):
            i_norm = rng.random((8, 8))
            i_hat = rng.random((8, 8))
            analytic = global_recon_loss_grad(i_norm, i_hat)
            numeric = self.finite_difference(
                lambda x: global_recon_loss(i_norm, x), i_hat)
            assert np.abs(analytic - numeric).max() < 1e-5

    def test_local_grad_matches_central_differences(self):
        rng = np.random.default_rng(15)
        for _ in range(20):
            i_norm = rng.random((8, 8))
            i_hat = rng.random((8, 8))
            mask = (rng.random((8, 8)) > 0.5).astype(np.uint8)
            analytic = local_recon_loss_grad(i_norm, i_hat, mask)
            numeric = self.finite_difference(
                lambda x: local_recon_loss(i_norm, x, mask), i_hat)
            assert np.abs(analytic - numeric).max() < 1e-5
