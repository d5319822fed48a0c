"""Training-loss terms and the residual-based inference rule.

Everything here is a pure numeric operation on arrays, so an external
trainer (or the test suite) can evaluate the terms without pulling in any
autodiff framework. Closed-form gradients with respect to the
reconstruction are provided for the two quadratic terms; they exist to
let integrations sanity-check their autodiff, not to drive an optimizer.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, ZeroVector

__all__ = [
    "LossReport",
    "feature_alignment_loss",
    "global_recon_loss",
    "global_recon_loss_grad",
    "local_recon_loss",
    "local_recon_loss_grad",
    "binarize_error",
    "dice_coefficient",
    "dice_loss",
    "total_loss",
    "anomaly_map",
]

DEFAULT_TAU = 0.01
DEFAULT_EPS = 1e-8


def _check_shapes(a: np.ndarray, b: np.ndarray) -> None:
    if a.shape != b.shape:
        raise DimensionMismatch(f"{a.shape} vs {b.shape}")


@dataclass
class LossReport:
    """The four loss terms and their (optionally weighted) sum."""

    feat: float
    global_recon: float
    local_recon: float
    dice: float
    total: float

    def to_dict(self) -> dict:
        return {
            "feat": self.feat,
            "global": self.global_recon,
            "local": self.local_recon,
            "dice": self.dice,
            "total": self.total,
        }


def feature_alignment_loss(f_syn, f_norm) -> float:
    """1 - cosine similarity between two feature vectors; range [0, 2].

    The norm product is computed as sqrt(|a|^2 * |b|^2) so that identical
    and exactly opposite vectors return 0 and 2 with no round-off.
    """
    a = np.asarray(f_syn, dtype=np.float64).ravel()
    b = np.asarray(f_norm, dtype=np.float64).ravel()
    _check_shapes(a, b)
    na2 = float(np.dot(a, a))
    nb2 = float(np.dot(b, b))
    if na2 == 0.0 or nb2 == 0.0:
        raise ZeroVector("cosine similarity undefined for zero-norm vectors")
    return 1.0 - float(np.dot(a, b)) / math.sqrt(na2 * nb2)


def global_recon_loss(i_norm: np.ndarray, i_hat: np.ndarray) -> float:
    """Mean squared pixel error over the whole image.

    The mean (rather than the raw sum) keeps the value commensurate with
    the per-pixel-normalized local term and independent of resolution; the
    constant factor is absorbed by any trainer's learning rate.
    """
    a = np.asarray(i_norm, dtype=np.float64)
    b = np.asarray(i_hat, dtype=np.float64)
    _check_shapes(a, b)
    return float(np.mean((a - b) ** 2))


def global_recon_loss_grad(i_norm: np.ndarray, i_hat: np.ndarray) -> np.ndarray:
    """d(global_recon_loss)/d(i_hat) = 2 (i_hat - i_norm) / N."""
    a = np.asarray(i_norm, dtype=np.float64)
    b = np.asarray(i_hat, dtype=np.float64)
    _check_shapes(a, b)
    return 2.0 * (b - a) / a.size


def local_recon_loss(i_norm: np.ndarray, i_hat: np.ndarray, mask: np.ndarray,
                     eps: float = DEFAULT_EPS) -> float:
    """Squared error restricted to the mask, normalized by the mask area.

    An all-zero mask yields 0 (numerator vanishes, denominator is eps).
    """
    if eps <= 0:
        raise ValueError("eps must be > 0")
    a = np.asarray(i_norm, dtype=np.float64)
    b = np.asarray(i_hat, dtype=np.float64)
    m = np.asarray(mask, dtype=np.float64)
    _check_shapes(a, b)
    _check_shapes(a, m)
    num = float(np.sum(((a - b) * m) ** 2))
    return num / (float(m.sum()) + eps)


def local_recon_loss_grad(i_norm: np.ndarray, i_hat: np.ndarray, mask: np.ndarray,
                          eps: float = DEFAULT_EPS) -> np.ndarray:
    """d(local_recon_loss)/d(i_hat) = 2 (i_hat - i_norm) * mask / (sum(mask) + eps)."""
    a = np.asarray(i_norm, dtype=np.float64)
    b = np.asarray(i_hat, dtype=np.float64)
    m = np.asarray(mask, dtype=np.float64)
    _check_shapes(a, b)
    _check_shapes(a, m)
    return 2.0 * (b - a) * m / (float(m.sum()) + eps)


def binarize_error(i_syn: np.ndarray, i_hat: np.ndarray,
                   tau: float = DEFAULT_TAU) -> np.ndarray:
    """Predicted anomaly mask: squared reconstruction error at or above tau."""
    if tau <= 0:
        raise ValueError("tau must be > 0")
    a = np.asarray(i_syn, dtype=np.float64)
    b = np.asarray(i_hat, dtype=np.float64)
    _check_shapes(a, b)
    return (((a - b) ** 2) >= tau).astype(np.uint8)


def dice_coefficient(pred: np.ndarray, gt: np.ndarray) -> float:
    """2|A n B| / (|A| + |B|); two empty masks agree perfectly (1.0)."""
    p = np.asarray(pred)
    g = np.asarray(gt)
    _check_shapes(p, g)
    p_sum = int(np.count_nonzero(p))
    g_sum = int(np.count_nonzero(g))
    if p_sum + g_sum == 0:
        return 1.0
    inter = int(np.count_nonzero((p > 0) & (g > 0)))
    return 2.0 * inter / (p_sum + g_sum)


def dice_loss(pred: np.ndarray, gt: np.ndarray) -> float:
    """1 - Dice coefficient, so perfect overlap scores 0."""
    return 1.0 - dice_coefficient(pred, gt)


def anomaly_map(i: np.ndarray, i_hat: np.ndarray) -> np.ndarray:
    """Pixel-wise absolute difference between an image and its reconstruction."""
    a = np.asarray(i, dtype=np.float64)
    b = np.asarray(i_hat, dtype=np.float64)
    _check_shapes(a, b)
    return np.abs(a - b)


def total_loss(i_norm: np.ndarray, i_syn: np.ndarray, i_hat: np.ndarray,
               m_anomaly: np.ndarray, f_syn=None, f_norm=None,
               tau: float = DEFAULT_TAU, eps: float = DEFAULT_EPS,
               weights: tuple[float, float, float, float] = (1.0, 1.0, 1.0, 1.0),
               ) -> LossReport:
    """Compute all four terms and their sum.

    ``weights`` is (feat, global, local, dice) and defaults to the
    unweighted sum. The feature term requires both feature vectors; when
    they are omitted it contributes 0. The dice term compares the
    ground-truth mask against the error binarization of (i_syn, i_hat) at
    ``tau``.
    """
    if (f_syn is None) != (f_norm is None):
        raise ValueError("provide both feature vectors or neither")
    feat = 0.0 if f_syn is None else feature_alignment_loss(f_syn, f_norm)
    glob = global_recon_loss(i_norm, i_hat)
    local = local_recon_loss(i_norm, i_hat, m_anomaly, eps)
    pred = binarize_error(i_syn, i_hat, tau)
    dice = dice_loss(pred, m_anomaly)
    w_f, w_g, w_l, w_d = weights
    total = w_f * feat + w_g * glob + w_l * local + w_d * dice
    return LossReport(feat=feat, global_recon=glob, local_recon=local,
                      dice=dice, total=total)
