"""Evaluation metrics: ranking quality at image level, overlap at pixel level.

AUC is computed as the Mann-Whitney rank statistic (fraction of
positive-negative pairs ranked correctly, ties counted half), which is the
exact empirical area under the ROC curve with no interpolation ambiguity.
Average precision is the uninterpolated step sum over descending unique
score thresholds, with tied scores grouped at one threshold; users
comparing against interpolated AP variants should expect small
discrepancies by design.
"""

from __future__ import annotations

import numpy as np
from scipy.stats import rankdata

from .errors import DimensionMismatch, NoPositives, SingleClass

__all__ = ["auc", "average_precision", "dice_score", "image_score_from_map"]


def _split(scores, labels) -> tuple[np.ndarray, np.ndarray]:
    s = np.asarray(scores, dtype=np.float64).ravel()
    y = np.asarray(labels).ravel()
    if s.size != y.size:
        raise DimensionMismatch(f"{s.size} scores vs {y.size} labels")
    if not np.all((y == 0) | (y == 1)):
        raise ValueError("labels must be 0 (normal) or 1 (abnormal)")
    return s, y.astype(np.int64)


def auc(scores, labels) -> float:
    """Probability that a random positive outscores a random negative.

    Ties count one half. Requires at least one sample of each class.
    """
    s, y = _split(scores, labels)
    n_pos = int(y.sum())
    n_neg = int(y.size - n_pos)
    if n_pos == 0 or n_neg == 0:
        raise SingleClass("AUC needs both a positive and a negative sample")
    ranks = rankdata(s, method="average")
    u = float(ranks[y == 1].sum()) - n_pos * (n_pos + 1) / 2.0
    return u / (n_pos * n_neg)


def average_precision(scores, labels) -> float:
    """Uninterpolated average precision over descending score thresholds."""
    s, y = _split(scores, labels)
    n_pos = int(y.sum())
    if n_pos == 0:
        raise NoPositives("average precision needs at least one positive")
    order = np.argsort(-s, kind="stable")
    s, y = s[order], y[order]
    ap = 0.0
    recall_prev = 0.0
    tp = 0
    seen = 0
    i = 0
    n = s.size
    while i < n:
        j = i
        while j < n and s[j] == s[i]:   # group ties at one threshold
            j += 1
        tp += int(y[i:j].sum())
        seen += j - i
        recall = tp / n_pos
        precision = tp / seen
        ap += (recall - recall_prev) * precision
        recall_prev = recall
        i = j
    return ap


def dice_score(pred: np.ndarray, gt: np.ndarray) -> float:
    """Overlap between two binary masks: 2|A n B| / (|A| + |B|).

    Two empty masks agree perfectly and score 1.
    """
    p = np.asarray(pred)
    g = np.asarray(gt)
    if p.shape != g.shape:
        raise DimensionMismatch(f"{p.shape} vs {g.shape}")
    p_sum = int(np.count_nonzero(p))
    g_sum = int(np.count_nonzero(g))
    if p_sum + g_sum == 0:
        return 1.0
    inter = int(np.count_nonzero((p > 0) & (g > 0)))
    return 2.0 * inter / (p_sum + g_sum)


def image_score_from_map(a: np.ndarray, reducer: str = "topk",
                         top_k_fraction: float = 0.01) -> float:
    """Reduce a pixel anomaly map to one image-level score.

    Reducers: "max", "mean", or "topk" (mean of the hottest
    ``top_k_fraction`` of pixels, at least one pixel). The top-k mean is
    the default because a single hot pixel is noise-prone and the full
    mean washes out small lesions.
    """
    arr = np.asarray(a, dtype=np.float64).ravel()
    if arr.size == 0:
        raise ValueError("empty anomaly map")
    if reducer == "max":
        return float(arr.max())
    if reducer == "mean":
        return float(arr.mean())
    if reducer == "topk":
        if not 0.0 < top_k_fraction <= 1.0:
            raise ValueError("top_k_fraction must lie in (0, 1]")
        k = max(1, int(round(top_k_fraction * arr.size)))
        return float(np.partition(arr, arr.size - k)[arr.size - k:].mean())
    raise ValueError(f"unknown reducer {reducer!r}")
