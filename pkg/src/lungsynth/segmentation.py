"""Progressive multi-threshold lung-field segmentation.

A single global intensity threshold is a poor lung segmenter: set it low
and the lung fields come out fragmented, set it high and they fuse with
the mediastinum, the abdomen shadow, or collimation artifacts. This
module instead sweeps an ascending series of thresholds. At each step the
sub-threshold mask is decomposed into connected components, components are
screened by geometric rules (roundness, taller-than-wide, limited border
contact, area band), the two largest survivors are assigned to the image
halves, and each side's mask is replaced whenever a strictly larger
rule-conforming candidate appears that stays disjoint from the other
side. Each side therefore locks in the best representation it reached
before its component fused with something implausible.

"Left" and "right" are image coordinates: the left mask is the region
whose centroid lies in the left half of the image.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .errors import NoLungFound
from .image import Region, connected_components, threshold_below

__all__ = [
    "SegmentationConfig",
    "LungMasks",
    "filter_candidates",
    "select_lung_pair",
    "evaluate_update",
    "update_masks",
    "segment_lungs",
]

DEFAULT_THRESHOLDS = tuple(round(0.200 + 0.025 * i, 3) for i in range(13))


@dataclass
class SegmentationConfig:
    """Tunable rules for the progressive threshold sweep.

    Defaults assume contrast-normalized intensities: the sweep starts low
    enough that lungs are still fragmented and stops before the
    mediastinum is absorbed. All constants are exposed because radiograph
    populations vary; the shipped configuration file documents each one.
    """

    thresholds: tuple[float, ...] = DEFAULT_THRESHOLDS
    circularity_min: float = 0.15
    border_contact_max: float = 0.05   # fraction of the region perimeter
    area_min: float = 0.02             # fraction of the image area
    area_max: float = 0.35
    require_taller_than_wide: bool = True
    connectivity: int = 8
    fill_holes: bool = False

    def validate(self) -> None:
        t = self.thresholds
        if len(t) < 2 or any(b <= a for a, b in zip(t, t[1:])):
            raise ValueError("thresholds must be strictly ascending with >= 2 entries")
        if not all(0.0 < x < 1.0 for x in t):
            raise ValueError("thresholds must lie in (0, 1)")
        if not 0.0 < self.area_min < self.area_max < 1.0:
            raise ValueError("require 0 < area_min < area_max < 1")
        if not 0.0 < self.circularity_min < 1.0:
            raise ValueError("circularity_min must lie in (0, 1)")
        if not 0.0 <= self.border_contact_max < 1.0:
            raise ValueError("border_contact_max must lie in [0, 1)")
        if self.connectivity not in (4, 8):
            raise ValueError("connectivity must be 4 or 8")


@dataclass(eq=False)
class LungMasks:
    """Per-side lung masks plus their union.

    ``left`` and ``right`` are pixel-disjoint; ``combined`` is always
    their union. A nonempty side is a single connected component by
    construction (each update installs one component verbatim).
    """

    left: np.ndarray
    right: np.ndarray
    combined: np.ndarray | None = None

    def __post_init__(self):
        if self.combined is None:
            self.combined = (self.left | self.right).astype(np.uint8)

    @classmethod
    def empty(cls, shape: tuple[int, int]) -> "LungMasks":
        z = np.zeros(shape, dtype=np.uint8)
        return cls(left=z.copy(), right=z.copy(), combined=z.copy())

    def side(self, name: str) -> np.ndarray:
        if name not in ("left", "right"):
            raise ValueError("side must be 'left' or 'right'")
        return self.left if name == "left" else self.right


def filter_candidates(regions: list[Region], config: SegmentationConfig,
                      image_dims: tuple[int, int]) -> list[Region]:
    """Keep regions that look like a lung field.

    A survivor must be round enough, taller than wide (if required), have
    at most ``border_contact_max`` of its perimeter on the image border
    and an area within the configured fraction band of the image area.
    """
    w, h = image_dims
    lo = config.area_min * w * h
    hi = config.area_max * w * h
    kept = []
    for r in regions:
        if r.circularity < config.circularity_min:
            continue
        if config.require_taller_than_wide and r.bbox_height <= r.bbox_width:
            continue
        if r.border_contact > config.border_contact_max * r.perimeter:
            continue
        if not lo <= r.area <= hi:
            continue
        kept.append(r)
    return kept


def select_lung_pair(candidates: list[Region], image_dims: tuple[int, int]
                     ) -> tuple[Region | None, Region | None]:
    """Pick the two largest candidates and assign them to image halves.

    Each selected region goes to the side containing its centroid x; when
    both land on the same half only that side is populated (with the
    larger one). Area ties break toward smaller centroid x, then smaller
    label, so selection is deterministic.
    """
    if not candidates:
        return None, None
    ranked = sorted(candidates, key=lambda r: (-r.area, r.centroid[0], r.label))
    top = ranked[:2]
    mid = image_dims[0] / 2.0
    left = next((r for r in top if r.centroid[0] < mid), None)
    right = next((r for r in top if r.centroid[0] >= mid), None)
    return left, right


def evaluate_update(current: LungMasks, candidate: Region, side: str) -> str:
    """Decide whether ``candidate`` should replace the ``side`` mask.

    Returns "accept", "not_larger", or "overlap". The candidate is assumed
    to have already passed :func:`filter_candidates`; this check enforces
    strict area growth and disjointness from the opposite side.
    """
    side_mask = current.side(side)
    if candidate.area <= int(side_mask.sum()):
        return "not_larger"
    other = current.right if side == "left" else current.left
    if other.any() and other[candidate.coords[:, 0], candidate.coords[:, 1]].any():
        return "overlap"
    return "accept"


def update_masks(current: LungMasks, candidate: Region, side: str) -> LungMasks:
    """Replace one side mask with the candidate's pixels, if it qualifies.

    The replacement happens only when the candidate is strictly larger
    than the current side mask and disjoint from the other side; otherwise
    the input masks are returned unchanged. Rejection is silent here (the
    sweep records it in the trace).
    """
    if evaluate_update(current, candidate, side) != "accept":
        return current
    new_side = candidate.to_mask(current.left.shape)
    left = new_side if side == "left" else current.left
    right = new_side if side == "right" else current.right
    return LungMasks(left=left, right=right)


def _region_stats(r: Region) -> dict:
    return {
        "label": r.label,
        "area": r.area,
        "bbox": list(r.bbox),
        "centroid": [round(r.centroid[0], 2), round(r.centroid[1], 2)],
        "perimeter": r.perimeter,
        "border_contact": r.border_contact,
        "circularity": round(r.circularity, 4),
    }


def segment_lungs(image: np.ndarray, config: SegmentationConfig | None = None,
                  trace: list | None = None) -> LungMasks:
    """Run the full progressive threshold sweep on a normalized image.

    Parameters
    ----------
    image : 2-D float array in [0, 1]
        Contrast-normalized radiograph.
    config : SegmentationConfig, optional
    trace : list, optional
        When given, one record per threshold is appended describing the
        candidate statistics and the accept/reject decision for each side.

    Raises
    ------
    NoLungFound
        If both sides are still empty after the last threshold (for
        example on a constant image).
    """
    if config is None:
        config = SegmentationConfig()
    config.validate()
    image = np.asarray(image, dtype=np.float64)
    h, w = image.shape
    masks = LungMasks.empty((h, w))

    for t in config.thresholds:
        mask = threshold_below(image, t)
        regions = connected_components(mask, config.connectivity)
        candidates = filter_candidates(regions, config, (w, h))
        left_cand, right_cand = select_lung_pair(candidates, (w, h))
        record = None
        if trace is not None:
            record = {
                "threshold": t,
                "n_regions": len(regions),
                "candidates": [_region_stats(r) for r in candidates],
            }
        for side, cand in (("left", left_cand), ("right", right_cand)):
            if cand is None:
                decision = "no_candidate"
            else:
                decision = evaluate_update(masks, cand, side)
                if decision == "accept":
                    masks = update_masks(masks, cand, side)
            if record is not None:
                record[side] = {
                    "decision": decision,
                    "candidate": None if cand is None else cand.label,
                }
        if trace is not None:
            trace.append(record)

    if config.fill_holes:
        left = ndimage.binary_fill_holes(masks.left).astype(np.uint8)
        right = ndimage.binary_fill_holes(masks.right).astype(np.uint8)
        masks = LungMasks(left=left, right=right)

    if not masks.left.any() and not masks.right.any():
        raise NoLungFound("no threshold produced a rule-conforming lung candidate")
    return masks
