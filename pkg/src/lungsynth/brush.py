"""Brush painting of the base opacity layer.

Anomalies start as strokes from a soft elliptical brush: anchor points are
sampled uniformly inside the lung mask, and from each anchor a short
random walk deposits overlapping stamps whose size, orientation and
opacity jitter step to step. The accumulated layer is an additive opacity
field in [0, 1]; strokes stay connected and organic, resembling the
vessel- and tissue-like streaks seen in real radiographs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import EmptyLungMask

__all__ = ["BrushConfig", "sample_anchors", "stamp", "paint_base"]

# Width at which base_radius and walk_step are calibrated; both scale
# linearly with the actual image width.
REFERENCE_WIDTH = 256


@dataclass
class BrushConfig:
    """Stroke parameters. Ranges are inclusive [min, max] pairs.

    ``base_radius`` and ``walk_step`` are expressed in pixels at a 256-px
    working width and scale proportionally with the painted image's width.
    """

    anchor_count: tuple[int, int] = (2, 5)
    stamps_per_anchor: tuple[int, int] = (20, 60)
    base_radius: float = 6.0
    size_jitter: float = 0.5
    angle_jitter: float = 45.0     # degrees
    opacity_base: float = 0.25
    opacity_jitter: float = 0.6
    stamp_aspect: float = 0.4      # minor/major axis ratio
    walk_step: float = 3.0

    def validate(self) -> None:
        for name, rng in (("anchor_count", self.anchor_count),
                          ("stamps_per_anchor", self.stamps_per_anchor)):
            if rng[0] < 1 or rng[0] > rng[1]:
                raise ValueError(f"{name} range must satisfy 1 <= min <= max")
        for name, frac in (("size_jitter", self.size_jitter),
                           ("opacity_jitter", self.opacity_jitter)):
            if not 0.0 <= frac <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1]")
        if self.base_radius < 1.0:
            raise ValueError("base_radius must be >= 1")
        if not 0.0 < self.opacity_base <= 1.0:
            raise ValueError("opacity_base must lie in (0, 1]")
        if not 0.0 < self.stamp_aspect <= 1.0:
            raise ValueError("stamp_aspect must lie in (0, 1]")
        if self.angle_jitter < 0 or self.walk_step <= 0:
            raise ValueError("angle_jitter must be >= 0 and walk_step > 0")


def sample_anchors(lung: np.ndarray, count: int,
                   rng: np.random.Generator) -> np.ndarray:
    """Sample ``count`` anchor points uniformly from the lung foreground.

    Sampling is without replacement; if ``count`` exceeds the number of
    foreground pixels it falls back to sampling with replacement. Returns
    an (count, 2) int array of (x, y) points.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    rows, cols = np.nonzero(lung)
    if rows.size == 0:
        raise EmptyLungMask("cannot sample anchors from an empty lung mask")
    idx = rng.choice(rows.size, size=count, replace=count > rows.size)
    return np.column_stack([cols[idx], rows[idx]])


def _stamp_into(buf: np.ndarray, center: tuple[float, float], radius: float,
                angle: float, opacity: float, aspect: float) -> None:
    """Accumulate one rotated raised-cosine ellipse into ``buf`` in place."""
    if opacity <= 0.0:
        return
    h, w = buf.shape
    cx, cy = center
    ext = int(math.ceil(radius)) + 1
    x0 = max(int(math.floor(cx)) - ext, 0)
    x1 = min(int(math.ceil(cx)) + ext, w - 1)
    y0 = max(int(math.floor(cy)) - ext, 0)
    y1 = min(int(math.ceil(cy)) + ext, h - 1)
    if x0 > x1 or y0 > y1:
        return
    ys, xs = np.mgrid[y0:y1 + 1, x0:x1 + 1]
    dx = xs - cx
    dy = ys - cy
    theta = math.radians(angle)
    u = dx * math.cos(theta) + dy * math.sin(theta)
    v = -dx * math.sin(theta) + dy * math.cos(theta)
    major = radius
    minor = radius * aspect
    d = np.sqrt((u / major) ** 2 + (v / minor) ** 2)
    profile = np.where(d < 1.0, 0.5 * (1.0 + np.cos(math.pi * np.minimum(d, 1.0))), 0.0)
    patch = buf[y0:y1 + 1, x0:x1 + 1]
    np.minimum(patch + opacity * profile, 1.0, out=patch)


def stamp(layer: np.ndarray, center: tuple[float, float], radius: float,
          angle: float, opacity: float, aspect: float = 1.0) -> np.ndarray:
    """Return ``layer`` with one soft elliptical stamp added.

    The stamp is a raised-cosine profile: full ``opacity`` at the center,
    falling smoothly to zero at the rotated ellipse boundary (semi-axes
    ``radius`` and ``radius * aspect``). Addition saturates at 1, and
    stamps reaching past the image edge are clipped.
    """
    if radius < 1.0:
        raise ValueError("radius must be >= 1")
    out = np.asarray(layer, dtype=np.float64).copy()
    _stamp_into(out, center, radius, angle, opacity, aspect)
    return out


def paint_base(lung: np.ndarray, config: BrushConfig | None = None,
               rng: np.random.Generator | None = None,
               trace: list | None = None) -> np.ndarray:
    """Paint the base opacity layer inside the lung mask.

    For each sampled anchor a random walk deposits stamps: every step the
    heading drifts by up to ``angle_jitter`` degrees, radius and opacity
    are jittered around their base values, and the cursor advances by
    ``walk_step``. The finished layer is multiplied by the lung mask so
    paint never escapes the lung fields.

    With ``trace`` given, each realized stamp appends a record of its
    parameters (used for jitter-bound checks and provenance).
    """
    if config is None:
        config = BrushConfig()
    config.validate()
    if rng is None:
        rng = np.random.default_rng()
    lung = np.asarray(lung)
    h, w = lung.shape
    scale = w / REFERENCE_WIDTH
    radius_base = max(config.base_radius * scale, 1.0)
    step = config.walk_step * scale

    n_anchors = int(rng.integers(config.anchor_count[0], config.anchor_count[1] + 1))
    anchors = sample_anchors(lung, n_anchors, rng)

    buf = np.zeros((h, w), dtype=np.float64)
    for ax, ay in anchors:
        n_stamps = int(rng.integers(config.stamps_per_anchor[0],
                                    config.stamps_per_anchor[1] + 1))
        heading = float(rng.uniform(0.0, 360.0))
        x, y = float(ax), float(ay)
        for _ in range(n_stamps):
            radius = radius_base * (1.0 + rng.uniform(-config.size_jitter,
                                                      config.size_jitter))
            radius = max(radius, 1.0)
            opacity = config.opacity_base * (1.0 + rng.uniform(-config.opacity_jitter,
                                                               config.opacity_jitter))
            opacity = min(max(opacity, 0.0), 1.0)
            _stamp_into(buf, (x, y), radius, heading, opacity, config.stamp_aspect)
            if trace is not None:
                trace.append({
                    "anchor": [int(ax), int(ay)],
                    "center": [round(x, 3), round(y, 3)],
                    "radius": radius,
                    "opacity": opacity,
                    "heading": heading % 360.0,
                })
            delta = float(rng.uniform(-config.angle_jitter, config.angle_jitter))
            if trace is not None:
                trace[-1]["heading_delta"] = delta
            heading += delta
            x += step * math.cos(math.radians(heading))
            y += step * math.sin(math.radians(heading))

    buf *= lung
    return buf
