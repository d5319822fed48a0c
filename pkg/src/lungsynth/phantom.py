"""Procedural chest phantoms with known ground truth.

These synthetic images stand in for radiographs wherever the toolkit
needs data with exact reference masks: demos, the test suite, and the
acceptance gate. A phantom is a bright field holding two dark,
taller-than-wide ellipses (one per image half); the generators return the
image together with the per-side ground-truth masks.

``shadow_bar_phantom`` builds the adversarial variant: the ellipses carry
an intensity ramp toward their rims and a wide soft-tissue bar crosses
both of them, darker under the left ellipse than the right. Capturing
either ellipse completely requires a threshold above the bar level on its
side, at which point the thresholded component fuses with the bar — so no
single global threshold segments both lungs well, while a progressive
per-side sweep does.
"""

from __future__ import annotations

import numpy as np

__all__ = ["ellipse_mask", "two_lung_phantom", "shadow_bar_phantom"]


def ellipse_mask(shape: tuple[int, int], center: tuple[float, float],
                 semi_axes: tuple[float, float]) -> np.ndarray:
    """Binary mask of a filled axis-aligned ellipse; center/axes are (x, y)."""
    h, w = shape
    cx, cy = center
    a, b = semi_axes
    ys, xs = np.mgrid[0:h, 0:w]
    inside = ((xs - cx) / a) ** 2 + ((ys - cy) / b) ** 2 <= 1.0
    return inside.astype(np.uint8)


def _elliptical_radius_sq(shape, center, semi_axes) -> np.ndarray:
    h, w = shape
    cx, cy = center
    a, b = semi_axes
    ys, xs = np.mgrid[0:h, 0:w]
    return ((xs - cx) / a) ** 2 + ((ys - cy) / b) ** 2


def two_lung_phantom(rng: np.random.Generator | None = None, size: int = 256,
                     noise_sigma: float = 0.005
                     ) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Bright field with two dark ellipses; position and size jitter with ``rng``.

    The ellipses darken toward their centers (0.26 at the rim down to 0.20),
    so a low threshold catches a concentric core and higher thresholds grow
    it to the full shape. Returns (image, left_mask, right_mask).
    """
    h = w = size

    def jitter(lo, hi):
        # rng=None yields the canonical mid-range phantom
        return (lo + hi) / 2.0 if rng is None else float(rng.uniform(lo, hi))

    image = np.full((h, w), 0.8, dtype=np.float64)
    masks = []
    for side in (0, 1):
        cx = (jitter(0.24, 0.29) if side == 0 else jitter(0.71, 0.76)) * w
        cy = jitter(0.42, 0.50) * h
        a = jitter(0.105, 0.135) * w
        b = jitter(0.19, 0.235) * h
        r2 = _elliptical_radius_sq((h, w), (cx, cy), (a, b))
        inside = r2 <= 1.0
        image[inside] = 0.20 + 0.06 * r2[inside]
        masks.append(inside.astype(np.uint8))

    if rng is not None and noise_sigma > 0:
        image = np.clip(image + rng.normal(0.0, noise_sigma, image.shape), 0.0, 1.0)
    return image, masks[0], masks[1]


def shadow_bar_phantom(rng: np.random.Generator | None = None, size: int = 256
                       ) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Phantom whose ellipses fuse with a soft-tissue bar at higher thresholds.

    Each ellipse has a flat 0.18 core and a rim ramping to 0.42, so full
    capture needs a threshold above 0.42. A full-width bar overlaps both
    ellipse bottoms at 0.30 (left portion) and 0.45 (right portion):
    thresholds above 0.30 fuse the left ellipse with the bar, and above
    0.45 everything merges into one border-touching slab. Returns
    (image, left_mask, right_mask).
    """
    h = w = size

    def jitter(lo, hi):
        return (lo + hi) / 2.0 if rng is None else float(rng.uniform(lo, hi))

    image = np.full((h, w), 0.8, dtype=np.float64)
    masks = []
    bottoms = []
    for side in (0, 1):
        cx = (jitter(0.26, 0.29) if side == 0 else jitter(0.71, 0.74)) * w
        cy = jitter(0.43, 0.46) * h
        a = jitter(0.105, 0.115) * w
        b = jitter(0.20, 0.22) * h
        r2 = _elliptical_radius_sq((h, w), (cx, cy), (a, b))
        inside = r2 <= 1.0
        r = np.sqrt(r2[inside])
        values = np.where(r < 0.8, 0.18, 0.18 + 0.24 * (r - 0.8) / 0.2)
        image[inside] = values
        masks.append(inside.astype(np.uint8))
        bottoms.append(cy + b)

    # The bar overlaps the lower portion of both ellipses and spans the
    # full width, touching both image borders.
    bar_top = int(min(bottoms) - 0.35 * (min(bottoms) - 0.45 * h))
    bar_height = int(0.16 * h)
    bar_top = min(bar_top, h - bar_height - 4)
    split = int(0.55 * w)
    bar = np.full((bar_height, w), 0.45, dtype=np.float64)
    bar[:, :split] = 0.30
    rows = slice(bar_top, bar_top + bar_height)
    image[rows, :] = np.minimum(image[rows, :], bar)
    return image, masks[0], masks[1]
