"""Realism transforms applied to the painted opacity layer.

Three stages, always composed in the same order when enabled:

1. crystallize — quantize the layer over a random Voronoi partition,
   giving sharp irregular cell boundaries.
2. blur — soften the layer to emulate dense tissue and gradual margins.
3. rib scale — attenuate the layer where the source image is bright, so
   synthetic opacities never paint over high-density bone shadows.

Stage inclusion is Bernoulli per stage, which varies the lesion style
from sample to sample while keeping full determinism for a fixed stream.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch
from .image import gaussian_blur

__all__ = [
    "STAGE_ORDER",
    "TransformConfig",
    "crystallize",
    "crystallize_with_seeds",
    "blur_transform",
    "rib_intensity_map",
    "rib_scale",
    "compose",
]

STAGE_ORDER = ("cryst", "blur", "rib")


@dataclass
class TransformConfig:
    cryst_cells_per_1k_px: float = 1.5
    blur_sigma: float = 2.0
    rib_alpha: float = 0.8
    rib_percentile: float = 0.85
    cryst_prob: float = 0.5
    blur_prob: float = 0.9
    rib_prob: float = 1.0
    pipeline: tuple[str, ...] = STAGE_ORDER

    def validate(self) -> None:
        if self.cryst_cells_per_1k_px <= 0:
            raise ValueError("cryst_cells_per_1k_px must be > 0")
        if self.blur_sigma < 0:
            raise ValueError("blur_sigma must be >= 0")
        if not 0.0 <= self.rib_alpha <= 1.0:
            raise ValueError("rib_alpha must lie in [0, 1]")
        if not 0.0 < self.rib_percentile < 1.0:
            raise ValueError("rib_percentile must lie in (0, 1)")
        for name in ("cryst_prob", "blur_prob", "rib_prob"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1]")
        if len(set(self.pipeline)) != len(self.pipeline):
            raise ValueError("pipeline stages may appear at most once")
        unknown = set(self.pipeline) - set(STAGE_ORDER)
        if unknown:
            raise ValueError(f"unknown pipeline stages: {sorted(unknown)}")

    def stage_probability(self, stage: str) -> float:
        return {"cryst": self.cryst_prob, "blur": self.blur_prob,
                "rib": self.rib_prob}[stage]


def crystallize_with_seeds(layer: np.ndarray, seeds: np.ndarray) -> np.ndarray:
    """Quantize the layer's support over the Voronoi cells of ``seeds``.

    Every support pixel (value > 0) takes the mean layer value of its
    nearest seed's cell; pixels outside the support stay zero. Nearest-seed
    ties break toward the lowest seed index, so output is deterministic.
    ``seeds`` is an (n, 2) array of (row, col) positions.
    """
    layer = np.asarray(layer, dtype=np.float64)
    rows, cols = np.nonzero(layer > 0)
    if rows.size == 0:
        return layer.copy()
    seeds = np.asarray(seeds, dtype=np.float64)
    d2 = ((rows[:, None] - seeds[None, :, 0]) ** 2
          + (cols[:, None] - seeds[None, :, 1]) ** 2)
    cell = np.argmin(d2, axis=1)
    values = layer[rows, cols]
    sums = np.bincount(cell, weights=values, minlength=len(seeds))
    counts = np.bincount(cell, minlength=len(seeds))
    means = np.divide(sums, counts, out=np.zeros_like(sums), where=counts > 0)
    out = np.zeros_like(layer)
    out[rows, cols] = means[cell]
    return out


def crystallize(layer: np.ndarray, density: float,
                rng: np.random.Generator) -> np.ndarray:
    """Voronoi quantization with seeds scattered over the support's bbox.

    ``density`` is expressed as cells per 1000 bounding-box pixels; at
    least one cell is always used. A layer with empty support is returned
    unchanged.
    """
    if density <= 0:
        raise ValueError("density must be > 0")
    layer = np.asarray(layer, dtype=np.float64)
    rows, cols = np.nonzero(layer > 0)
    if rows.size == 0:
        return layer.copy()
    r0, r1 = int(rows.min()), int(rows.max())
    c0, c1 = int(cols.min()), int(cols.max())
    bbox_px = (r1 - r0 + 1) * (c1 - c0 + 1)
    n = max(1, int(round(density * bbox_px / 1000.0)))
    seeds = np.column_stack([rng.integers(r0, r1 + 1, size=n),
                             rng.integers(c0, c1 + 1, size=n)])
    return crystallize_with_seeds(layer, seeds)


def blur_transform(layer: np.ndarray, sigma: float) -> np.ndarray:
    """Gaussian smoothing of the layer; the support may grow by the kernel radius."""
    return gaussian_blur(layer, sigma)


def rib_intensity_map(image: np.ndarray, percentile: float = 0.85) -> np.ndarray:
    """Per-pixel estimate of high-density (bone-bright) structures.

    A linear ramp anchored at the given intensity percentile: pixels at or
    below the percentile value map to 0, the brightest possible pixel maps
    to 1. On radiographs this highlights ribs, spine and clavicles.
    """
    if not 0.0 < percentile < 1.0:
        raise ValueError("percentile must lie in (0, 1)")
    image = np.asarray(image, dtype=np.float64)
    v_p = float(np.quantile(image, percentile))
    if v_p >= 1.0:
        return np.zeros_like(image)
    return np.clip((image - v_p) / (1.0 - v_p), 0.0, 1.0)


def rib_scale(layer: np.ndarray, rib: np.ndarray, alpha: float) -> np.ndarray:
    """Attenuate the layer where the rib map is bright.

    output = layer * (1 - alpha * rib), so alpha = 0 is the identity and
    alpha = 1 suppresses the layer completely over the brightest bone.
    """
    layer = np.asarray(layer, dtype=np.float64)
    rib = np.asarray(rib, dtype=np.float64)
    if layer.shape != rib.shape:
        raise DimensionMismatch(f"layer {layer.shape} vs rib map {rib.shape}")
    if not 0.0 <= alpha <= 1.0:
        raise ValueError("alpha must lie in [0, 1]")
    return layer * (1.0 - alpha * rib)


def compose(layer: np.ndarray, image: np.ndarray,
            config: TransformConfig | None = None,
            rng: np.random.Generator | None = None,
            stage_sink: list | None = None) -> tuple[np.ndarray, list[str]]:
    """Apply the enabled transform stages to a painted layer.

    Stages run in the fixed order cryst -> blur -> rib; each stage present
    in ``config.pipeline`` is included independently with its configured
    probability (one uniform draw per stage, taken whether or not the
    stage fires, so the stream layout is stable). The rib stage derives
    its map from ``image``.

    Returns the transformed layer and the list of stage names applied.
    ``stage_sink``, when given, collects (name, layer) snapshots after
    every applied stage for inspection dumps.
    """
    if config is None:
        config = TransformConfig()
    config.validate()
    if rng is None:
        rng = np.random.default_rng()
    out = np.asarray(layer, dtype=np.float64).copy()
    applied: list[str] = []
    for stage in STAGE_ORDER:
        if stage not in config.pipeline:
            continue
        if not rng.random() < config.stage_probability(stage):
            continue
        if stage == "cryst":
            out = crystallize(out, config.cryst_cells_per_1k_px, rng)
        elif stage == "blur":
            out = blur_transform(out, config.blur_sigma)
        else:
            rib = rib_intensity_map(image, config.rib_percentile)
            out = rib_scale(out, rib, config.rib_alpha)
        applied.append(stage)
        if stage_sink is not None:
            stage_sink.append((stage, out.copy()))
    return out, applied
