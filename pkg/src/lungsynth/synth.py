"""End-to-end generation of paired training samples.

For each normal image the pipeline paints a base opacity layer inside the
segmented lung fields, runs the realism transforms, adds the final layer
to the image (clamped to [0, 1]) and thresholds the same layer into a
pixel-level anomaly mask. The result is a triplet: the normal image, the
synthetic-anomaly image and the exact mask of what was injected, which is
what a reconstruction trainer needs for explicit localization supervision.

Every triplet is fully determined by (image, config, stream_id): the
random stream is derived from the config's master seed and the stream id,
so datasets regenerate byte-identically and workers never share state.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .brush import BrushConfig, paint_base
from .fileio import load_image, save_image, save_mask
from .image import make_stream, normalize
from .segmentation import LungMasks, SegmentationConfig, segment_lungs
from .transforms import TransformConfig, compose

__all__ = ["SynthesisConfig", "Triplet", "synthesize", "generate_dataset"]

INPUT_PATTERNS = ("*.png", "*.pgm")


@dataclass
class SynthesisConfig:
    """Everything that determines a generated triplet, including the seed."""

    brush: BrushConfig = field(default_factory=BrushConfig)
    transform: TransformConfig = field(default_factory=TransformConfig)
    segmentation: SegmentationConfig = field(default_factory=SegmentationConfig)
    mask_threshold: float = 0.05
    master_seed: int = 0
    normalize_lo: float = 0.005
    normalize_hi: float = 0.995

    def validate(self) -> None:
        if not 0.0 < self.mask_threshold < 1.0:
            raise ValueError("mask_threshold must lie in (0, 1)")
        if self.master_seed < 0:
            raise ValueError("master_seed must be non-negative")
        if not 0.0 <= self.normalize_lo < self.normalize_hi <= 1.0:
            raise ValueError("require 0 <= normalize_lo < normalize_hi <= 1")
        self.brush.validate()
        self.transform.validate()
        self.segmentation.validate()


@dataclass(eq=False)
class Triplet:
    """One generated sample plus everything needed to reproduce it.

    ``layer`` is the final additive opacity field (after the lung-mask
    re-clip), persisted so the mask can be re-derived independently;
    ``provenance`` records the realized random choices: anchors, stamp
    parameters, and which transform stages fired.
    """

    normal: np.ndarray
    synthetic: np.ndarray
    anomaly_mask: np.ndarray
    layer: np.ndarray
    seed: int
    stream_id: int
    provenance: dict

    def validate(self) -> None:
        if not (self.normal.shape == self.synthetic.shape == self.anomaly_mask.shape):
            raise ValueError("triplet fields must share dimensions")
        if np.any(self.synthetic < self.normal):
            raise ValueError("synthetic image must be >= normal image everywhere")


def synthesize(image: np.ndarray, lungs: LungMasks, config: SynthesisConfig | None = None,
               stream_id: int = 0, stage_sink: list | None = None) -> Triplet:
    """Generate one triplet from a normalized image and its lung masks.

    The painted layer is re-multiplied by the lung mask after the
    transforms (blurring may smear support past the lung boundary), so the
    anomaly never leaves the lung fields. ``stage_sink`` optionally
    collects intermediate layers for inspection dumps.
    """
    if config is None:
        config = SynthesisConfig()
    config.validate()
    image = np.asarray(image, dtype=np.float64)
    rng = make_stream(config.master_seed, stream_id)

    stamps: list = []
    base = paint_base(lungs.combined, config.brush, rng, trace=stamps)
    if stage_sink is not None:
        stage_sink.append(("base", base.copy()))
    layer, applied = compose(base, image, config.transform, rng,
                             stage_sink=stage_sink)
    layer = layer * lungs.combined
    if stage_sink is not None:
        stage_sink.append(("final", layer.copy()))

    synthetic = np.clip(image + layer, 0.0, 1.0)
    anomaly_mask = (layer >= config.mask_threshold).astype(np.uint8)
    anchors = sorted({tuple(s["anchor"]) for s in stamps})
    provenance = {
        "stream_id": stream_id,
        "anchors": [list(a) for a in anchors],
        "stamps": stamps,
        "stages_applied": applied,
    }
    return Triplet(normal=image, synthetic=synthetic, anomaly_mask=anomaly_mask,
                   layer=layer, seed=config.master_seed, stream_id=stream_id,
                   provenance=provenance)


def _process_one(path: Path, index: int, out_dir: Path, config: SynthesisConfig,
                 per_image_triplets: int, dump_stages: bool) -> list:
    """Segment, synthesize and save outputs for one input file.

    Returns the manifest records for this file; any failure produces a
    single error record instead of aborting the batch.
    """
    from .dataio import ManifestRecord  # local import to avoid a module cycle

    stem = path.stem
    base_stream = index * per_image_triplets
    try:
        raw = load_image(path)
        image = normalize(raw, config.normalize_lo, config.normalize_hi)
        lungs = segment_lungs(image, config.segmentation)
        lung_name = f"{stem}_lung.png"
        save_mask(out_dir / lung_name, lungs.combined)
        lung_area = int(lungs.combined.sum())
    except Exception as exc:  # noqa: BLE001 - error rows isolate bad inputs
        return [ManifestRecord(
            source=str(path), syn_path=None, mask_path=None, lung_path=None,
            seed=config.master_seed, stream_id=base_stream,
            anomaly_area_fraction=None, stages_applied=[],
            status="error", error_msg=f"{type(exc).__name__}: {exc}")]

    records = []
    for v in range(per_image_triplets):
        stream_id = base_stream + v
        variant = stem if per_image_triplets == 1 else f"{stem}_v{v}"
        try:
            sink: list | None = [] if dump_stages else None
            triplet = synthesize(image, lungs, config, stream_id, stage_sink=sink)
            syn_name = f"{variant}_syn.png"
            mask_name = f"{variant}_mask.png"
            save_image(out_dir / syn_name, triplet.synthetic, bit_depth=16)
            save_mask(out_dir / mask_name, triplet.anomaly_mask)
            if sink:
                for k, (name, layer) in enumerate(sink):
                    save_image(out_dir / f"{variant}_stage{k}_{name}.png",
                               layer, bit_depth=16)
            records.append(ManifestRecord(
                source=str(path), syn_path=syn_name, mask_path=mask_name,
                lung_path=lung_name, seed=config.master_seed, stream_id=stream_id,
                anomaly_area_fraction=float(triplet.anomaly_mask.sum()) / lung_area,
                stages_applied=list(triplet.provenance["stages_applied"]),
                status="ok", error_msg=None))
        except Exception as exc:  # noqa: BLE001
            records.append(ManifestRecord(
                source=str(path), syn_path=None, mask_path=None, lung_path=lung_name,
                seed=config.master_seed, stream_id=stream_id,
                anomaly_area_fraction=None, stages_applied=[],
                status="error", error_msg=f"{type(exc).__name__}: {exc}"))
    return records


def generate_dataset(input_dir, output_dir, config: SynthesisConfig | None = None,
                     jobs: int = 1, per_image_triplets: int = 1,
                     dump_stages: bool = False) -> list:
    """Run the full pipeline over a directory of grayscale images.

    Inputs are processed in lexicographic order; the k-th image's v-th
    variant uses stream id ``k * per_image_triplets + v``, so output is
    reproducible regardless of ``jobs``. Per-file failures are logged as
    error records in the manifest and do not abort the batch.

    Writes ``<stem>_syn.png``, ``<stem>_mask.png``, ``<stem>_lung.png``
    per input plus ``manifest.jsonl``, and returns the manifest records.
    """
    from .dataio import scan_inputs, write_manifest

    if config is None:
        config = SynthesisConfig()
    if per_image_triplets < 1:
        raise ValueError("per_image_triplets must be >= 1")
    paths: list[Path] = []
    for pattern in INPUT_PATTERNS:
        paths.extend(scan_inputs(input_dir, pattern))
    paths = sorted(set(paths))
    out_dir = Path(output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    def work(item):
        index, path = item
        return _process_one(path, index, out_dir, config,
                            per_image_triplets, dump_stages)

    if jobs > 1 and len(paths) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            chunks = list(pool.map(work, enumerate(paths)))
    else:
        chunks = [work(item) for item in enumerate(paths)]

    records = [rec for chunk in chunks for rec in chunk]
    records.sort(key=lambda r: r.stream_id)
    write_manifest(out_dir / "manifest.jsonl", records)
    return records
