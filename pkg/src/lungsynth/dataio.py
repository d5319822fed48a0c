"""Dataset scanning, the manifest contract, and configuration loading.

Manifest format (the public contract for external trainers)
------------------------------------------------------------
``manifest.jsonl`` holds one JSON object per line, one per generated
triplet, in stream-id order:

    {
      "source": "<input path as scanned>",
      "syn_path": "<file name, relative to the manifest>",
      "mask_path": "<file name>",
      "lung_path": "<file name>",
      "seed": 0,
      "stream_id": 3,
      "anomaly_area_fraction": 0.113,   # |anomaly mask| / |lung mask|
      "stages_applied": ["cryst", "blur", "rib"],
      "status": "ok",                   # or "error"
      "error_msg": null
    }

Rows with ``status == "ok"`` guarantee that the three referenced files
exist, share dimensions, and reproduce the recorded area fraction.

Configuration files are flat ``key = value`` text with dotted section
prefixes (``brush.base_radius = 6``); ``#`` starts a comment. Unspecified
keys take the documented defaults and unknown keys are a hard error, so a
typo cannot silently fall back to a default.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

from .brush import BrushConfig
from .errors import DirNotFound, ParseError, UnknownKey
from .fileio import load_image, load_mask
from .segmentation import SegmentationConfig
from .synth import SynthesisConfig
from .transforms import TransformConfig

__all__ = [
    "ManifestRecord",
    "scan_inputs",
    "write_manifest",
    "read_manifest",
    "validate_manifest",
    "LossConfig",
    "MetricsConfig",
    "ToolkitConfig",
    "load_config",
    "default_config",
]


@dataclass
class ManifestRecord:
    source: str
    syn_path: str | None
    mask_path: str | None
    lung_path: str | None
    seed: int
    stream_id: int
    anomaly_area_fraction: float | None
    stages_applied: list[str]
    status: str
    error_msg: str | None = None

    def to_json(self) -> str:
        return json.dumps(asdict(self), separators=(", ", ": "))

    @classmethod
    def from_json(cls, line: str) -> "ManifestRecord":
        return cls(**json.loads(line))


def scan_inputs(directory, glob_pattern: str) -> list[Path]:
    """List matching files, sorted lexicographically.

    The sort order is what fixes stream-id assignment downstream, so it is
    part of the reproducibility contract.
    """
    directory = Path(directory)
    if not directory.is_dir():
        raise DirNotFound(f"input directory not found: {directory}")
    return sorted(p for p in directory.glob(glob_pattern) if p.is_file())


def write_manifest(path, records: list[ManifestRecord]) -> None:
    path = Path(path)
    with path.open("w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(rec.to_json() + "\n")


def read_manifest(path) -> list[ManifestRecord]:
    path = Path(path)
    records = []
    with path.open("r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                records.append(ManifestRecord.from_json(line))
    return records


def validate_manifest(path) -> dict:
    """Check referential integrity of a manifest.

    For every ``ok`` row: the three referenced files exist, load, share
    dimensions, the masks are binary, the anomaly mask stays inside the
    lung mask, and the recorded area fraction matches the files. Returns
    a report dict with per-row violations.
    """
    path = Path(path)
    base = path.parent
    records = read_manifest(path)
    violations = []

    def complain(rec, problem):
        violations.append({"stream_id": rec.stream_id, "source": rec.source,
                           "problem": problem})

    n_ok = 0
    for rec in records:
        if rec.status != "ok":
            continue
        n_ok += 1
        try:
            syn = load_image(base / rec.syn_path)
            mask = load_mask(base / rec.mask_path)
            lung = load_mask(base / rec.lung_path)
        except Exception as exc:  # noqa: BLE001
            complain(rec, f"load failure: {type(exc).__name__}: {exc}")
            continue
        if not (syn.shape == mask.shape == lung.shape):
            complain(rec, f"dimension mismatch: syn {syn.shape}, "
                          f"mask {mask.shape}, lung {lung.shape}")
            continue
        if (mask & ~lung & 1).any():
            complain(rec, "anomaly mask leaves the lung mask")
        lung_area = int(lung.sum())
        if lung_area == 0:
            complain(rec, "empty lung mask")
            continue
        fraction = float(mask.sum()) / lung_area
        if rec.anomaly_area_fraction is None or \
                abs(fraction - rec.anomaly_area_fraction) > 1e-12:
            complain(rec, f"area fraction mismatch: recorded "
                          f"{rec.anomaly_area_fraction}, recomputed {fraction}")
    return {
        "manifest": str(path),
        "records": len(records),
        "ok": n_ok,
        "errors": sum(1 for r in records if r.status != "ok"),
        "violations": violations,
    }


@dataclass
class LossConfig:
    tau: float = 0.01
    eps: float = 1e-8

    def validate(self) -> None:
        if self.tau <= 0:
            raise ValueError("loss.tau must be > 0")
        if self.eps <= 0:
            raise ValueError("loss.eps must be > 0")


@dataclass
class MetricsConfig:
    reducer: str = "topk"
    top_k_fraction: float = 0.01

    def validate(self) -> None:
        if self.reducer not in ("max", "mean", "topk"):
            raise ValueError("metrics.reducer must be max, mean or topk")
        if not 0.0 < self.top_k_fraction <= 1.0:
            raise ValueError("metrics.top_k_fraction must lie in (0, 1]")


@dataclass
class ToolkitConfig:
    """Every tunable in one place: synthesis plus loss/metric parameters."""

    synthesis: SynthesisConfig = field(default_factory=SynthesisConfig)
    loss: LossConfig = field(default_factory=LossConfig)
    metrics: MetricsConfig = field(default_factory=MetricsConfig)

    def validate(self) -> None:
        self.synthesis.validate()
        self.loss.validate()
        self.metrics.validate()


def _parse_float(text: str) -> float:
    return float(text)


def _parse_int(text: str) -> int:
    return int(text, 0)


def _parse_bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ("true", "yes", "on", "1"):
        return True
    if low in ("false", "no", "off", "0"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _parse_float_list(text: str) -> tuple[float, ...]:
    return tuple(float(part) for part in text.split(",") if part.strip())


def _parse_int_pair(text: str) -> tuple[int, int]:
    parts = [p for p in text.split(",") if p.strip()]
    if len(parts) != 2:
        raise ValueError(f"expected 'min, max', got {text!r}")
    return int(parts[0]), int(parts[1])


def _parse_str_list(text: str) -> tuple[str, ...]:
    return tuple(part.strip() for part in text.split(",") if part.strip())


def _schema() -> dict:
    """Map config-file keys to (section path, field, parser)."""
    return {
        "mask_threshold": ("synthesis", "mask_threshold", _parse_float),
        "master_seed": ("synthesis", "master_seed", _parse_int),
        "normalize_lo": ("synthesis", "normalize_lo", _parse_float),
        "normalize_hi": ("synthesis", "normalize_hi", _parse_float),
        "segmentation.thresholds": ("synthesis.segmentation", "thresholds", _parse_float_list),
        "segmentation.circularity_min": ("synthesis.segmentation", "circularity_min", _parse_float),
        "segmentation.border_contact_max": ("synthesis.segmentation", "border_contact_max", _parse_float),
        "segmentation.area_min": ("synthesis.segmentation", "area_min", _parse_float),
        "segmentation.area_max": ("synthesis.segmentation", "area_max", _parse_float),
        "segmentation.require_taller_than_wide": ("synthesis.segmentation", "require_taller_than_wide", _parse_bool),
        "segmentation.connectivity": ("synthesis.segmentation", "connectivity", _parse_int),
        "segmentation.fill_holes": ("synthesis.segmentation", "fill_holes", _parse_bool),
        "brush.anchor_count": ("synthesis.brush", "anchor_count", _parse_int_pair),
        "brush.stamps_per_anchor": ("synthesis.brush", "stamps_per_anchor", _parse_int_pair),
        "brush.base_radius": ("synthesis.brush", "base_radius", _parse_float),
        "brush.size_jitter": ("synthesis.brush", "size_jitter", _parse_float),
        "brush.angle_jitter": ("synthesis.brush", "angle_jitter", _parse_float),
        "brush.opacity_base": ("synthesis.brush", "opacity_base", _parse_float),
        "brush.opacity_jitter": ("synthesis.brush", "opacity_jitter", _parse_float),
        "brush.stamp_aspect": ("synthesis.brush", "stamp_aspect", _parse_float),
        "brush.walk_step": ("synthesis.brush", "walk_step", _parse_float),
        "transform.cryst_cells_per_1k_px": ("synthesis.transform", "cryst_cells_per_1k_px", _parse_float),
        "transform.blur_sigma": ("synthesis.transform", "blur_sigma", _parse_float),
        "transform.rib_alpha": ("synthesis.transform", "rib_alpha", _parse_float),
        "transform.rib_percentile": ("synthesis.transform", "rib_percentile", _parse_float),
        "transform.cryst_prob": ("synthesis.transform", "cryst_prob", _parse_float),
        "transform.blur_prob": ("synthesis.transform", "blur_prob", _parse_float),
        "transform.rib_prob": ("synthesis.transform", "rib_prob", _parse_float),
        "transform.pipeline": ("synthesis.transform", "pipeline", _parse_str_list),
        "loss.tau": ("loss", "tau", _parse_float),
        "loss.eps": ("loss", "eps", _parse_float),
        "metrics.reducer": ("metrics", "reducer", str),
        "metrics.top_k_fraction": ("metrics", "top_k_fraction", _parse_float),
    }


def default_config() -> ToolkitConfig:
    return ToolkitConfig()


def load_config(path=None) -> ToolkitConfig:
    """Load a configuration file on top of the defaults.

    ``path=None`` (or an empty file) returns the defaults. Raises
    :class:`UnknownKey` for keys outside the schema and
    :class:`ParseError` with a line diagnostic for anything malformed.
    """
    config = ToolkitConfig()
    if path is None:
        config.validate()
        return config
    path = Path(path)
    if not path.is_file():
        raise ParseError(f"config file not found: {path}")
    schema = _schema()
    for lineno, raw in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParseError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if key not in schema:
            raise UnknownKey(f"{path}:{lineno}: unknown key {key!r}")
        section_path, attr, parser = schema[key]
        target = config
        for part in section_path.split("."):
            target = getattr(target, part)
        try:
            setattr(target, attr, parser(value))
        except (ValueError, TypeError) as exc:
            raise ParseError(f"{path}:{lineno}: bad value for {key!r}: {exc}") from exc
    try:
        config.validate()
    except ValueError as exc:
        raise ParseError(f"{path}: {exc}") from exc
    return config
