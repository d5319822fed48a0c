"""Lung-field segmentation and anatomy-constrained synthetic opacity
generation for chest radiographs, plus the matching loss terms and
evaluation metrics."""

__version__ = "0.1.0"

from .brush import BrushConfig, paint_base, sample_anchors, stamp
from .image import (Region, connected_components, gaussian_blur, make_stream,
                    normalize, threshold_below)
from .losses import (LossReport, anomaly_map, binarize_error, dice_loss,
                     feature_alignment_loss, global_recon_loss,
                     local_recon_loss, total_loss)
from .metrics import auc, average_precision, dice_score, image_score_from_map
from .segmentation import (LungMasks, SegmentationConfig, filter_candidates,
                           segment_lungs, select_lung_pair, update_masks)
from .synth import SynthesisConfig, Triplet, generate_dataset, synthesize
from .transforms import (TransformConfig, blur_transform, compose, crystallize,
                         rib_intensity_map, rib_scale)

__all__ = [
    "__version__",
    "BrushConfig", "paint_base", "sample_anchors", "stamp",
    "Region", "connected_components", "gaussian_blur", "make_stream",
    "normalize", "threshold_below",
    "LossReport", "anomaly_map", "binarize_error", "dice_loss",
    "feature_alignment_loss", "global_recon_loss", "local_recon_loss",
    "total_loss",
    "auc", "average_precision", "dice_score", "image_score_from_map",
    "LungMasks", "SegmentationConfig", "filter_candidates", "segment_lungs",
    "select_lung_pair", "update_masks",
    "SynthesisConfig", "Triplet", "generate_dataset", "synthesize",
    "TransformConfig", "blur_transform", "compose", "crystallize",
    "rib_intensity_map", "rib_scale",
]
