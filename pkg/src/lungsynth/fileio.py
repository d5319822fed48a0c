"""Reading and writing grayscale images and binary masks.

Supports 8-bit and 16-bit grayscale PNG and PGM. Intensities are mapped
to [0, 1] on load and quantized back on save; masks are stored as 8-bit
PNGs with values {0, 255}.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
from PIL import Image

__all__ = ["load_image", "save_image", "load_mask", "save_mask"]


def load_image(path) -> np.ndarray:
    """Load a grayscale image file as float64 in [0, 1]."""
    with Image.open(path) as im:
        mode = im.mode
        arr = np.asarray(im)
    if mode == "L":
        return arr.astype(np.float64) / 255.0
    if mode in ("I", "I;16", "I;16B", "I;16L"):
        # PIL decodes 16-bit PNG/PGM to a 32-bit or native 16-bit buffer.
        return np.clip(arr.astype(np.float64) / 65535.0, 0.0, 1.0)
    raise ValueError(f"unsupported image mode {mode!r} (grayscale only): {path}")


def save_image(path, image: np.ndarray, bit_depth: int = 16) -> None:
    """Save a [0, 1] image as an 8- or 16-bit grayscale file.

    The format follows the file extension (.png or .pgm).
    """
    image = np.asarray(image, dtype=np.float64)
    path = Path(path)
    if bit_depth == 8:
        data = np.round(np.clip(image, 0.0, 1.0) * 255.0).astype(np.uint8)
        Image.fromarray(data, mode="L").save(path)
    elif bit_depth == 16:
        data = np.round(np.clip(image, 0.0, 1.0) * 65535.0).astype(np.uint16)
        Image.fromarray(data).save(path)
    else:
        raise ValueError("bit_depth must be 8 or 16")


def save_mask(path, mask: np.ndarray) -> None:
    """Save a {0,1} mask as an 8-bit PNG with values {0, 255}."""
    data = (np.asarray(mask) > 0).astype(np.uint8) * 255
    Image.fromarray(data, mode="L").save(path)


def load_mask(path) -> np.ndarray:
    """Load a mask file back to {0,1}; any pixel at half scale or above is 1."""
    return (load_image(path) >= 0.5).astype(np.uint8)
