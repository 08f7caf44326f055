"""Small helpers for moving images between disk, numpy, and torch land.

Arrays are float32, HxWx3, values in [0, 1] unless a function says otherwise.
"""
from __future__ import annotations

from pathlib import Path

import numpy as np
from PIL import Image


def load_rgb(path: str | Path, size: int | None = None) -> np.ndarray:
    """Decode an image file to a float32 HxWx3 array in [0, 1].

    If ``size`` is given the image is resized (bilinear) to size x size.
    """
    with Image.open(path) as im:
        im = im.convert("RGB")
        if size is not None and im.size != (size, size):
            im = im.resize((size, size), Image.BILINEAR)
        return np.asarray(im, dtype=np.float32) / 255.0


def save_rgb(path: str | Path, array: np.ndarray) -> None:
    """Write a float array in [0, 1] as an 8-bit PNG (or whatever the suffix says)."""
    arr = np.clip(np.asarray(array, dtype=np.float32), 0.0, 1.0)
    data = (arr * 255.0).round().astype(np.uint8)
    Image.fromarray(data, mode="RGB").save(path)


def to_signed(array: np.ndarray) -> np.ndarray:
    """Map [0, 1] pixels to the [-1, 1] range the generators train in."""
    return array.astype(np.float32) * 2.0 - 1.0


def from_signed(array: np.ndarray) -> np.ndarray:
    """Inverse of :func:`to_signed`, clipped to [0, 1]."""
    return np.clip((array.astype(np.float32) + 1.0) / 2.0, 0.0, 1.0)


def resize_rgb(array: np.ndarray, width: int, height: int) -> np.ndarray:
    """Bilinear-resize a [0, 1] float array to (height, width)."""
    data = (np.clip(array, 0.0, 1.0) * 255.0).round().astype(np.uint8)
    im = Image.fromarray(data, mode="RGB").resize((width, height), Image.BILINEAR)
    return np.asarray(im, dtype=np.float32) / 255.0
