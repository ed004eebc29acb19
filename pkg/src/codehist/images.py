"""8-bit RGB image container plus PNG/PPM file handling.

Images are ``(height, width, 3)`` uint8 arrays wrapped in :class:`Image`.
File I/O goes through Pillow; PPM files are written as binary P6.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import PIL.Image

from .errors import BAD_HEADER, FormatError


@dataclass(frozen=True)
class Image:
    """Interleaved RGB image; ``pixels`` is ``(height, width, 3)`` uint8."""

    pixels: np.ndarray

    def __post_init__(self):
        pix = np.asarray(self.pixels)
        if pix.ndim != 3 or pix.shape[2] != 3:
            raise ValueError(f"pixels must have shape (H, W, 3), got {pix.shape}")
        if pix.shape[0] < 1 or pix.shape[1] < 1:
            raise ValueError("image dimensions must be positive")
        if pix.dtype != np.uint8:
            raise ValueError(f"pixels must be uint8, got {pix.dtype}")
        object.__setattr__(self, "pixels", np.ascontiguousarray(pix))

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]


def finalize_channels(values: np.ndarray) -> np.ndarray:
    """Clamp float channel values to [0, 255], then round half away from zero.

    Every degradation computes in float and calls this exactly once at the
    end, so no operation double-rounds.
    """
    clamped = np.clip(values, 0.0, 255.0)
    return np.floor(clamped + 0.5).astype(np.uint8)


def load_image(path) -> Image:
    try:
        with PIL.Image.open(path) as img:
            return Image(np.asarray(img.convert("RGB"), dtype=np.uint8))
    except (PIL.UnidentifiedImageError, SyntaxError, OSError) as exc:
        if isinstance(exc, FileNotFoundError):
            raise
        raise FormatError(BAD_HEADER, f"{path}: not a decodable image ({exc})") from exc


def save_image(image: Image, path) -> None:
    path = str(path)
    pil = PIL.Image.fromarray(image.pixels, mode="RGB")
    if path.lower().endswith((".ppm", ".pnm")):
        pil.save(path, format="PPM")
    elif path.lower().endswith(".png"):
        pil.save(path, format="PNG")
    else:
        raise ValueError(f"unsupported image extension in {path!r} (use .png or .ppm)")
