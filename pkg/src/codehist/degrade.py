"""Parameterized pixel-space degradations with a common severity scale.

Each operation computes in float64 from the original pixels, clamps to
[0, 255], and rounds half away from zero exactly once at the end
(:func:`codehist.images.finalize_channels`). All sampling is seeded, so any
(kind, parameter, seed) triple reproduces the same output bytes.

Severity maps every kind's parameter range linearly onto [0.05, 0.30]:

    gaussian_blur   sigma    0.5 .. 3.0
    gaussian_noise  sigma    0.01 .. 0.1   (fraction of full scale)
    jpeg            quality  90 .. 10      (lower quality = more severe)
    occlusion       fraction 0.10 .. 0.40  (of image area)
    photometric     factor   |factor - 1| in 0 .. 0.5
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass

import numpy as np
import PIL.Image

from . import rect
from .images import Image, finalize_channels

BLUR = "gaussian_blur"
NOISE = "gaussian_noise"
JPEG = "jpeg"
OCCLUSION = "occlusion"
PHOTOMETRIC = "photometric"

PHOTOMETRIC_KINDS = ("brightness", "contrast", "saturation", "sharpen")
PHOTOMETRIC_FACTOR_RANGE = (0.5, 1.5)

PARAM_RANGES = {
    BLUR: (0.5, 3.0),
    NOISE: (0.01, 0.1),
    JPEG: (10.0, 90.0),
    OCCLUSION: (0.10, 0.40),
    PHOTOMETRIC: PHOTOMETRIC_FACTOR_RANGE,
}

# Rec. 601 luma weights, used by the saturation blend.
_LUMA = np.array([0.299, 0.587, 0.114])


@dataclass(frozen=True)
class DegradeSpec:
    """One degradation to apply: kind, scalar parameter, RNG seed.

    ``photometric_kind`` selects the sub-operation when ``kind`` is
    ``photometric`` and is ignored otherwise.
    """

    kind: str
    parameter: float
    seed: int = 0
    photometric_kind: str = "contrast"

    def __post_init__(self):
        if self.kind == PHOTOMETRIC:
            lo, hi = PHOTOMETRIC_FACTOR_RANGE
            if self.photometric_kind not in PHOTOMETRIC_KINDS:
                raise ValueError(f"unknown photometric kind {self.photometric_kind!r}")
        elif self.kind in PARAM_RANGES:
            lo, hi = PARAM_RANGES[self.kind]
        else:
            raise ValueError(f"unknown degradation kind {self.kind!r}")
        if not (lo <= self.parameter <= hi):
            raise ValueError(
                f"{self.kind} parameter {self.parameter} outside [{lo}, {hi}]"
            )
        if self.seed < 0:
            raise ValueError("seed must be non-negative")


def severity_of(spec: DegradeSpec) -> float:
    """Normalized severity in [0.05, 0.30], linear in the kind's parameter."""
    if spec.kind == BLUR:
        frac = (spec.parameter - 0.5) / 2.5
    elif spec.kind == NOISE:
        frac = (spec.parameter - 0.01) / 0.09
    elif spec.kind == JPEG:
        frac = (90.0 - spec.parameter) / 80.0
    elif spec.kind == OCCLUSION:
        frac = (spec.parameter - 0.10) / 0.30
    else:  # photometric
        frac = abs(spec.parameter - 1.0) / 0.5
    return 0.05 + 0.25 * frac


def apply_degradation(image: Image, spec: DegradeSpec) -> Image:
    """Dispatch ``spec`` against ``image``."""
    if spec.kind == BLUR:
        return gaussian_blur(image, spec.parameter)
    if spec.kind == NOISE:
        return gaussian_noise(image, spec.parameter, spec.seed)
    if spec.kind == JPEG:
        return jpeg_roundtrip(image, spec.parameter)
    if spec.kind == OCCLUSION:
        return occlude(image, spec.parameter, spec.seed)
    return photometric(image, spec.photometric_kind, spec.parameter)


# ---------------------------------------------------------------------------
# blur

def _gauss_kernel(sigma: float) -> np.ndarray:
    radius = math.ceil(3.0 * sigma)
    xs = np.arange(-radius, radius + 1, dtype=np.float64)
    k = np.exp(-(xs * xs) / (2.0 * sigma * sigma))
    return k / k.sum()


def _conv_axis(arr: np.ndarray, kernel: np.ndarray, axis: int) -> np.ndarray:
    """1-D convolution along ``axis`` with edge-clamped coordinates."""
    radius = len(kernel) // 2
    pad = [(0, 0)] * arr.ndim
    pad[axis] = (radius, radius)
    padded = np.pad(arr, pad, mode="edge")
    out = np.zeros_like(arr)
    n = arr.shape[axis]
    index = [slice(None)] * arr.ndim
    for i, w in enumerate(kernel):
        index[axis] = slice(i, i + n)
        out += w * padded[tuple(index)]
    return out


def blur_float(pixels: np.ndarray, sigma: float) -> np.ndarray:
    """Separable Gaussian blur of a float (H, W, 3) array, unrounded."""
    kernel = _gauss_kernel(sigma)
    return _conv_axis(_conv_axis(pixels, kernel, 0), kernel, 1)


def gaussian_blur(image: Image, sigma: float) -> Image:
    """Gaussian blur; kernel radius ceil(3*sigma), normalized, edges clamped."""
    _check_range(BLUR, sigma)
    out = blur_float(image.pixels.astype(np.float64), sigma)
    return Image(finalize_channels(out))


# ---------------------------------------------------------------------------
# noise

def gaussian_noise(image: Image, sigma: float, seed: int) -> Image:
    """Additive per-channel Gaussian noise with std ``255 * sigma``."""
    _check_range(NOISE, sigma)
    rng = np.random.default_rng(seed)
    noise = rng.normal(0.0, 255.0 * sigma, size=image.pixels.shape)
    return Image(finalize_channels(image.pixels.astype(np.float64) + noise))


# ---------------------------------------------------------------------------
# occlusion

def occlude(image: Image, fraction: float, seed: int) -> Image:
    """Black out one seeded rectangle covering round(fraction * W * H) pixels."""
    _check_range(OCCLUSION, fraction)
    w, h = image.width, image.height
    area = int(math.floor(fraction * w * h + 0.5))
    out = image.pixels.copy()
    if area >= 1:
        rng = np.random.default_rng(seed)
        rw, rh = rect.choose_shape(rng, w, h, area)
        x, y = rect.place(rng, w, h, rw, rh)
        out[y:y + rh, x:x + rw] = 0
    return Image(out)


# ---------------------------------------------------------------------------
# photometric

def photometric(image: Image, kind: str, factor: float) -> Image:
    """Brightness / contrast / saturation / sharpen, all identity at 1.0.

    Accepts any non-negative finite factor; the tighter sweep range lives
    in :class:`DegradeSpec`.
    """
    if not (math.isfinite(factor) and factor >= 0.0):
        raise ValueError(f"photometric factor must be finite and >= 0, got {factor}")
    pix = image.pixels.astype(np.float64)
    if kind == "brightness":
        out = pix * factor
    elif kind == "contrast":
        out = (pix - 128.0) * factor + 128.0
    elif kind == "saturation":
        luma = pix @ _LUMA
        out = luma[..., None] + factor * (pix - luma[..., None])
    elif kind == "sharpen":
        out = pix + (factor - 1.0) * (pix - blur_float(pix, 1.0))
    else:
        raise ValueError(f"unknown photometric kind {kind!r}")
    return Image(finalize_channels(out))


# ---------------------------------------------------------------------------
# jpeg

def jpeg_roundtrip(image: Image, quality: float) -> Image:
    """Encode to baseline JPEG at ``quality`` and decode back."""
    _check_range(JPEG, quality)
    buf = io.BytesIO()
    PIL.Image.fromarray(image.pixels, mode="RGB").save(
        buf, format="JPEG", quality=int(round(quality))
    )
    buf.seek(0)
    with PIL.Image.open(buf) as decoded:
        return Image(np.asarray(decoded.convert("RGB"), dtype=np.uint8))


def _check_range(kind: str, value: float) -> None:
    lo, hi = PARAM_RANGES[kind]
    if not (lo <= value <= hi):
        raise ValueError(f"{kind} parameter {value} outside [{lo}, {hi}]")
