"""Deterministic palette tokenizer for pixel-space experiments.

Builds a fixed RGB palette as a near-cubic lattice over the color cube and
tokenizes an image by splitting it into a grid of equal patches, taking each
patch's mean color, and assigning the nearest palette entry (squared
Euclidean distance, lowest index on ties). Patches are emitted row-major, so
the token sequence matches the grid layout used everywhere else.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .images import Image
from .token_io import Codebook, GridLayout, TokenDataset


@dataclass(frozen=True)
class PaletteCodebook:
    """Fixed RGB palette; ``entries`` is (K, 3) uint8 with distinct rows."""

    entries: np.ndarray

    def __post_init__(self):
        ent = np.asarray(self.entries)
        if ent.ndim != 2 or ent.shape[1] != 3 or ent.dtype != np.uint8:
            raise ValueError("palette entries must be (K, 3) uint8")
        if ent.shape[0] < 2:
            raise ValueError("palette needs at least 2 entries")
        if len(np.unique(ent, axis=0)) != ent.shape[0]:
            raise ValueError("palette entries must be distinct")
        object.__setattr__(self, "entries", np.ascontiguousarray(ent))

    @property
    def size(self) -> int:
        return self.entries.shape[0]

    @property
    def codebook(self) -> Codebook:
        return Codebook(self.size)


def build_palette(size: int) -> PaletteCodebook:
    """Near-cubic lattice palette of ``size`` colors.

    The lattice side is the smallest s with s**3 >= size; axis values are
    evenly spaced over [0, 255] including both endpoints, and the lattice is
    truncated to ``size`` entries in lexicographic (R, G, B) order.
    """
    if size < 2:
        raise ValueError(f"palette size must be >= 2, got {size}")
    side = 1
    while side * side * side < size:
        side += 1
    if side == 1:
        axis = np.array([0], dtype=np.float64)
    else:
        axis = np.floor(np.arange(side) * 255.0 / (side - 1) + 0.5)
    r, g, b = np.meshgrid(axis, axis, axis, indexing="ij")
    lattice = np.stack([r.ravel(), g.ravel(), b.ravel()], axis=1)
    return PaletteCodebook(lattice[:size].astype(np.uint8))


def patch_means(image: Image, layout: GridLayout) -> np.ndarray:
    """Exact float64 mean color of each grid patch, shape (rows, cols, 3)."""
    h, w = image.height, image.width
    if h % layout.rows or w % layout.cols:
        raise ValueError(
            f"image {w}x{h} not divisible into a {layout.rows}x{layout.cols} grid"
        )
    ph, pw = h // layout.rows, w // layout.cols
    pix = image.pixels.astype(np.float64)
    return pix.reshape(layout.rows, ph, layout.cols, pw, 3).mean(axis=(1, 3))


def tokenize(image: Image, layout: GridLayout, palette: PaletteCodebook) -> np.ndarray:
    """Token sequence of ``image`` under ``layout``, row-major, dtype int64."""
    means = patch_means(image, layout)
    diff = means[:, :, None, :] - palette.entries[None, None, :, :].astype(np.float64)
    dist = np.einsum("rckd,rckd->rck", diff, diff)
    return dist.argmin(axis=2).reshape(-1).astype(np.int64)


def tokenize_all(images, layout: GridLayout, palette: PaletteCodebook) -> TokenDataset:
    """Tokenize an iterable of images into one dataset."""
    rows = [tokenize(img, layout, palette) for img in images]
    return TokenDataset.from_sequences(palette.codebook, rows, layout, seq_len=layout.cells)
