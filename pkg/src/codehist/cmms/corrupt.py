"""Token-space corruption operators and the quality target they supervise.

Uniform corruption replaces each position independently with probability p
by a uniform draw over the codebook; the draw may coincide with the original
token, so p is an upper bound on the changed fraction, not an exact count.
Fragment swapping exchanges rectangular grid blocks, either between two
sequences (same block position in both) or between two distant blocks of a
single sequence. Both are exact involutions under a fixed seed.

The supervision target maps an effective corruption level p_eff in [0, 0.3]
to quality exp(-20 * p_eff), i.e. 1.0 at no corruption decaying to about
2.5e-3 at the cap.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .. import rect
from ..degrade import DegradeSpec, severity_of
from ..token_io import GridLayout

P_CAP = 0.3
QUALITY_RATE = 20.0


@dataclass(frozen=True)
class CorruptionSpec:
    """Per-sample corruption recipe: uniform rate, swap fraction, pixel stage."""

    p_uniform: float
    swap_fraction: float = 0.0
    pixel: DegradeSpec | None = None
    seed: int = 0

    def __post_init__(self):
        if not (0.0 <= self.p_uniform <= P_CAP):
            raise ValueError(f"p_uniform {self.p_uniform} outside [0, {P_CAP}]")
        if not (0.0 <= self.swap_fraction <= P_CAP):
            raise ValueError(f"swap_fraction {self.swap_fraction} outside [0, {P_CAP}]")
        if self.seed < 0:
            raise ValueError("seed must be non-negative")


def corrupt_tokens(seq: np.ndarray, p: float, codebook_size: int, seed: int) -> np.ndarray:
    """Replace each position independently with prob ``p`` by a uniform draw."""
    if not (0.0 <= p <= 1.0):
        raise ValueError(f"corruption probability {p} outside [0, 1]")
    if codebook_size < 2:
        raise ValueError("codebook size must be >= 2")
    seq = np.asarray(seq)
    rng = np.random.default_rng(seed)
    mask = rng.random(seq.shape[0]) < p
    draws = rng.integers(0, codebook_size, size=seq.shape[0], dtype=np.int64)
    return np.where(mask, draws, seq.astype(np.int64))


def quality_target(p_eff: float) -> float:
    """exp(-20 * p_eff) for p_eff in [0, 0.3]."""
    if not (0.0 <= p_eff <= P_CAP + 1e-12):
        raise ValueError(f"effective corruption {p_eff} outside [0, {P_CAP}]")
    return math.exp(-QUALITY_RATE * min(p_eff, P_CAP))


def _block_pair_within(rng, cols, rows, w, h):
    """Two disjoint placements, Chebyshev-separated when possible.

    Tries 16 seeded draws for disjoint blocks whose centers are at least
    max(rows, cols) / 2 apart; afterwards falls back to the maximally
    separated corner placement (the shape is pre-filtered so corners are
    always disjoint on at least one axis).
    """
    need = max(rows, cols) / 2.0
    for _ in range(16):
        x1, y1 = rect.place(rng, cols, rows, w, h)
        x2, y2 = rect.place(rng, cols, rows, w, h)
        disjoint = x1 + w <= x2 or x2 + w <= x1 or y1 + h <= y2 or y2 + h <= y1
        if not disjoint:
            continue
        cheb = max(abs(x1 - x2), abs(y1 - y2))
        if cheb >= need:
            return (x1, y1), (x2, y2)
    return (0, 0), (cols - w, rows - h)


def fragment_swap(a: np.ndarray, b: np.ndarray, layout: GridLayout,
                  fraction: float, seed: int):
    """Exchange one rectangular token block of round(fraction * N) cells.

    With distinct sequences the same seeded rectangle is swapped between
    them; when ``b is a``, two non-overlapping blocks within the sequence
    are exchanged instead. Returns the pair of resulting sequences (both
    referencing the same array in the within-sequence case). Token multisets
    are preserved and repeating the call with the same seed undoes it.
    """
    if not (0.0 < fraction <= P_CAP):
        raise ValueError(f"swap fraction {fraction} outside (0, {P_CAP}]")
    a = np.asarray(a)
    b_in = b
    b = np.asarray(b)
    if a.ndim != 1 or b.ndim != 1 or a.shape != b.shape:
        raise ValueError("sequences must be 1-D and equal length")
    if layout.cells != a.shape[0]:
        raise ValueError(f"layout {layout.rows}x{layout.cols} does not cover length {a.shape[0]}")
    area = int(math.floor(fraction * a.shape[0] + 0.5))
    if area < 1:
        raise ValueError(f"swap fraction {fraction} rounds to a zero-cell block")
    rng = np.random.default_rng(seed)
    rows, cols = layout.rows, layout.cols
    same = b_in is a or (isinstance(b_in, np.ndarray) and b.base is a) or b is a
    if same:
        out = a.copy().reshape(rows, cols)
        w, h = rect.choose_shape(rng, cols, rows, area, need_two_disjoint=True)
        (x1, y1), (x2, y2) = _block_pair_within(rng, cols, rows, w, h)
        tmp = out[y1:y1 + h, x1:x1 + w].copy()
        out[y1:y1 + h, x1:x1 + w] = out[y2:y2 + h, x2:x2 + w]
        out[y2:y2 + h, x2:x2 + w] = tmp
        flat = out.reshape(-1)
        return flat, flat
    w, h = rect.choose_shape(rng, cols, rows, area)
    x, y = rect.place(rng, cols, rows, w, h)
    ga = a.copy().reshape(rows, cols)
    gb = b.copy().reshape(rows, cols)
    tmp = ga[y:y + h, x:x + w].copy()
    ga[y:y + h, x:x + w] = gb[y:y + h, x:x + w]
    gb[y:y + h, x:x + w] = tmp
    return ga.reshape(-1), gb.reshape(-1)


def corrupt_sample(seq: np.ndarray, spec: CorruptionSpec, codebook_size: int,
                   partner: np.ndarray | None = None,
                   layout: GridLayout | None = None):
    """Apply a full corruption recipe; returns (corrupted_seq, quality target).

    Uniform corruption first, then the optional fragment swap (against
    ``partner``, or within the sequence when no partner is given). The pixel
    stage contributes only its severity: it applies to images upstream of
    tokenization, so here it just shifts p_eff. A swap whose block area
    rounds to zero is skipped, but p_eff always follows
    min(0.3, p_uniform + swap_fraction + pixel severity).
    """
    rng = np.random.default_rng(spec.seed)
    sub_seeds = rng.integers(0, 2**63, size=2)
    out = corrupt_tokens(seq, spec.p_uniform, codebook_size, int(sub_seeds[0]))
    if spec.swap_fraction > 0.0:
        if layout is None:
            raise ValueError("fragment swap needs a grid layout")
        if int(math.floor(spec.swap_fraction * out.shape[0] + 0.5)) >= 1:
            other = out if partner is None else np.asarray(partner)
            out, _ = fragment_swap(out, other, layout, spec.swap_fraction, int(sub_seeds[1]))
    severity = severity_of(spec.pixel) if spec.pixel is not None else 0.0
    p_eff = min(P_CAP, spec.p_uniform + spec.swap_fraction + severity)
    return out, quality_target(p_eff)
