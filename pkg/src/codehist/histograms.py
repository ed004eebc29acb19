"""Token histograms: unigram distributions and sparse pair co-occurrence.

Counts accumulate in 64-bit integers and are normalized only when
probabilities are read, so splitting a dataset into shards and merging the
partial histograms is bit-identical to a single sequential pass.

Co-occurrence counts token pairs at fixed grid displacements. For each
displacement (dx, dy), every grid position p with p + (dx, dy) in bounds
contributes one directed pair; per-displacement counts are normalized by the
number of valid pairs, the matrix is symmetrized, and the result is averaged
over the displacement set. Entries are stored sparsely on unordered pairs
(min(u, v), max(u, v)), where an off-diagonal entry carries the mass of both
directions, so all entries sum to 1.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .token_io import TokenDataset

_SHARD_ROWS = 256  # fixed shard size keeps results independent of worker count


@dataclass(frozen=True)
class DisplacementSet:
    """Grid displacements (dx, dy) used for co-occurrence counting.

    Must be non-empty and may not contain both a displacement and its
    negation (the symmetrization step already counts both directions).
    """

    displacements: tuple[tuple[int, int], ...]

    def __post_init__(self):
        if not self.displacements:
            raise ValueError("displacement set must be non-empty")
        seen = set()
        for d in self.displacements:
            if len(d) != 2:
                raise ValueError(f"displacement {d!r} is not a (dx, dy) pair")
            dx, dy = int(d[0]), int(d[1])
            if dx == 0 and dy == 0:
                raise ValueError("displacement (0, 0) is not allowed")
            if (dx, dy) in seen:
                raise ValueError(f"duplicate displacement {(dx, dy)}")
            if (-dx, -dy) in seen:
                raise ValueError(
                    f"displacement set contains both {(dx, dy)} and its negation"
                )
            seen.add((dx, dy))
        object.__setattr__(
            self, "displacements", tuple((int(d[0]), int(d[1])) for d in self.displacements)
        )

    def __len__(self) -> int:
        return len(self.displacements)

    def __iter__(self):
        return iter(self.displacements)


DEFAULT_DISPLACEMENTS = DisplacementSet(((1, 0), (0, 1)))


class UnigramHistogram:
    """Distribution of single token ids over a codebook.

    ``counts`` holds raw int64 occurrence counts; ``probs`` normalizes by
    ``total_count``. A zero-count histogram is the merge identity and has
    all-zero probs.
    """

    __slots__ = ("counts", "total_count")

    def __init__(self, counts: np.ndarray):
        counts = np.asarray(counts, dtype=np.int64)
        if counts.ndim != 1:
            raise ValueError("counts must be a 1-D vector over the codebook")
        if (counts < 0).any():
            raise ValueError("counts must be non-negative")
        self.counts = counts
        self.total_count = int(counts.sum())

    @property
    def size(self) -> int:
        return self.counts.shape[0]

    @property
    def probs(self) -> np.ndarray:
        if self.total_count == 0:
            return np.zeros(self.size, dtype=np.float64)
        return self.counts / float(self.total_count)

    @classmethod
    def empty(cls, size: int) -> "UnigramHistogram":
        return cls(np.zeros(size, dtype=np.int64))


class SparseCooccurrence:
    """Displacement-averaged, symmetrized pair distribution, stored sparsely.

    Internally keeps per-displacement integer counts keyed on unordered
    pairs plus the per-displacement valid-pair totals, so merges stay exact;
    ``entries`` derives the probability map on demand.
    """

    __slots__ = ("size", "displacements", "pair_counts", "valid_pairs")

    def __init__(self, size, displacements, pair_counts, valid_pairs):
        self.size = int(size)
        self.displacements = displacements
        # dict per displacement: {(min_id, max_id): int count}
        self.pair_counts: dict = pair_counts
        # dict per displacement: int number of valid directed pairs
        self.valid_pairs: dict = valid_pairs

    @property
    def pair_total(self) -> int:
        return sum(self.valid_pairs.values())

    @property
    def entries(self) -> dict:
        """Map from (min_id, max_id) to probability; values sum to 1."""
        n_disp = len(self.displacements)
        out: dict = {}
        for disp in self.displacements:
            z = self.valid_pairs[disp]
            if z == 0:
                continue
            scale = 1.0 / (z * n_disp)
            for key, count in self.pair_counts[disp].items():
                out[key] = out.get(key, 0.0) + count * scale
        return out

    @classmethod
    def empty(cls, size: int, displacements: DisplacementSet) -> "SparseCooccurrence":
        return cls(
            size,
            displacements,
            {d: {} for d in displacements},
            {d: 0 for d in displacements},
        )


def unigram(dataset: TokenDataset, workers: int | None = None) -> UnigramHistogram:
    """Unigram histogram over all tokens of all sequences."""
    if len(dataset) == 0:
        raise ValueError("cannot build a histogram from an empty dataset")
    size = dataset.codebook.size

    def shard(rows: np.ndarray) -> UnigramHistogram:
        return UnigramHistogram(np.bincount(rows.reshape(-1), minlength=size))

    return _sharded(dataset.tokens, shard, merge_unigram, workers)


def cooccurrence(
    dataset: TokenDataset,
    displacements: DisplacementSet = DEFAULT_DISPLACEMENTS,
    workers: int | None = None,
) -> SparseCooccurrence:
    """Sparse co-occurrence distribution of ``dataset`` over ``displacements``."""
    if len(dataset) == 0:
        raise ValueError("cannot build a histogram from an empty dataset")
    if dataset.layout is None:
        raise ValueError("co-occurrence needs a dataset with a grid layout")
    rows_, cols_ = dataset.layout.rows, dataset.layout.cols
    size = dataset.codebook.size
    if size > 2**31:
        raise ValueError("codebook too large for int64 pair keys")
    for dx, dy in displacements:
        if _window(rows_, cols_, dx, dy) is None:
            raise ValueError(
                f"displacement {(dx, dy)} has no valid pairs on a {rows_}x{cols_} grid"
            )

    def shard(rows: np.ndarray) -> SparseCooccurrence:
        return _cooc_shard(rows, size, rows_, cols_, displacements)

    return _sharded(dataset.tokens, shard, merge_cooccurrence, workers)


def _window(rows: int, cols: int, dx: int, dy: int):
    y0, y1 = max(0, -dy), rows - max(0, dy)
    x0, x1 = max(0, -dx), cols - max(0, dx)
    if y1 <= y0 or x1 <= x0:
        return None
    return y0, y1, x0, x1


def directed_pairs(tokens: np.ndarray, rows: int, cols: int, dx: int, dy: int):
    """First and second token of every in-bounds directed pair, flattened."""
    win = _window(rows, cols, dx, dy)
    if win is None:
        raise ValueError(f"displacement {(dx, dy)} has no valid pairs on a {rows}x{cols} grid")
    y0, y1, x0, x1 = win
    grids = tokens.reshape(-1, rows, cols)
    first = grids[:, y0:y1, x0:x1].reshape(-1)
    second = grids[:, y0 + dy:y1 + dy, x0 + dx:x1 + dx].reshape(-1)
    return first, second


def _cooc_shard(tokens, size, rows, cols, displacements) -> SparseCooccurrence:
    pair_counts = {}
    valid = {}
    for disp in displacements:
        first, second = directed_pairs(tokens, rows, cols, *disp)
        lo = np.minimum(first, second)
        hi = np.maximum(first, second)
        keys, counts = np.unique(lo * size + hi, return_counts=True)
        pair_counts[disp] = {
            (int(k // size), int(k % size)): int(c) for k, c in zip(keys, counts)
        }
        valid[disp] = int(first.shape[0])
    return SparseCooccurrence(size, displacements, pair_counts, valid)


def merge_unigram(a: UnigramHistogram, b: UnigramHistogram) -> UnigramHistogram:
    """Count-weighted merge; exact, commutative, associative."""
    if a.size != b.size:
        raise ValueError(f"histogram sizes differ: {a.size} vs {b.size}")
    return UnigramHistogram(a.counts + b.counts)


def merge_cooccurrence(a: SparseCooccurrence, b: SparseCooccurrence) -> SparseCooccurrence:
    """Merge two co-occurrence accumulations over the same convention."""
    if a.size != b.size:
        raise ValueError(f"codebook sizes differ: {a.size} vs {b.size}")
    if set(a.displacements) != set(b.displacements):
        raise ValueError("mismatched displacement conventions")
    pair_counts = {}
    valid = {}
    for disp in a.displacements:
        merged = dict(a.pair_counts[disp])
        for key, count in b.pair_counts[disp].items():
            merged[key] = merged.get(key, 0) + count
        pair_counts[disp] = merged
        valid[disp] = a.valid_pairs[disp] + b.valid_pairs[disp]
    return SparseCooccurrence(a.size, a.displacements, pair_counts, valid)


def _sharded(tokens, shard_fn, merge_fn, workers):
    """Apply shard_fn to fixed-size row blocks and merge in block order.

    Shard boundaries depend only on the data, never on ``workers``, so any
    worker count produces bit-identical results.
    """
    blocks = [tokens[i:i + _SHARD_ROWS] for i in range(0, tokens.shape[0], _SHARD_ROWS)]
    if workers and workers > 1 and len(blocks) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(shard_fn, blocks))
    else:
        parts = [shard_fn(b) for b in blocks]
    result = parts[0]
    for part in parts[1:]:
        result = merge_fn(result, part)
    return result


def format_unigram(hist: UnigramHistogram) -> str:
    """Inspection dump, one ``token prob`` line per observed token."""
    lines = [
        f"{tok} {hist.probs[tok]!r}" for tok in np.flatnonzero(hist.counts)
    ]
    return "\n".join(lines) + ("\n" if lines else "")


def format_cooccurrence(cooc: SparseCooccurrence) -> str:
    """Inspection dump, one ``u v prob`` line per observed pair."""
    entries = cooc.entries
    lines = [f"{u} {v} {entries[(u, v)]!r}" for u, v in sorted(entries)]
    return "\n".join(lines) + ("\n" if lines else "")
