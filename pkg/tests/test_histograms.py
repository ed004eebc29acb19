"""Histogram accumulation against naive reference implementations."""

from collections import Counter
from functools import reduce

import numpy as np
import pytest

from codehist import (
    Codebook,
    DisplacementSet,
    GridLayout,
    TokenDataset,
    cooccurrence,
    merge_cooccurrence,
    merge_unigram,
    unigram,
)
from codehist.histograms import UnigramHistogram

from synthsrc import iid_tokens, markov_grid_tokens


def naive_unigram_probs(dataset):
    counts = Counter(int(t) for seq in dataset.tokens for t in seq)
    total = sum(counts.values())
    probs = np.zeros(dataset.codebook.size)
    for t, c in counts.items():
        probs[t] = c / total
    return probs


def naive_cooccurrence_entries(dataset, displacements):
    """Unordered-pair distribution, both directions pooled, averaged over
    displacements. Written as plain loops over grid cells."""
    rows, cols = dataset.layout.rows, dataset.layout.cols
    per_disp = []
    for dx, dy in displacements:
        pairs = Counter()
        for seq in dataset.tokens:
            grid = np.asarray(seq).reshape(rows, cols)
            for r in range(rows):
                for c in range(cols):
                    r2, c2 = r + dy, c + dx
                    if 0 <= r2 < rows and 0 <= c2 < cols:
                        u, v = int(grid[r, c]), int(grid[r2, c2])
                        pairs[(min(u, v), max(u, v))] += 1
        per_disp.append(pairs)
    out = {}
    n = len(per_disp)
    for pairs in per_disp:
        total = sum(pairs.values())
        for key, c in pairs.items():
            out[key] = out.get(key, 0.0) + c / total / n
    return out


def test_worked_two_by_two_example():
    # grid [[a, b], [a, b]] with right+down displacements
    ds = TokenDataset(Codebook(2), np.array([[0, 1, 0, 1]]), GridLayout(2, 2))
    cooc = cooccurrence(ds)
    assert cooc.entries == {(0, 1): 0.5, (0, 0): 0.25, (1, 1): 0.25}
    assert abs(sum(cooc.entries.values()) - 1.0) < 1e-15


def test_unigram_counts_are_integers():
    rng = np.random.default_rng(5)
    ds = iid_tokens(rng, 13, 9, 6)
    hist = unigram(ds)
    assert hist.counts.dtype == np.int64
    assert hist.counts.sum() == 13 * 9
    np.testing.assert_allclose(hist.probs, naive_unigram_probs(ds), atol=0)


@pytest.mark.parametrize("seed", range(4))
def test_cooccurrence_matches_naive(seed):
    rng = np.random.default_rng(seed)
    layout = GridLayout(int(rng.integers(2, 6)), int(rng.integers(2, 6)))
    ds = markov_grid_tokens(rng, 6, layout, 9)
    disp = DisplacementSet(((1, 0), (0, 1), (1, 1)))
    got = cooccurrence(ds, disp).entries
    want = naive_cooccurrence_entries(ds, disp.displacements)
    assert set(got) == set(want)
    for key in want:
        assert got[key] == pytest.approx(want[key], abs=1e-14)


def test_negative_displacement_equals_flipped():
    rng = np.random.default_rng(11)
    ds = markov_grid_tokens(rng, 4, GridLayout(4, 5), 7)
    left = cooccurrence(ds, DisplacementSet(((-1, 0),))).entries
    right = cooccurrence(ds, DisplacementSet(((1, 0),))).entries
    # unordered pairs make direction irrelevant
    assert left == right


def test_displacement_validation():
    with pytest.raises(ValueError):
        DisplacementSet(())
    with pytest.raises(ValueError):
        DisplacementSet(((0, 0),))
    with pytest.raises(ValueError):
        DisplacementSet(((1, 0), (1, 0)))
    with pytest.raises(ValueError):
        DisplacementSet(((1, 0), (-1, 0)))


def test_cooccurrence_requires_layout():
    ds = iid_tokens(np.random.default_rng(0), 3, 8, 5)
    with pytest.raises(ValueError):
        cooccurrence(ds)


def test_displacement_with_no_pairs_rejected():
    ds = markov_grid_tokens(np.random.default_rng(0), 3, GridLayout(2, 2), 5)
    with pytest.raises(ValueError):
        cooccurrence(ds, DisplacementSet(((5, 0),)))


def test_merge_unigram_exact():
    rng = np.random.default_rng(3)
    parts = [iid_tokens(rng, 5, 7, 6) for _ in range(4)]
    merged = reduce(merge_unigram, (unigram(p) for p in parts))
    tokens = np.concatenate([p.tokens for p in parts])
    whole = unigram(TokenDataset(Codebook(6), tokens))
    np.testing.assert_array_equal(merged.counts, whole.counts)


def test_merge_unigram_empty_identity():
    ds = iid_tokens(np.random.default_rng(1), 4, 6, 5)
    hist = unigram(ds)
    merged = merge_unigram(UnigramHistogram.empty(5), hist)
    np.testing.assert_array_equal(merged.counts, hist.counts)
    assert UnigramHistogram.empty(5).probs.sum() == 0.0


def test_merge_cooccurrence_exact():
    rng = np.random.default_rng(9)
    layout = GridLayout(3, 4)
    parts = [markov_grid_tokens(rng, 3, layout, 6) for _ in range(3)]
    merged = reduce(merge_cooccurrence, (cooccurrence(p) for p in parts))
    tokens = np.concatenate([p.tokens for p in parts])
    whole = cooccurrence(TokenDataset(Codebook(6), tokens, layout))
    assert merged.entries == whole.entries
    assert merged.pair_total == whole.pair_total


def test_worker_count_never_changes_bits():
    rng = np.random.default_rng(21)
    layout = GridLayout(8, 8)
    # enough sequences to span several 256-row shards
    ds = markov_grid_tokens(rng, 600, layout, 12)
    u1, u8 = unigram(ds, workers=1), unigram(ds, workers=8)
    np.testing.assert_array_equal(u1.counts, u8.counts)
    c1, c8 = cooccurrence(ds, workers=1), cooccurrence(ds, workers=8)
    assert c1.pair_counts == c8.pair_counts
    assert c1.entries == c8.entries
