"""Information-theoretic diagnostics of token datasets.

Both quantities are reported in nats. Adjacent mutual information uses the
directed, unsymmetrized joint distribution of (token at p, token at p + d)
per displacement, with marginals taken from that same joint, averaged over
the displacement set.
"""

from __future__ import annotations

import numpy as np

from .histograms import DEFAULT_DISPLACEMENTS, DisplacementSet, directed_pairs, unigram
from .token_io import TokenDataset


def _entropy(probs: np.ndarray) -> float:
    """Shannon entropy in nats with the 0 * log 0 = 0 convention."""
    p = probs[probs > 0]
    return float(-(p * np.log(p)).sum())


def token_entropy(dataset: TokenDataset) -> float:
    """Entropy of the unigram token distribution; 0 for a constant dataset."""
    return _entropy(unigram(dataset).probs)


def adjacent_mi(
    dataset: TokenDataset,
    displacements: DisplacementSet = DEFAULT_DISPLACEMENTS,
) -> float:
    """Average mutual information between displacement-adjacent tokens.

    I(U; V) = H(U) + H(V) - H(U, V) computed per displacement from directed
    pair counts, then averaged. Nonnegative; at most min(H(U), H(V)).
    """
    if len(dataset) == 0:
        raise ValueError("cannot compute diagnostics of an empty dataset")
    if dataset.layout is None:
        raise ValueError("adjacent MI needs a dataset with a grid layout")
    rows, cols = dataset.layout.rows, dataset.layout.cols
    size = dataset.codebook.size
    if size > 2**31:
        raise ValueError("codebook too large for int64 pair keys")
    total = 0.0
    for dx, dy in displacements:
        first, second = directed_pairs(dataset.tokens, rows, cols, dx, dy)
        # sparse joint: never materializes the K x K table
        keys, counts = np.unique(first * size + second, return_counts=True)
        joint = counts / counts.sum()
        p_u = np.bincount(keys // size, weights=joint, minlength=size)
        p_v = np.bincount(keys % size, weights=joint, minlength=size)
        total += _entropy(p_u) + _entropy(p_v) - _entropy(joint)
    return max(0.0, total / len(displacements))
