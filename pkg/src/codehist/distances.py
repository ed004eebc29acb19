"""Distances between token histograms and the combined grid-token score.

The headline score compares a reference dataset against a generated one as
the arithmetic mean of two Hellinger distances: one between unigram token
histograms, one between symmetrized, displacement-averaged co-occurrence
distributions. Hellinger is (1/sqrt(2)) * ||sqrt(p) - sqrt(q)||_2, so both
components live in [0, 1], are 0 exactly on identical inputs, and 1 on
disjoint supports.

Alternative distances (cosine, smoothed KL, 1-D earth mover's) are provided
for comparison runs; they reuse the same histogram plumbing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .histograms import (
    DEFAULT_DISPLACEMENTS,
    DisplacementSet,
    SparseCooccurrence,
    UnigramHistogram,
    cooccurrence,
    unigram,
)
from .token_io import TokenDataset

HELLINGER = "hellinger"
ALT_KINDS = ("cosine", "kl", "emd1d")
_KL_EPS = 1e-8


@dataclass(frozen=True)
class ChdReport:
    """Unigram component, pair component, and their arithmetic mean."""

    chd_1d: float
    chd_2d: float
    chd: float


def _prob_vector(p) -> np.ndarray:
    probs = p.probs if isinstance(p, UnigramHistogram) else np.asarray(p, dtype=np.float64)
    if probs.ndim != 1:
        raise ValueError("expected a 1-D probability vector")
    return probs


def hellinger(p, q) -> float:
    """Hellinger distance between two distributions over the same support.

    Accepts :class:`UnigramHistogram` objects or plain probability vectors.
    """
    pv, qv = _prob_vector(p), _prob_vector(q)
    if pv.shape != qv.shape:
        raise ValueError(f"support sizes differ: {pv.shape[0]} vs {qv.shape[0]}")
    diff = np.sqrt(pv) - np.sqrt(qv)
    return math.sqrt(0.5 * float(diff @ diff))


def _aligned_sparse(p: SparseCooccurrence, q: SparseCooccurrence):
    """Probability vectors of p and q over the sorted union of observed pairs."""
    if p.size != q.size:
        raise ValueError(f"codebook sizes differ: {p.size} vs {q.size}")
    if set(p.displacements) != set(q.displacements):
        raise ValueError("mismatched displacement conventions")
    pe, qe = p.entries, q.entries
    keys = sorted(set(pe) | set(qe))
    pv = np.array([pe.get(k, 0.0) for k in keys])
    qv = np.array([qe.get(k, 0.0) for k in keys])
    return pv, qv


def hellinger_sparse(p: SparseCooccurrence, q: SparseCooccurrence) -> float:
    """Hellinger distance between sparse pair distributions; absent pairs are 0."""
    pv, qv = _aligned_sparse(p, q)
    diff = np.sqrt(pv) - np.sqrt(qv)
    return math.sqrt(0.5 * float(diff @ diff))


def _alt(pv: np.ndarray, qv: np.ndarray, kind: str) -> float:
    if kind == "cosine":
        pn, qn = float(np.linalg.norm(pv)), float(np.linalg.norm(qv))
        if pn == 0.0 and qn == 0.0:
            return 0.0
        if pn == 0.0 or qn == 0.0:
            return 1.0
        return 1.0 - float(pv @ qv) / (pn * qn)
    if kind == "kl":
        ps = pv + _KL_EPS
        qs = qv + _KL_EPS
        ps /= ps.sum()
        qs /= qs.sum()
        return float(np.sum(ps * np.log(ps / qs)))
    if kind == "emd1d":
        return float(np.abs(np.cumsum(pv - qv)).sum())
    raise ValueError(f"unknown distance kind {kind!r}")


def alt_distance(p, q, kind: str) -> float:
    """Cosine / smoothed-KL / 1-D EMD between unigram distributions."""
    pv, qv = _prob_vector(p), _prob_vector(q)
    if pv.shape != qv.shape:
        raise ValueError(f"support sizes differ: {pv.shape[0]} vs {qv.shape[0]}")
    return _alt(pv, qv, kind)


def alt_distance_sparse(p: SparseCooccurrence, q: SparseCooccurrence, kind: str) -> float:
    """Alternative distances on sparse pair distributions.

    Vectors are aligned over the sorted union of observed pairs; for emd1d
    that sorted key order is the (arbitrary but deterministic) index order.
    """
    pv, qv = _aligned_sparse(p, q)
    return _alt(pv, qv, kind)


def chd(
    real: TokenDataset,
    generated: TokenDataset,
    displacements: DisplacementSet = DEFAULT_DISPLACEMENTS,
    distance: str = HELLINGER,
    workers: int | None = None,
) -> ChdReport:
    """Compare two token datasets; both must share codebook, length, layout.

    ``distance`` selects the per-component distance; the default Hellinger
    form is the headline score, alternatives swap both components.
    """
    if real.codebook.size != generated.codebook.size:
        raise ValueError(
            f"codebook sizes differ: {real.codebook.size} vs {generated.codebook.size}"
        )
    if real.seq_len != generated.seq_len:
        raise ValueError(f"sequence lengths differ: {real.seq_len} vs {generated.seq_len}")
    if real.layout != generated.layout:
        raise ValueError("datasets disagree on grid layout")
    if len(real) == 0 or len(generated) == 0:
        raise ValueError("both datasets must be non-empty")
    u_real = unigram(real, workers=workers)
    u_gen = unigram(generated, workers=workers)
    c_real = cooccurrence(real, displacements, workers=workers)
    c_gen = cooccurrence(generated, displacements, workers=workers)
    if distance == HELLINGER:
        d1 = hellinger(u_real, u_gen)
        d2 = hellinger_sparse(c_real, c_gen)
    elif distance in ALT_KINDS:
        d1 = alt_distance(u_real, u_gen, distance)
        d2 = alt_distance_sparse(c_real, c_gen, distance)
    else:
        raise ValueError(f"unknown distance kind {distance!r}")
    return ChdReport(chd_1d=d1, chd_2d=d2, chd=(d1 + d2) / 2.0)
