"""Rank statistics against reference scores and sample-size sweeps.

Direction handling: metrics where lower is better are negated before any
comparison against reference (e.g. human) scores, so every statistic below
reads "higher adjusted metric should mean higher reference score".
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .baselines import fit_gaussian, frechet_distance
from .distances import chd
from .histograms import DEFAULT_DISPLACEMENTS
from .token_io import TokenDataset

HIGHER_BETTER = "higher"
LOWER_BETTER = "lower"

SWEEP_METRICS = ("chd", "frechet-on-unigram")


@dataclass(frozen=True)
class CorrelationReport:
    """Agreement between a metric and reference scores over n systems."""

    spearman: float
    kendall: float
    nmse: float
    n: int
    degenerate: bool = False


@dataclass(frozen=True)
class SweepResult:
    """Metric mean/stddev per subsample size over seeded bootstrap repeats."""

    sample_sizes: list
    means: list
    stddevs: list


def _check_pair(a, b, min_n=2):
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.ndim != 1 or b.ndim != 1:
        raise ValueError("score lists must be 1-D")
    if a.shape != b.shape:
        raise ValueError(f"length mismatch: {a.shape[0]} vs {b.shape[0]}")
    if a.shape[0] < min_n:
        raise ValueError(f"need at least {min_n} scores, got {a.shape[0]}")
    return a, b


def average_ranks(values) -> np.ndarray:
    """1-based ranks with ties assigned the mean of their rank range."""
    values = np.asarray(values, dtype=np.float64)
    order = np.argsort(values, kind="stable")
    ranks = np.empty(values.shape[0])
    i = 0
    while i < values.shape[0]:
        j = i
        while j + 1 < values.shape[0] and values[order[j + 1]] == values[order[i]]:
            j += 1
        ranks[order[i:j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    return ranks


def spearman(a, b) -> float:
    """Rank correlation: Pearson correlation of average ranks.

    Zero variance in either ranking is degenerate and yields 0.0 with a
    warning rather than an error, so batch evaluations keep running.
    """
    a, b = _check_pair(a, b)
    ra, rb = average_ranks(a), average_ranks(b)
    ra_c = ra - ra.mean()
    rb_c = rb - rb.mean()
    va, vb = float(ra_c @ ra_c), float(rb_c @ rb_c)
    if va == 0.0 or vb == 0.0:
        warnings.warn("constant ranking: correlation undefined, reporting 0.0")
        return 0.0
    return float(ra_c @ rb_c) / float(np.sqrt(va * vb))


def kendall(a, b) -> float:
    """Kendall's tau-b with tie corrections in both arguments."""
    a, b = _check_pair(a, b)
    iu = np.triu_indices(a.shape[0], k=1)
    sa = np.sign(a[:, None] - a[None, :])[iu]
    sb = np.sign(b[:, None] - b[None, :])[iu]
    concordance = float((sa * sb).sum())
    ties_a = float((sa == 0).sum())
    ties_b = float((sb == 0).sum())
    n0 = float(len(sa))
    denom = float(np.sqrt((n0 - ties_a) * (n0 - ties_b)))
    if denom == 0.0:
        warnings.warn("constant ranking: correlation undefined, reporting 0.0")
        return 0.0
    return concordance / denom


def _adjust(metric, direction):
    if direction == HIGHER_BETTER:
        return metric
    if direction == LOWER_BETTER:
        return -metric
    raise ValueError(f"direction must be {HIGHER_BETTER!r} or {LOWER_BETTER!r}")


def nmse(metric, reference, direction, mode: str = "minmax") -> float:
    """Normalized MSE after direction alignment.

    ``minmax`` maps both score lists onto [0, 1]; ``zscore`` standardizes
    them instead (kept behind the flag in case a different normalization is
    wanted). Constant lists cannot be normalized and raise.
    """
    metric, reference = _check_pair(metric, reference)
    metric = _adjust(metric, direction)

    def norm(v):
        if mode == "minmax":
            lo, hi = float(v.min()), float(v.max())
            if hi == lo:
                raise ValueError("constant score list cannot be min-max normalized")
            return (v - lo) / (hi - lo)
        if mode == "zscore":
            sd = float(v.std())
            if sd == 0.0:
                raise ValueError("constant score list cannot be standardized")
            return (v - v.mean()) / sd
        raise ValueError(f"unknown nmse mode {mode!r}")

    diff = norm(metric) - norm(reference)
    return float(np.mean(diff * diff))


def pairwise_accuracy(metric, reference, direction) -> float:
    """Fraction of reference-ordered pairs the metric ranks the same way.

    Pairs with tied reference scores are excluded; pairs the metric ties
    count half. Raises if no pair has distinct reference scores.
    """
    metric, reference = _check_pair(metric, reference)
    metric = _adjust(metric, direction)
    iu = np.triu_indices(metric.shape[0], k=1)
    sm = np.sign(metric[:, None] - metric[None, :])[iu]
    sr = np.sign(reference[:, None] - reference[None, :])[iu]
    valid = sr != 0
    if not valid.any():
        raise ValueError("all reference scores are tied; no ordered pairs to check")
    agree = (sm[valid] == sr[valid]).sum()
    half = (sm[valid] == 0).sum()
    return float(agree + 0.5 * half) / float(valid.sum())


def correlation_report(metric, reference, direction, nmse_mode="minmax") -> CorrelationReport:
    """Bundle spearman/kendall/nmse for one metric-vs-reference comparison."""
    m, r = _check_pair(metric, reference)
    adjusted = _adjust(m, direction)
    degenerate = len(np.unique(adjusted)) < 2 or len(np.unique(r)) < 2
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        rho = spearman(adjusted, r)
        tau = kendall(adjusted, r)
    try:
        error = nmse(m, r, direction, mode=nmse_mode)
    except ValueError:
        error = float("nan")  # constant inputs; flagged degenerate below
    return CorrelationReport(
        spearman=rho,
        kendall=tau,
        nmse=error,
        n=m.shape[0],
        degenerate=degenerate,
    )


def _unigram_features(dataset: TokenDataset) -> np.ndarray:
    """Per-sequence token histogram (counts / seq_len) as a feature vector."""
    size = dataset.codebook.size
    feats = np.zeros((len(dataset), size))
    for i, seq in enumerate(dataset.sequences):
        feats[i] = np.bincount(seq, minlength=size)
    return feats / dataset.seq_len


def sample_sweep(
    real: TokenDataset,
    generated: TokenDataset,
    sizes,
    repeats: int,
    seed: int,
    metric: str = "chd",
    displacements=DEFAULT_DISPLACEMENTS,
) -> SweepResult:
    """Metric stability versus subsample size.

    For every size, draws ``repeats`` subsample pairs without replacement
    (independently from each dataset) and records the metric's mean and
    population stddev. Per-(size, repeat) generators are derived from
    ``seed`` so the sweep is reproducible and parallelizable.
    """
    sizes = [int(s) for s in sizes]
    if not sizes:
        raise ValueError("need at least one sample size")
    if repeats < 1:
        raise ValueError("repeats must be >= 1")
    if metric not in SWEEP_METRICS:
        raise ValueError(f"metric must be one of {SWEEP_METRICS}")
    limit = min(len(real), len(generated))
    for s in sizes:
        if s < 1 or s > limit:
            raise ValueError(f"sample size {s} outside [1, {limit}]")
    means, stds = [], []
    for si, size in enumerate(sizes):
        values = np.empty(repeats)
        for rep in range(repeats):
            rng = np.random.default_rng(
                np.random.SeedSequence(entropy=seed, spawn_key=(si, rep))
            )
            sub_real = real.subset(rng.choice(len(real), size, replace=False))
            sub_gen = generated.subset(rng.choice(len(generated), size, replace=False))
            if metric == "chd":
                values[rep] = chd(sub_real, sub_gen, displacements).chd
            else:
                fit_r = fit_gaussian(_unigram_features(sub_real))
                fit_g = fit_gaussian(_unigram_features(sub_gen))
                values[rep] = frechet_distance(fit_r, fit_g)
        means.append(float(values.mean()))
        stds.append(float(values.std()))
    return SweepResult(
        sample_sizes=tuple(int(s) for s in sizes),
        means=tuple(means),
        stddevs=tuple(stds),
    )
