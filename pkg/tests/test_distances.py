"""Distance functions against closed forms and naive evaluations."""

import math

import numpy as np
import pytest

from codehist import (
    Codebook,
    DisplacementSet,
    GridLayout,
    TokenDataset,
    alt_distance,
    chd,
    cooccurrence,
    hellinger,
    hellinger_sparse,
    unigram,
)
from codehist.distances import alt_distance_sparse

from synthsrc import iid_tokens, markov_grid_tokens


def naive_hellinger(p, q):
    return math.sqrt(0.5 * sum((math.sqrt(a) - math.sqrt(b)) ** 2 for a, b in zip(p, q)))


def test_hellinger_disjoint_support_is_one():
    assert hellinger([1.0, 0.0], [0.0, 1.0]) == pytest.approx(1.0, abs=1e-15)


def test_hellinger_identical_is_zero():
    assert hellinger([0.3, 0.7], [0.3, 0.7]) == 0.0


def test_hellinger_point_vs_uniform_closed_form():
    # H^2 = 1 - sqrt(1/2)
    want = math.sqrt(1.0 - math.sqrt(0.5))
    assert hellinger([1.0, 0.0], [0.5, 0.5]) == pytest.approx(want, abs=1e-15)


@pytest.mark.parametrize("seed", range(6))
def test_hellinger_matches_naive(seed):
    rng = np.random.default_rng(seed)
    p = rng.dirichlet(np.ones(12))
    q = rng.dirichlet(np.ones(12))
    assert hellinger(p, q) == pytest.approx(naive_hellinger(p, q), abs=1e-14)


def test_hellinger_accepts_histograms():
    rng = np.random.default_rng(0)
    a, b = iid_tokens(rng, 20, 8, 6), iid_tokens(rng, 20, 8, 6)
    ha, hb = unigram(a), unigram(b)
    assert hellinger(ha, hb) == pytest.approx(naive_hellinger(ha.probs, hb.probs), abs=1e-14)


def test_sparse_hellinger_matches_dense_embedding():
    rng = np.random.default_rng(2)
    layout = GridLayout(4, 4)
    a = markov_grid_tokens(rng, 10, layout, 8)
    b = markov_grid_tokens(rng, 10, layout, 8, copy_left=0.1, copy_up=0.1)
    ca, cb = cooccurrence(a), cooccurrence(b)
    keys = sorted(set(ca.entries) | set(cb.entries))
    pa = [ca.entries.get(k, 0.0) for k in keys]
    pb = [cb.entries.get(k, 0.0) for k in keys]
    assert hellinger_sparse(ca, cb) == pytest.approx(naive_hellinger(pa, pb), abs=1e-14)


def test_chd_is_mean_of_components():
    rng = np.random.default_rng(4)
    layout = GridLayout(4, 4)
    a = markov_grid_tokens(rng, 30, layout, 8)
    b = markov_grid_tokens(rng, 30, layout, 8, copy_left=0.05, copy_up=0.05, power=0.2)
    report = chd(a, b)
    assert report.chd == (report.chd_1d + report.chd_2d) / 2.0
    d1 = hellinger(unigram(a), unigram(b))
    d2 = hellinger_sparse(cooccurrence(a), cooccurrence(b))
    assert report.chd_1d == d1
    assert report.chd_2d == d2
    assert report.chd > 0.0


def test_chd_self_is_zero():
    ds = markov_grid_tokens(np.random.default_rng(1), 20, GridLayout(3, 3), 6)
    report = chd(ds, ds)
    assert report.chd == 0.0


def test_chd_rejects_mismatched_datasets():
    rng = np.random.default_rng(0)
    a = markov_grid_tokens(rng, 5, GridLayout(2, 2), 6)
    b = markov_grid_tokens(rng, 5, GridLayout(2, 2), 7)
    with pytest.raises(ValueError):
        chd(a, b)
    c = iid_tokens(rng, 5, 4, 6)  # no layout
    with pytest.raises(ValueError):
        chd(a, c)


def test_kl_on_known_pair():
    # KL(p||q) with p=(1,0), q=(0.5,0.5) -> log 2, up to the epsilon floor
    got = alt_distance([1.0, 0.0], [0.5, 0.5], "kl")
    assert got == pytest.approx(math.log(2.0), abs=1e-6)


def test_emd1d_on_shifted_mass():
    # moving all mass two bins to the right costs 2
    assert alt_distance([1.0, 0.0, 0.0], [0.0, 0.0, 1.0], "emd1d") == pytest.approx(2.0, abs=1e-15)


def test_cosine_corner_cases():
    assert alt_distance([0.5, 0.5], [0.5, 0.5], "cosine") == pytest.approx(0.0, abs=1e-15)
    assert alt_distance([1.0, 0.0], [0.0, 1.0], "cosine") == pytest.approx(1.0, abs=1e-15)


def test_alt_distance_sparse_agrees_with_dense():
    rng = np.random.default_rng(3)
    layout = GridLayout(3, 4)
    a = markov_grid_tokens(rng, 8, layout, 6)
    b = markov_grid_tokens(rng, 8, layout, 6, power=0.1)
    ca, cb = cooccurrence(a), cooccurrence(b)
    keys = sorted(set(ca.entries) | set(cb.entries))
    pa = np.array([ca.entries.get(k, 0.0) for k in keys])
    pb = np.array([cb.entries.get(k, 0.0) for k in keys])
    for kind in ("cosine", "kl", "emd1d"):
        got = alt_distance_sparse(ca, cb, kind)
        want = alt_distance(pa, pb, kind)
        assert got == pytest.approx(want, abs=1e-12), kind


def test_chd_alt_distance_dispatch():
    rng = np.random.default_rng(8)
    layout = GridLayout(3, 3)
    a = markov_grid_tokens(rng, 10, layout, 5)
    b = markov_grid_tokens(rng, 10, layout, 5, power=0.3)
    for kind in ("cosine", "kl", "emd1d"):
        report = chd(a, b, distance=kind)
        assert math.isfinite(report.chd)
    with pytest.raises(ValueError):
        chd(a, b, distance="manhattan")


def test_displacement_set_on_chd():
    rng = np.random.default_rng(12)
    layout = GridLayout(4, 4)
    a = markov_grid_tokens(rng, 10, layout, 6)
    b = markov_grid_tokens(rng, 10, layout, 6, power=0.4)
    one = chd(a, b, DisplacementSet(((1, 0),)))
    both = chd(a, b)
    assert one.chd_1d == both.chd_1d  # unigram part ignores displacements
    assert one.chd_2d != both.chd_2d
