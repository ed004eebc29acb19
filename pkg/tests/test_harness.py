"""Rank statistics, agreement report, and the subsample sweep."""

import warnings

import numpy as np
import pytest
import scipy.stats

from codehist import (
    GridLayout,
    correlation_report,
    kendall,
    nmse,
    pairwise_accuracy,
    sample_sweep,
    spearman,
)

from synthsrc import markov_grid_tokens


def test_spearman_known_value():
    # one swapped neighbor pair in a length-4 ranking -> rho = 0.8
    assert spearman([1, 2, 3, 4], [1, 2, 4, 3]) == pytest.approx(0.8, abs=1e-14)


def test_spearman_perfect_and_reversed():
    assert spearman([1, 2, 3], [10, 20, 30]) == pytest.approx(1.0, abs=1e-14)
    assert spearman([1, 2, 3], [5, 4, 3]) == pytest.approx(-1.0, abs=1e-14)


@pytest.mark.parametrize("seed", range(5))
def test_spearman_matches_scipy_with_ties(seed):
    rng = np.random.default_rng(seed)
    a = rng.integers(0, 6, size=30).astype(float)  # plenty of ties
    b = a + rng.normal(0, 2.0, size=30)
    want = scipy.stats.spearmanr(a, b).statistic
    assert spearman(a, b) == pytest.approx(want, abs=1e-12)


def test_spearman_zero_variance_warns_and_returns_zero():
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        value = spearman([1.0, 1.0, 1.0], [1, 2, 3])
    assert value == 0.0
    assert any("constant" in str(w.message) for w in caught)


def test_kendall_known_value():
    # rankings (1,2,3) vs (1,3,2): 2 concordant, 1 discordant -> 1/3
    assert kendall([1, 2, 3], [1, 3, 2]) == pytest.approx(1 / 3, abs=1e-14)


@pytest.mark.parametrize("seed", range(5))
def test_kendall_matches_scipy_tau_b(seed):
    rng = np.random.default_rng(seed)
    a = rng.integers(0, 5, size=25).astype(float)
    b = rng.integers(0, 5, size=25).astype(float)
    want = scipy.stats.kendalltau(a, b).statistic
    assert kendall(a, b) == pytest.approx(want, abs=1e-12)


def test_nmse_perfect_alignment_is_zero():
    metric = [0.1, 0.4, 0.9]
    assert nmse(metric, metric, "higher") == pytest.approx(0.0, abs=1e-14)


def test_nmse_anti_aligned_lower_direction():
    # lower-is-better metric equal to the negated reference aligns exactly
    ref = [0.0, 0.5, 1.0]
    metric = [3.0, 2.5, 2.0]
    assert nmse(metric, ref, "lower") == pytest.approx(0.0, abs=1e-14)


def test_nmse_reversed_is_one():
    # after min-max scaling, x vs 1-x has MSE = mean((2t-1)^2) over the grid
    ref = [0.0, 0.5, 1.0]
    metric = [1.0, 0.5, 0.0]
    want = float(np.mean((np.array([1.0, 0.0, -1.0])) ** 2))
    assert nmse(metric, ref, "higher") == pytest.approx(want, abs=1e-14)


def test_nmse_constant_input_raises():
    with pytest.raises(ValueError):
        nmse([1.0, 1.0], [0.0, 1.0], "higher")


def test_nmse_zscore_mode():
    rng = np.random.default_rng(0)
    ref = rng.normal(size=12)
    metric = 3.0 * ref + 1.0
    assert nmse(metric, ref, "higher", mode="zscore") == pytest.approx(0.0, abs=1e-12)


def test_pairwise_accuracy_basics():
    ref = [1.0, 2.0, 3.0]
    assert pairwise_accuracy([0.1, 0.2, 0.3], ref, "higher") == 1.0
    assert pairwise_accuracy([0.3, 0.2, 0.1], ref, "higher") == 0.0
    assert pairwise_accuracy([0.3, 0.2, 0.1], ref, "lower") == 1.0


def test_pairwise_accuracy_tie_handling():
    # metric tie on the only comparable pair counts half
    assert pairwise_accuracy([0.5, 0.5], [1.0, 2.0], "higher") == 0.5
    # reference ties are excluded entirely
    assert pairwise_accuracy([0.1, 0.9, 0.5], [1.0, 1.0, 2.0], "higher") == pytest.approx(0.5)
    with pytest.raises(ValueError):
        pairwise_accuracy([0.1, 0.2], [1.0, 1.0], "higher")  # no comparable pairs


def test_correlation_report_bundle():
    rng = np.random.default_rng(1)
    ref = np.linspace(0, 1, 20)
    metric = -ref + rng.normal(0, 0.05, size=20)
    report = correlation_report(metric, ref, "lower")
    assert report.n == 20
    assert report.spearman > 0.9
    assert report.kendall > 0.8
    assert report.nmse < 0.1
    assert not report.degenerate


def test_correlation_report_degenerate_flag():
    report = correlation_report([1.0, 1.0, 1.0], [1.0, 2.0, 3.0], "higher")
    assert report.degenerate
    assert report.spearman == 0.0
    assert np.isnan(report.nmse)


def test_sample_sweep_deterministic_and_shrinking():
    rng = np.random.default_rng(5)
    layout = GridLayout(4, 4)
    real = markov_grid_tokens(rng, 400, layout, 10)
    gen = markov_grid_tokens(rng, 400, layout, 10, copy_left=0.2, copy_up=0.1, power=0.5)
    a = sample_sweep(real, gen, [50, 200], repeats=6, seed=11)
    b = sample_sweep(real, gen, [50, 200], repeats=6, seed=11)
    np.testing.assert_array_equal(a.means, b.means)
    np.testing.assert_array_equal(a.stddevs, b.stddevs)
    assert a.sample_sizes == (50, 200)
    assert a.stddevs[1] < a.stddevs[0]
    c = sample_sweep(real, gen, [50, 200], repeats=6, seed=12)
    assert np.any(c.means != a.means)


def test_sample_sweep_frechet_metric():
    rng = np.random.default_rng(6)
    layout = GridLayout(4, 4)
    real = markov_grid_tokens(rng, 150, layout, 8)
    gen = markov_grid_tokens(rng, 150, layout, 8, power=0.3)
    result = sample_sweep(real, gen, [40], repeats=4, seed=2, metric="frechet-on-unigram")
    assert result.means[0] > 0.0
    assert np.isfinite(result.stddevs[0])


def test_sample_sweep_validates_sizes():
    rng = np.random.default_rng(7)
    layout = GridLayout(2, 2)
    real = markov_grid_tokens(rng, 30, layout, 5)
    gen = markov_grid_tokens(rng, 30, layout, 5)
    with pytest.raises(ValueError):
        sample_sweep(real, gen, [31], repeats=3, seed=0)
    with pytest.raises(ValueError):
        sample_sweep(real, gen, [], repeats=3, seed=0)
    with pytest.raises(ValueError):
        sample_sweep(real, gen, [10], repeats=0, seed=0)
