"""Estimator-level tests: MI, entropy, binning, MIC, correlations and the
permutation significance helper."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from influence_scope import (
    CategorySeries,
    DegenerateSeriesError,
    MicSearchMode,
    MicSearchParams,
    RealSeries,
    discrete_mutual_information,
    entropy,
    linear_correlation,
    mic,
    permutation_pvalue,
    quantile_bins,
    rank_correlation,
)


def cat(values, k=None):
    values = np.asarray(values)
    return CategorySeries(values, int(values.max()) + 1 if k is None else k)


# --- mutual information -------------------------------------------------------


def test_mi_independent_cells_zero():
    score = discrete_mutual_information(cat([0, 1, 0, 1]), cat([0, 0, 1, 1]))
    assert score.value == 0.0


def test_mi_deterministic_balanced_one_bit():
    score = discrete_mutual_information(cat([0, 0, 1, 1]), cat([0, 0, 1, 1]))
    assert score.value == pytest.approx(1.0, abs=1e-12)


def test_mi_length_mismatch_rejected():
    with pytest.raises(ValueError):
        discrete_mutual_information(cat([0, 1]), cat([0, 1, 0]))


def test_mi_empty_series_rejected():
    with pytest.raises(ValueError):
        CategorySeries(np.array([], dtype=np.int64), 2)


def test_mi_agreement_performance_carries_no_marginal_signal():
    # one agent's binary config vs another's performance that equals 1.0 on
    # config agreement and 0.5 otherwise: marginally independent
    rng = np.random.default_rng(3)
    n = 10000
    a = rng.integers(0, 2, size=n)
    b = rng.integers(0, 2, size=n)
    perf = np.where(a == b, 1, 0)
    score = discrete_mutual_information(cat(a), cat(perf))
    assert score.value <= 0.005


category_series = st.integers(min_value=2, max_value=4).flatmap(
    lambda k: arrays(
        np.int64,
        st.integers(min_value=1, max_value=40),
        elements=st.integers(min_value=0, max_value=k - 1),
    ).map(lambda v: CategorySeries(v, k))
)


@given(category_series, st.randoms(use_true_random=False))
def test_mi_non_negative_and_symmetric(x, rnd):
    y_values = np.array([rnd.randrange(3) for _ in range(len(x))])
    y = CategorySeries(y_values, 3)
    forward = discrete_mutual_information(x, y).value
    backward = discrete_mutual_information(y, x).value
    assert forward >= 0.0
    assert forward == backward


@given(category_series)
def test_mi_self_information_equals_entropy(x):
    assert discrete_mutual_information(x, x).value == pytest.approx(
        entropy(x).value, abs=1e-12
    )


# --- entropy -------------------------------------------------------------------


def test_entropy_constant_zero():
    assert entropy(cat([0, 0, 0, 0], k=1)).value == 0.0


def test_entropy_uniform_binary_one_bit():
    assert entropy(cat([0, 1, 0, 1])).value == pytest.approx(1.0, abs=1e-12)


def test_entropy_three_quarters_split():
    # -0.75*log2(0.75) - 0.25*log2(0.25)
    assert entropy(cat([0, 0, 0, 1])).value == pytest.approx(
        0.8112781244591328, abs=1e-12
    )


# --- quantile binning -----------------------------------------------------------


def test_quantile_bins_median_split():
    binned, cuts = quantile_bins(RealSeries(np.array([1.0, 2.0, 3.0, 4.0])), 2)
    assert binned.values.tolist() == [0, 0, 1, 1]
    assert cuts == (3.0,)


def test_quantile_bins_constant_is_degenerate():
    with pytest.raises(DegenerateSeriesError):
        quantile_bins(RealSeries(np.array([5.0, 5.0, 5.0])), 2)


def test_quantile_bins_uniform_draws_balanced():
    rng = np.random.default_rng(11)
    binned, _ = quantile_bins(RealSeries(rng.uniform(size=100)), 4)
    assert np.bincount(binned.values).tolist() == [25, 25, 25, 25]


def test_quantile_bins_ties_go_to_lower_bin():
    binned, _ = quantile_bins(np.array([1.0, 1.0, 1.0, 2.0]), 2)
    # the tied block straddles the nominal boundary and stays together below
    assert binned.values.tolist() == [0, 0, 0, 1]


real_series = arrays(
    np.float64,
    st.integers(min_value=4, max_value=60),
    elements=st.floats(min_value=-100, max_value=100, allow_nan=False),
)


@given(real_series, st.integers(min_value=2, max_value=5))
def test_quantile_bins_label_contract(values, n_bins):
    if len(values) < n_bins:
        values = np.resize(values, n_bins)
    try:
        binned, cuts = quantile_bins(RealSeries(values), n_bins)
    except DegenerateSeriesError:
        assert len(np.unique(values)) < 2
        return
    k = binned.n_categories
    assert 1 <= k <= n_bins
    assert set(np.unique(binned.values)) == set(range(k))
    assert len(cuts) == k - 1


# --- MIC -------------------------------------------------------------------------


def test_mic_identity_line_is_one():
    rng = np.random.default_rng(5)
    x = rng.permutation(200).astype(float)
    for mode in (MicSearchMode.EQUIPARTITION, MicSearchMode.AXIS_OPTIMIZED):
        score = mic(x, x, MicSearchParams(search_mode=mode))
        assert score.value == pytest.approx(1.0, abs=1e-9)


def test_mic_identity_line_exhaustive_small():
    x = np.arange(12, dtype=float)
    score = mic(x, x, MicSearchParams(search_mode=MicSearchMode.EXHAUSTIVE))
    assert score.value == pytest.approx(1.0, abs=1e-9)


def test_mic_constant_input_zero_by_convention():
    y = np.linspace(0, 1, 50)
    score = mic(np.full(50, 3.0), y)
    assert score.value == 0.0
    assert score.degenerate


def test_mic_null_median_regression():
    # frozen noise-floor regression value: median over seeds 0..99 of
    # MIC between independent uniforms at N=200, equipartition search
    values = [
        mic(
            np.random.default_rng(seed).uniform(size=200),
            np.random.default_rng(seed + 10_000).uniform(size=200),
        ).value
        for seed in range(100)
    ]
    median = float(np.median(values))
    assert median < 0.35
    assert median == pytest.approx(0.05871933423419839, abs=1e-12)


def test_mic_exhaustive_refuses_large_inputs():
    x = np.arange(13, dtype=float)
    with pytest.raises(ValueError):
        mic(x, x, MicSearchParams(search_mode=MicSearchMode.EXHAUSTIVE))


def test_mic_records_winning_layout():
    rng = np.random.default_rng(2)
    x = rng.uniform(size=100)
    score = mic(x, x)
    assert score.bin_layout is not None
    assert score.bin_layout.n_x >= 2 and score.bin_layout.n_y >= 2


small_real = arrays(
    np.float64,
    st.integers(min_value=4, max_value=12),
    elements=st.floats(min_value=-10, max_value=10, allow_nan=False),
)


@given(small_real, small_real)
@settings(max_examples=40, deadline=None)
def test_mic_mode_dominance(x, y):
    n = min(len(x), len(y))
    x, y = x[:n], y[:n]
    scores = {
        mode: mic(x, y, MicSearchParams(search_mode=mode)).value
        for mode in MicSearchMode
    }
    slack = 1e-12
    assert scores[MicSearchMode.EQUIPARTITION] <= scores[MicSearchMode.AXIS_OPTIMIZED] + slack
    assert scores[MicSearchMode.AXIS_OPTIMIZED] <= scores[MicSearchMode.EXHAUSTIVE] + slack
    for value in scores.values():
        assert 0.0 <= value <= 1.0


@given(real_series, real_series)
@settings(max_examples=30, deadline=None)
def test_mic_symmetry_and_range(x, y):
    n = min(len(x), len(y))
    x, y = x[:n], y[:n]
    forward = mic(x, y).value
    assert forward == mic(y, x).value
    assert 0.0 <= forward <= 1.0


@given(real_series)
@settings(max_examples=30, deadline=None)
def test_mic_rank_invariance(x):
    y = np.sin(np.arange(len(x), dtype=float))
    base = mic(x, y).value
    # strictly increasing re-encodings leave the rank-based binning alone
    transformed = mic(x**3 + x, np.exp(y / 2.0)).value
    assert transformed == base


# --- correlations -----------------------------------------------------------------


def test_linear_correlation_affine():
    x = np.linspace(-3, 3, 50)
    assert linear_correlation(x, 2 * x + 1).value == pytest.approx(1.0, abs=1e-12)
    assert linear_correlation(x, -x).value == pytest.approx(-1.0, abs=1e-12)


def test_linear_correlation_even_function_cancels():
    x = np.linspace(-2, 2, 41)
    assert linear_correlation(x, x**2).value == pytest.approx(0.0, abs=1e-12)


def test_linear_correlation_constant_degenerate():
    with pytest.raises(DegenerateSeriesError):
        linear_correlation(np.full(10, 1.0), np.arange(10, dtype=float))


def test_rank_correlation_monotone():
    x = np.linspace(-2, 2, 30)
    assert rank_correlation(x, np.exp(x)).value == pytest.approx(1.0, abs=1e-12)
    assert rank_correlation(x, -(x**3)).value == pytest.approx(-1.0, abs=1e-12)


def test_rank_correlation_null_distribution():
    hits = 0
    for seed in range(200):
        rng = np.random.default_rng(seed)
        x = rng.permutation(100).astype(float)
        y = rng.permutation(100).astype(float)
        if abs(rank_correlation(x, y).value) < 0.3:
            hits += 1
    assert hits >= 190


# --- permutation p-values ------------------------------------------------------------


def _mi_on_bins(x, y):
    xb, _ = quantile_bins(x, 3)
    yb, _ = quantile_bins(y, 3)
    return discrete_mutual_information(xb, yb)


def test_permutation_pvalue_perfect_dependence():
    x = cat([0, 1] * 50)
    p = permutation_pvalue(
        lambda a, b: discrete_mutual_information(a, b), x, x, repetitions=99, seed=0
    )
    assert p == pytest.approx(0.01)


def test_permutation_pvalue_constant_input():
    x = cat([0] * 40, k=1)
    y = cat([0, 1] * 20)
    p = permutation_pvalue(
        lambda a, b: discrete_mutual_information(a, b), x, y, repetitions=99, seed=1
    )
    assert p == 1.0


def test_permutation_pvalue_rejects_few_repetitions():
    x = cat([0, 1] * 20)
    with pytest.raises(ValueError):
        permutation_pvalue(
            lambda a, b: discrete_mutual_information(a, b), x, x, repetitions=5, seed=0
        )


def test_permutation_pvalue_deterministic():
    rng = np.random.default_rng(9)
    x = rng.uniform(size=120)
    y = rng.uniform(size=120)
    first = permutation_pvalue(_mi_on_bins, x, y, repetitions=49, seed=7)
    second = permutation_pvalue(_mi_on_bins, x, y, repetitions=49, seed=7)
    assert first == second


def test_permutation_pvalue_null_calibration():
    hits = 0
    seeds = 200
    for seed in range(seeds):
        rng = np.random.default_rng(seed)
        x = rng.uniform(size=200)
        y = rng.uniform(size=200)
        if permutation_pvalue(_mi_on_bins, x, y, repetitions=99, seed=seed) <= 0.05:
            hits += 1
    assert hits / seeds == pytest.approx(0.05, abs=0.03)
