"""Dependency measure estimators.

Implements plug-in mutual information and entropy for categorical data,
equal-frequency binning of real data, the maximal information coefficient
(normalized MI maximized over admissible binning grids), Pearson and
Spearman correlations, and a seeded permutation significance test.

All mutual-information values are reported in bits (base-2 logarithms).
The MIC normalizer is a ratio of logarithms and therefore base-invariant;
base 2 is used throughout for consistency.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Callable, Optional, Sequence

import numpy as np
import scipy.stats

from .errors import DegenerateSeriesError, InternalConsistencyError
from .series import CategorySeries, RealSeries, Series, as_float_values

# Rounding residue this small is clamped to zero; anything more negative
# indicates a real bug in the estimator.
_NEGATIVE_MI_TOLERANCE = 1e-12


class MeasureKind(Enum):
    MI = "mi"
    MIC = "mic"
    LINEAR = "linear"
    RANK = "rank"
    ENTROPY = "entropy"


class MicSearchMode(Enum):
    EQUIPARTITION = "equipartition"
    AXIS_OPTIMIZED = "axis_optimized"
    EXHAUSTIVE = "exhaustive"


# The exhaustive grid search is a test oracle; beyond this many samples it
# is refused rather than silently slow.
EXHAUSTIVE_MAX_SAMPLES = 12


@dataclass(frozen=True)
class MicSearchParams:
    """Grid-search bounds for the maximal information coefficient.

    The admissible grids satisfy ``n_x >= 2``, ``n_y >= 2`` and
    ``n_x * n_y < B`` with ``B = N ** b_exponent``.  ``B`` is raised to just
    above 4 when necessary so the 2x2 grid stays admissible for small N.
    """

    b_exponent: float = 0.6
    min_bins_per_axis: int = 2
    search_mode: MicSearchMode = MicSearchMode.EQUIPARTITION

    def __post_init__(self) -> None:
        if not 0.0 < self.b_exponent < 1.0:
            raise ValueError("b_exponent must lie in (0, 1)")
        if self.min_bins_per_axis != 2:
            raise ValueError("min_bins_per_axis is fixed at 2")

    def grid_limit(self, n: int) -> float:
        return max(float(n) ** self.b_exponent, 4.0 * (1.0 + 1e-9))

    def admissible_pairs(self, n: int) -> list[tuple[int, int]]:
        limit = self.grid_limit(n)
        pairs: list[tuple[int, int]] = []
        nx = 2
        while nx * 2 < limit:
            ny = 2
            while nx * ny < limit:
                pairs.append((nx, ny))
                ny += 1
            nx += 1
        return pairs


@dataclass(frozen=True)
class BinLayout:
    """Grid shape plus (optional) value cut points of a winning binning."""

    n_x: int
    n_y: int
    x_cuts: Optional[tuple[float, ...]] = None
    y_cuts: Optional[tuple[float, ...]] = None


@dataclass(frozen=True)
class DependencyScore:
    """A dependency-measure value with its provenance.

    ``value`` is in bits for MI/entropy, in [0, 1] for MIC and in [-1, 1]
    for correlations.  ``lag`` records which alignment won when a score is
    the maximum over several time lags.
    """

    value: float
    measure_kind: MeasureKind
    sample_count: int
    bin_layout: Optional[BinLayout] = None
    p_value: Optional[float] = None
    lag: Optional[int] = None
    degenerate: bool = False


@dataclass(frozen=True)
class JointDistribution:
    """Empirical joint and marginal probabilities of two category series."""

    joint: np.ndarray
    marginal_x: np.ndarray
    marginal_y: np.ndarray
    sample_count: int

    def __post_init__(self) -> None:
        joint = np.asarray(self.joint, dtype=np.float64)
        if np.any(joint < 0):
            raise ValueError("joint probabilities must be non-negative")
        if abs(joint.sum() - 1.0) > 1e-12:
            raise ValueError("joint probabilities must sum to 1")
        if np.max(np.abs(joint.sum(axis=1) - self.marginal_x)) > 1e-12:
            raise ValueError("marginal_x inconsistent with joint")
        if np.max(np.abs(joint.sum(axis=0) - self.marginal_y)) > 1e-12:
            raise ValueError("marginal_y inconsistent with joint")


def joint_distribution(x: CategorySeries, y: CategorySeries) -> JointDistribution:
    counts = contingency_table(x, y)
    n = counts.sum()
    joint = counts / n
    return JointDistribution(joint, joint.sum(axis=1), joint.sum(axis=0), int(n))


def contingency_table(x: CategorySeries, y: CategorySeries) -> np.ndarray:
    if len(x) != len(y):
        raise ValueError("series lengths differ")
    kx, ky = x.n_categories, y.n_categories
    flat = x.values * ky + y.values
    return np.bincount(flat, minlength=kx * ky).reshape(kx, ky)


def _mi_bits_from_counts(counts: np.ndarray) -> float:
    """Plug-in mutual information in bits from a joint count table.

    The per-cell terms are summed with a sorted exact summation so the
    result is bit-identical under transposition of the table.
    """
    n = int(counts.sum())
    if n == 0:
        raise ValueError("empty count table")
    row = counts.sum(axis=1)
    col = counts.sum(axis=0)
    nz = counts > 0
    c = counts[nz].astype(np.float64)
    denom = (row[:, None] * col[None, :])[nz].astype(np.float64)
    terms = (c / n) * np.log2(c * n / denom)
    value = math.fsum(np.sort(terms))
    if value < 0.0:
        if value < -_NEGATIVE_MI_TOLERANCE:
            raise InternalConsistencyError(
                f"mutual information fell below zero: {value}"
            )
        value = 0.0
    return value


def _entropy_bits_from_counts(counts: np.ndarray) -> float:
    n = int(counts.sum())
    c = counts[counts > 0].astype(np.float64)
    terms = -(c / n) * np.log2(c / n)
    return max(math.fsum(np.sort(terms)), 0.0)


def discrete_mutual_information(
    x: CategorySeries, y: CategorySeries
) -> DependencyScore:
    """Plug-in mutual information of two category series, in bits.

    Cells with zero joint frequency contribute nothing.  Tiny negative
    rounding residue is clamped to zero; the estimate is exactly symmetric
    in its arguments.
    """
    counts = contingency_table(x, y)
    value = _mi_bits_from_counts(counts)
    return DependencyScore(value, MeasureKind.MI, len(x))


def entropy(x: CategorySeries) -> DependencyScore:
    """Plug-in Shannon entropy in bits; zero for a constant series."""
    counts = np.bincount(x.values, minlength=x.n_categories)
    return DependencyScore(_entropy_bits_from_counts(counts), MeasureKind.ENTROPY, len(x))


def quantile_bins(
    x: RealSeries | np.ndarray, n_bins: int
) -> tuple[CategorySeries, tuple[float, ...]]:
    """Equal-frequency binning by rank.

    Ties are assigned to the lower bin deterministically: every occurrence
    of a value lands in the bin of that value's first occurrence in sorted
    order.  Bin labels are compacted so the output category count never
    exceeds the number of occupied bins.  Returns the binned series and the
    lower-edge values of bins 1..k-1 (the cut points).

    Raises :class:`DegenerateSeriesError` when fewer than two distinct
    values exist.
    """
    values = as_float_values(x)
    n = len(values)
    if n_bins < 2:
        raise ValueError("n_bins must be >= 2")
    if n < n_bins:
        raise ValueError("need at least n_bins samples")
    order = np.argsort(values, kind="stable")
    sorted_vals = values[order]
    run_start = np.empty(n, dtype=bool)
    run_start[0] = True
    run_start[1:] = sorted_vals[1:] != sorted_vals[:-1]
    if int(run_start.sum()) < 2:
        raise DegenerateSeriesError("fewer than two distinct values")
    raw = (np.arange(n, dtype=np.int64) * n_bins) // n
    first_pos = np.nonzero(run_start)[0]
    run_id = np.cumsum(run_start) - 1
    bins_sorted = raw[first_pos][run_id]
    occupied = np.unique(bins_sorted)
    labels_sorted = np.searchsorted(occupied, bins_sorted)
    codes = np.empty(n, dtype=np.int64)
    codes[order] = labels_sorted
    k = len(occupied)
    cuts = tuple(
        float(sorted_vals[np.nonzero(labels_sorted == i)[0][0]]) for i in range(1, k)
    )
    return CategorySeries(codes, k), cuts


def _is_constant(values: np.ndarray) -> bool:
    return bool(np.all(values == values[0]))


def _equipartition_cache(values: np.ndarray) -> dict[int, tuple[np.ndarray, int, tuple[float, ...]]]:
    """Lazily filled cache of quantile binnings keyed by requested bin count."""
    cache: dict[int, tuple[np.ndarray, int, tuple[float, ...]]] = {}
    return cache


def _equip_codes(
    values: np.ndarray,
    k: int,
    cache: dict[int, tuple[np.ndarray, int, tuple[float, ...]]],
) -> tuple[np.ndarray, int, tuple[float, ...]]:
    if k not in cache:
        series, cuts = quantile_bins(values, k)
        cache[k] = (series.values, series.n_categories, cuts)
    return cache[k]


def _counts_from_codes(xc: np.ndarray, kx: int, yc: np.ndarray, ky: int) -> np.ndarray:
    return np.bincount(xc * ky + yc, minlength=kx * ky).reshape(kx, ky)


def _rank_boundaries(values: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Sorted order plus the admissible interior cut positions.

    A cut may only fall between two distinct values, so grids remain pure
    functions of rank (ties can never be split across bins).
    """
    order = np.argsort(values, kind="stable")
    sorted_vals = values[order]
    interior = np.nonzero(sorted_vals[1:] != sorted_vals[:-1])[0] + 1
    return order, interior


def _partition_mi_best(
    x_values: np.ndarray, y_codes: np.ndarray, ky: int, n_bins: int
) -> tuple[Optional[float], Optional[tuple[float, ...]]]:
    """Best MI over all rank partitions of x into exactly ``n_bins`` bins.

    Dynamic program over admissible cut positions with the y binning held
    fixed; returns (best MI in bits, x cut values) or (None, None) when x
    has too few distinct values for that many bins.
    """
    n = len(x_values)
    order, interior = _rank_boundaries(x_values)
    pts = np.concatenate(([0], interior, [n]))
    if len(pts) - 1 < n_bins:
        return None, None
    sorted_vals = x_values[order]
    one_hot = np.zeros((n + 1, ky))
    one_hot[np.arange(1, n + 1), y_codes[order]] = 1.0
    prefix = np.cumsum(one_hot, axis=0)
    cum = prefix[pts]  # (Q, ky) class counts before each boundary
    marginal = cum[-1]  # fixed y marginals
    q = len(pts)

    def segment_scores(j: int, i_lo: int) -> np.ndarray:
        # I-contribution of segments (pts[i], pts[j]] for all i in [i_lo, j)
        counts = cum[j] - cum[i_lo:j]
        seg_n = counts.sum(axis=1, keepdims=True)
        with np.errstate(divide="ignore", invalid="ignore"):
            terms = np.where(
                counts > 0,
                (counts / n) * np.log2(counts * n / (seg_n * marginal)),
                0.0,
            )
        return terms.sum(axis=1)

    neg_inf = -np.inf
    f = np.full((n_bins + 1, q), neg_inf)
    back = np.zeros((n_bins + 1, q), dtype=np.int64)
    for j in range(1, q):
        f[1, j] = segment_scores(j, 0)[0]
    for k in range(2, n_bins + 1):
        for j in range(k, q):
            scores = f[k - 1, k - 1 : j] + segment_scores(j, k - 1)
            best = int(np.argmax(scores))
            f[k, j] = scores[best]
            back[k, j] = best + (k - 1)
    best_val = f[n_bins, q - 1]
    if not np.isfinite(best_val):
        return None, None
    # Backtrack the chosen boundaries for the reported cut points.
    cuts: list[float] = []
    j = q - 1
    for k in range(n_bins, 1, -1):
        j = int(back[k, j])
        cuts.append(float(sorted_vals[pts[j]]))
    cuts.reverse()
    return max(float(best_val), 0.0), tuple(cuts)


def _codes_from_cut_positions(
    order: np.ndarray, cut_positions: Sequence[int], n: int
) -> np.ndarray:
    codes = np.empty(n, dtype=np.int64)
    edges = np.concatenate(([0], np.asarray(cut_positions, dtype=np.int64), [n]))
    for b in range(len(edges) - 1):
        codes[order[edges[b] : edges[b + 1]]] = b
    return codes


def mic(
    x: Series | np.ndarray,
    y: Series | np.ndarray,
    params: MicSearchParams | None = None,
) -> DependencyScore:
    """Maximal information coefficient over admissible binning grids.

    For every admissible grid the binned mutual information is divided by
    ``log2(min(n_x, n_y))`` and the maximum ratio is returned, together
    with the winning bin layout.  Constant inputs score 0 by convention.

    Search modes: ``EQUIPARTITION`` evaluates equal-frequency grids only;
    ``AXIS_OPTIMIZED`` additionally optimizes the cut points on one axis
    (dynamic program over rank positions) while the other axis stays
    equipartitioned; ``EXHAUSTIVE`` enumerates every rank-cut grid and is
    only permitted for N <= 12.
    """
    if params is None:
        params = MicSearchParams()
    xv = as_float_values(x)
    yv = as_float_values(y)
    if len(xv) != len(yv):
        raise ValueError("series lengths differ")
    n = len(xv)
    if n < 4:
        raise ValueError("MIC requires at least 4 samples")
    if params.search_mode is MicSearchMode.EXHAUSTIVE and n > EXHAUSTIVE_MAX_SAMPLES:
        raise ValueError(
            f"exhaustive search is permitted only for N <= {EXHAUSTIVE_MAX_SAMPLES}"
        )
    if _is_constant(xv) or _is_constant(yv):
        return DependencyScore(0.0, MeasureKind.MIC, n, degenerate=True)

    pairs = params.admissible_pairs(n)
    x_cache = _equipartition_cache(xv)
    y_cache = _equipartition_cache(yv)

    best_value = 0.0
    best_layout: Optional[BinLayout] = None

    def consider(value: float, layout: BinLayout) -> None:
        nonlocal best_value, best_layout
        if value > best_value or best_layout is None:
            best_value = value
            best_layout = layout

    for nx, ny in pairs:
        xc, kx, xcuts = _equip_codes(xv, nx, x_cache)
        yc, ky, ycuts = _equip_codes(yv, ny, y_cache)
        mi_bits = _mi_bits_from_counts(_counts_from_codes(xc, kx, yc, ky))
        consider(mi_bits / math.log2(min(nx, ny)), BinLayout(nx, ny, xcuts, ycuts))

    if params.search_mode is MicSearchMode.AXIS_OPTIMIZED:
        for nx, ny in pairs:
            norm = math.log2(min(nx, ny))
            yc, ky, ycuts = _equip_codes(yv, ny, y_cache)
            mi_bits, xcuts = _partition_mi_best(xv, yc, ky, nx)
            if mi_bits is not None:
                consider(mi_bits / norm, BinLayout(nx, ny, xcuts, ycuts))
            xc, kx, xcuts_eq = _equip_codes(xv, nx, x_cache)
            mi_bits, ycuts_opt = _partition_mi_best(yv, xc, kx, ny)
            if mi_bits is not None:
                consider(mi_bits / norm, BinLayout(nx, ny, xcuts_eq, ycuts_opt))
    elif params.search_mode is MicSearchMode.EXHAUSTIVE:
        x_order, x_interior = _rank_boundaries(xv)
        y_order, y_interior = _rank_boundaries(yv)
        for nx, ny in pairs:
            norm = math.log2(min(nx, ny))
            for xpos in itertools.combinations(x_interior.tolist(), nx - 1):
                xc = _codes_from_cut_positions(x_order, xpos, n)
                for ypos in itertools.combinations(y_interior.tolist(), ny - 1):
                    yc = _codes_from_cut_positions(y_order, ypos, n)
                    mi_bits = _mi_bits_from_counts(_counts_from_codes(xc, nx, yc, ny))
                    sorted_x = xv[x_order]
                    sorted_y = yv[y_order]
                    layout = BinLayout(
                        nx,
                        ny,
                        tuple(float(sorted_x[p]) for p in xpos),
                        tuple(float(sorted_y[p]) for p in ypos),
                    )
                    consider(mi_bits / norm, layout)

    value = min(max(best_value, 0.0), 1.0)
    return DependencyScore(value, MeasureKind.MIC, n, bin_layout=best_layout)


def _pearson(xv: np.ndarray, yv: np.ndarray) -> float:
    xc = xv - xv.mean()
    yc = yv - yv.mean()
    sx = math.sqrt(float(xc @ xc))
    sy = math.sqrt(float(yc @ yc))
    if sx == 0.0 or sy == 0.0:
        raise DegenerateSeriesError("constant series has no defined correlation")
    r = float(xc @ yc) / (sx * sy)
    return min(max(r, -1.0), 1.0)


def linear_correlation(x: RealSeries | np.ndarray, y: RealSeries | np.ndarray) -> DependencyScore:
    """Pearson product-moment correlation in [-1, 1]."""
    xv = as_float_values(x)
    yv = as_float_values(y)
    if len(xv) != len(yv):
        raise ValueError("series lengths differ")
    if len(xv) < 2:
        raise ValueError("correlation requires at least 2 samples")
    return DependencyScore(_pearson(xv, yv), MeasureKind.LINEAR, len(xv))


def rank_correlation(x: RealSeries | np.ndarray, y: RealSeries | np.ndarray) -> DependencyScore:
    """Spearman correlation: Pearson on mid-ranks."""
    xv = as_float_values(x)
    yv = as_float_values(y)
    if len(xv) != len(yv):
        raise ValueError("series lengths differ")
    if len(xv) < 2:
        raise ValueError("correlation requires at least 2 samples")
    rx = scipy.stats.rankdata(xv, method="average")
    ry = scipy.stats.rankdata(yv, method="average")
    return DependencyScore(_pearson(rx, ry), MeasureKind.RANK, len(xv))


MeasureFn = Callable[[Series, Series], "DependencyScore | float"]


def _score_value(result: "DependencyScore | float") -> float:
    if isinstance(result, DependencyScore):
        return result.value
    return float(result)


def _with_values(series, values: np.ndarray):
    if isinstance(series, CategorySeries):
        return CategorySeries(values, series.n_categories)
    if isinstance(series, RealSeries):
        return RealSeries(values)
    return values


def permutation_pvalue(
    measure: MeasureFn,
    x: Series,
    y: Series,
    repetitions: int,
    seed: int,
) -> float:
    """Permutation p-value of ``measure(x, y)`` under shuffles of ``y``.

    ``p = (1 + #{permuted score >= observed}) / (repetitions + 1)``,
    deterministic for a given seed.
    """
    if repetitions < 20:
        raise ValueError("repetitions must be >= 20")
    observed = _score_value(measure(x, y))
    rng = np.random.default_rng(seed)
    y_values = np.asarray(y.values if isinstance(y, (CategorySeries, RealSeries)) else y)
    exceed = 0
    for _ in range(repetitions):
        shuffled = y_values[rng.permutation(len(y_values))]
        if _score_value(measure(x, _with_values(y, shuffled))) >= observed:
            exceed += 1
    return (1 + exceed) / (repetitions + 1)
