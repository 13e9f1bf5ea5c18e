"""Sample, permutation and histogram entropies."""

from __future__ import annotations

import math
import warnings

import numpy as np

HIST_BINS = 10


class FeatureWarning(UserWarning):
    """A feature fell back to a defined value on degenerate input."""


def sample_entropy_cap(n: int, m: int = 2) -> float:
    """Value returned when no template pairs match: -ln(2 / ((n-m-1)(n-m)))."""
    return -math.log(2.0 / ((n - m - 1) * (n - m)))


def _tolerance(x: np.ndarray, k: float) -> float:
    return k * float(np.std(x))


def sample_entropy(series, k: float = 0.2, m: int = 2) -> float:
    """-ln(A/B) over template pairs within Chebyshev distance ``k * std``.

    B counts matching length-``m`` template pairs and A matching length-(m+1)
    pairs, both over the first N-m start positions, self-matches excluded.
    A match is distance <= r, so a constant series gives 0.
    """
    x = np.asarray(series, dtype=np.float64)
    n = len(x)
    if n <= m + 1:
        warnings.warn(f"series of length {n} too short for sample entropy", FeatureWarning,
                      stacklevel=2)
        return sample_entropy_cap(max(n, m + 3), m)
    r = _tolerance(x, k)
    count_a = count_b = 0
    last = n - m  # number of template start positions
    for lag in range(1, last):
        close = np.abs(x[: n - lag] - x[lag:]) <= r
        # close[i] says x[i] and x[i + lag] agree; a template match needs m (or m+1) in a row
        run = close[: last - lag].copy()
        for j in range(1, m):
            run &= close[j: j + last - lag]
        count_b += int(run.sum())
        count_a += int((run & close[m: m + last - lag]).sum())
    if count_a == 0 or count_b == 0:
        warnings.warn("no matching templates, sample entropy capped", FeatureWarning,
                      stacklevel=2)
        return sample_entropy_cap(n, m)
    return 0.0 - math.log(count_a / count_b)


def sample_entropy_reference(series, k: float = 0.2, m: int = 2) -> float:
    """Direct template-by-template count; quadratic and slow, kept as an oracle."""
    x = np.asarray(series, dtype=np.float64)
    n = len(x)
    if n <= m + 1:
        return sample_entropy_cap(max(n, m + 3), m)
    r = _tolerance(x, k)
    last = n - m
    count_a = count_b = 0
    for i in range(last - 1):
        # distance from template i to every later template j
        d = np.zeros(last - i - 1)
        for t in range(m):
            d = np.maximum(d, np.abs(x[i + t] - x[i + 1 + t: last + t]))
        match_m = d <= r
        count_b += int(match_m.sum())
        count_a += int((match_m & (np.abs(x[i + m] - x[i + 1 + m: last + m]) <= r)).sum())
    if count_a == 0 or count_b == 0:
        return sample_entropy_cap(n, m)
    return 0.0 - math.log(count_a / count_b)


def permutation_entropy(series, order: int = 3, delay: int = 1, normalize: bool = True) -> float:
    """Shannon entropy of ordinal patterns; equal values rank by position."""
    x = np.asarray(series, dtype=np.float64)
    span = (order - 1) * delay
    if len(x) <= span:
        warnings.warn(f"series of length {len(x)} too short for order {order}", FeatureWarning,
                      stacklevel=2)
        return 0.0
    windows = np.lib.stride_tricks.sliding_window_view(x, span + 1)[:, ::delay]
    ranks = np.argsort(windows, axis=1, kind="stable")
    codes = ranks @ (order ** np.arange(order))
    _, counts = np.unique(codes, return_counts=True)
    p = counts / counts.sum()
    h = 0.0 - float((p * np.log(p)).sum())
    if normalize:
        h /= math.log(math.factorial(order))
    return min(max(h, 0.0), 1.0) if normalize else max(h, 0.0)


def histogram_probabilities(series, bins: int = HIST_BINS) -> np.ndarray:
    x = np.asarray(series, dtype=np.float64)
    if x.size == 0:
        raise ValueError("empty series")
    lo, hi = float(x.min()), float(x.max())
    if hi == lo:
        p = np.zeros(bins)
        p[0] = 1.0
        return p
    idx = np.floor((x - lo) / (hi - lo) * bins).astype(int)
    idx = np.clip(idx, 0, bins - 1)
    return np.bincount(idx, minlength=bins) / x.size


def distribution_entropies(series, bins: int = HIST_BINS) -> tuple[float, float, float]:
    """(Shannon, Renyi order 2, Tsallis order 2) of the binned amplitude distribution."""
    p = histogram_probabilities(series, bins)
    nz = p[p > 0]
    shannon = 0.0 - float((nz * np.log(nz)).sum())
    collision = float((p * p).sum())
    return max(shannon, 0.0), max(0.0 - math.log(collision), 0.0), 1.0 - collision
