"""Two-sided Wilcoxon signed-rank test."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.stats import rankdata

log = logging.getLogger(__name__)

EXACT_MAX_N = 25
MIN_NONZERO = 6


@dataclass(frozen=True)
class WilcoxonResult:
    statistic: float  # min(W+, W-)
    p_value: float
    n: int  # non-zero differences used
    method: str  # "exact", "normal" or "degenerate"


def _exact_upper_tail(doubled_ranks: np.ndarray, w_plus2: int) -> tuple[float, float]:
    """P(W+ <= w) and P(W+ >= w) under random signs, ranks given as 2*rank integers."""
    total = int(doubled_ranks.sum())
    dist = np.zeros(total + 1)
    dist[0] = 1.0
    for r in doubled_ranks:
        shifted = np.zeros_like(dist)
        shifted[r:] = dist[:total + 1 - r]
        dist = 0.5 * (dist + shifted)
    return float(dist[: w_plus2 + 1].sum()), float(dist[w_plus2:].sum())


def signed_rank_sums(differences: Sequence[float]) -> tuple[float, float, np.ndarray]:
    d = np.asarray(differences, dtype=np.float64)
    d = d[d != 0]
    ranks = rankdata(np.abs(d))  # average ranks on ties
    return float(ranks[d > 0].sum()), float(ranks[d < 0].sum()), ranks


def wilcoxon_signed_rank(differences: Sequence[float], method: str = "auto") -> WilcoxonResult:
    """Zeros are dropped and tied magnitudes share their average rank.

    ``auto`` enumerates the sign distribution exactly for n <= 25 and otherwise
    uses the normal approximation with tie and continuity corrections.
    """
    if method not in ("auto", "exact", "normal"):
        raise ValueError(f"unknown method {method!r}")
    w_plus, w_minus, ranks = signed_rank_sums(differences)
    n = len(ranks)
    if n == 0:
        return WilcoxonResult(0.0, 1.0, 0, "degenerate")
    if n < MIN_NONZERO:
        log.warning("only %d non-zero differences; the test has little power", n)
    stat = min(w_plus, w_minus)
    if method == "exact" or (method == "auto" and n <= EXACT_MAX_N):
        doubled = np.rint(2 * ranks).astype(np.int64)
        lower, upper = _exact_upper_tail(doubled, int(round(2 * w_plus)))
        return WilcoxonResult(stat, min(1.0, 2.0 * min(lower, upper)), n, "exact")
    mean = n * (n + 1) / 4.0
    _, tie_counts = np.unique(ranks, return_counts=True)
    var = n * (n + 1) * (2 * n + 1) / 24.0 - float((tie_counts ** 3 - tie_counts).sum()) / 48.0
    if var <= 0:
        return WilcoxonResult(stat, 1.0, n, "degenerate")
    z = max(abs(w_plus - mean) - 0.5, 0.0) / math.sqrt(var)
    return WilcoxonResult(stat, min(1.0, math.erfc(z / math.sqrt(2.0))), n, "normal")
