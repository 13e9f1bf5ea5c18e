"""Orthogonal Daubechies wavelet transform with periodized boundaries."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import DimensionError

# db4 in the 8-tap convention (four vanishing moments)
DB4 = np.array([
    -0.010597401784997278, 0.032883011666982945, 0.030841381835986965,
    -0.18703481171888114, -0.02798376941698385, 0.6308807679295904,
    0.7148465705525415, 0.23037781330885523,
])


def _filters(lowpass: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    k = len(lowpass)
    hi = lowpass[::-1] * (-1.0) ** (np.arange(k) + 1)
    return lowpass, hi


def _taps(half: int, k: int) -> np.ndarray:
    # periodic extension: coefficient i reads x[(2i + k/2 - j) mod n] for tap j
    n = 2 * half
    return (2 * np.arange(half)[:, None] + k // 2 - np.arange(k)[None, :]) % n


@dataclass
class WaveletDecomposition:
    details: list[np.ndarray]  # d1 (finest) .. dJ
    approx: np.ndarray

    @property
    def levels(self) -> int:
        return len(self.details)

    def detail(self, level: int) -> np.ndarray:
        return self.details[level - 1]


def _analysis_step(x: np.ndarray, lowpass: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    lo, hi = _filters(lowpass)
    win = x[_taps(len(x) // 2, len(lowpass))]
    return win @ lo, win @ hi


def _synthesis_step(a: np.ndarray, d: np.ndarray, lowpass: np.ndarray) -> np.ndarray:
    # the analysis step is orthogonal, so its transpose inverts it
    lo, hi = _filters(lowpass)
    out = np.zeros(2 * len(a))
    np.add.at(out, _taps(len(a), len(lowpass)), a[:, None] * lo + d[:, None] * hi)
    return out


def dwt(signal, levels: int = 7, lowpass: np.ndarray = DB4) -> WaveletDecomposition:
    """Multilevel decomposition; each level halves the length."""
    x = np.asarray(signal, dtype=np.float64)
    if x.ndim != 1:
        raise DimensionError("dwt expects a 1-D signal")
    if levels < 1 or len(x) % (2 ** levels):
        raise DimensionError(f"length {len(x)} is not divisible by 2**{levels}")
    details = []
    for _ in range(levels):
        x, d = _analysis_step(x, lowpass)
        details.append(d)
    return WaveletDecomposition(details, x)


def idwt(dec: WaveletDecomposition, lowpass: np.ndarray = DB4) -> np.ndarray:
    a = dec.approx
    for d in reversed(dec.details):
        if len(d) != len(a):
            raise DimensionError("coefficient lengths do not follow the halving cascade")
        a = _synthesis_step(a, d, lowpass)
    return a
