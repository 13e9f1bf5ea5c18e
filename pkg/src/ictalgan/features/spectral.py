"""Welch band powers."""

from __future__ import annotations

import numpy as np
from scipy.signal import welch

from ..data.types import SAMPLE_RATE
from ..errors import ConfigError

SEGMENT = 256

# name -> [lo, hi) in Hz
BANDS: dict[str, tuple[float, float]] = {
    "delta": (0.5, 4.0),
    "theta": (4.0, 8.0),
    "alpha": (8.0, 12.0),
    "beta": (13.0, 30.0),
    "gamma": (30.0, 45.0),
    "0-0.1hz": (0.0, 0.1),
    "0.1-0.5hz": (0.1, 0.5),
    "12-13hz": (12.0, 13.0),
}
CANONICAL_BANDS = ("delta", "theta", "alpha", "beta", "gamma")


def power_spectrum(signal, sample_rate: int = SAMPLE_RATE) -> tuple[np.ndarray, np.ndarray]:
    """One-sided Welch density: 256-point Hamming segments, half overlap, no detrending."""
    x = np.asarray(signal, dtype=np.float64)
    nperseg = min(SEGMENT, len(x))
    return welch(x, fs=sample_rate, window="hamming", nperseg=nperseg, noverlap=nperseg // 2,
                 detrend=False, scaling="density")


def _integrate(freqs: np.ndarray, psd: np.ndarray, lo: float, hi: float) -> float:
    df = freqs[1] - freqs[0]
    mask = (freqs >= lo) & (freqs < hi)
    return float(psd[mask].sum() * df)


def total_power(freqs: np.ndarray, psd: np.ndarray) -> float:
    return float(psd.sum() * (freqs[1] - freqs[0]))


def band_power(signal, band: tuple[float, float], sample_rate: int = SAMPLE_RATE
               ) -> tuple[float, float]:
    """(absolute, relative) power in ``band``; bins with lo <= f < hi count."""
    lo, hi = band
    if not 0.0 <= lo < hi <= sample_rate / 2:
        raise ConfigError(f"band {band} outside [0, {sample_rate / 2}] Hz")
    freqs, psd = power_spectrum(signal, sample_rate)
    absolute = _integrate(freqs, psd, lo, hi)
    total = total_power(freqs, psd)
    return absolute, (absolute / total if total > 0 else 0.0)


def band_powers(signal, sample_rate: int = SAMPLE_RATE) -> tuple[float, dict[str, tuple[float, float]]]:
    """Total power plus (absolute, relative) for every band in :data:`BANDS`."""
    freqs, psd = power_spectrum(signal, sample_rate)
    total = total_power(freqs, psd)
    out = {}
    for name, (lo, hi) in BANDS.items():
        a = _integrate(freqs, psd, lo, hi)
        out[name] = (a, a / total if total > 0 else 0.0)
    return total, out
