"""The 54-per-electrode feature vector and its CSV form."""

from __future__ import annotations

import csv
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from ..data.types import CHANNELS, EegSample
from ..errors import ConfigError
from .entropy import distribution_entropies, permutation_entropy, sample_entropy
from .spectral import BANDS, band_powers
from .wavelet import WaveletDecomposition, dwt, idwt

LEVELS = 7
SAMPEN_LEVELS = (6, 7)
SAMPEN_K = (0.2, 0.35)
PERMEN_LEVELS = (3, 4, 5, 6, 7)
PERMEN_ORDERS = (3, 5, 7)
DIST_SOURCES = ("d3", "d4", "d5", "d6", "d7", "raw")
DIST_KINDS = ("shannon", "renyi", "tsallis")
SUBBAND_MODES = ("coefficients", "reconstructed")
META_COLUMNS = ("patient_id", "recording_id", "window_start", "label", "origin")


def electrode_feature_names() -> list[str]:
    names = [f"sampen_d{lv}_k{k:.2f}" for lv in SAMPEN_LEVELS for k in SAMPEN_K]
    names += [f"permen_d{lv}_n{n}" for lv in PERMEN_LEVELS for n in PERMEN_ORDERS]
    names += [f"{kind}_{src}" for src in DIST_SOURCES for kind in DIST_KINDS]
    names.append("power_total")
    for band in BANDS:
        names += [f"power_{band}_abs", f"power_{band}_rel"]
    return names


def feature_names(channels: Sequence[str] = CHANNELS) -> list[str]:
    return [f"{ch}.{name}" for ch in channels for name in electrode_feature_names()]


FEATURE_NAMES = tuple(feature_names())


def _subbands(x: np.ndarray, mode: str) -> dict[int, np.ndarray]:
    dec = dwt(x, LEVELS)
    if mode == "coefficients":
        return {lv: dec.detail(lv) for lv in range(1, LEVELS + 1)}
    out = {}
    for lv in range(1, LEVELS + 1):
        only = WaveletDecomposition(
            [d if i == lv - 1 else np.zeros_like(d) for i, d in enumerate(dec.details)],
            np.zeros_like(dec.approx))
        out[lv] = idwt(only)
    return out


def electrode_features(x: np.ndarray, subband: str = "coefficients") -> list[float]:
    if subband not in SUBBAND_MODES:
        raise ConfigError(f"subband must be one of {SUBBAND_MODES}, got {subband!r}")
    x = np.asarray(x, dtype=np.float64)
    bands = _subbands(x, subband)
    values = [sample_entropy(bands[lv], k) for lv in SAMPEN_LEVELS for k in SAMPEN_K]
    values += [permutation_entropy(bands[lv], n) for lv in PERMEN_LEVELS for n in PERMEN_ORDERS]
    for src in DIST_SOURCES:
        values += distribution_entropies(x if src == "raw" else bands[int(src[1:])])
    total, powers = band_powers(x)
    values.append(total)
    for band in BANDS:
        values += powers[band]
    return values


def extract_features(sample: EegSample | np.ndarray, subband: str = "coefficients") -> np.ndarray:
    """108 features in :data:`FEATURE_NAMES` order for one 2-channel window."""
    values = sample.values if isinstance(sample, EegSample) else np.asarray(sample)
    if values.ndim != 2 or values.shape[0] != len(CHANNELS):
        raise ValueError(f"expected ({len(CHANNELS)}, N) channel data, got {values.shape}")
    out = np.array([v for ch in values for v in electrode_features(ch, subband)])
    if not np.all(np.isfinite(out)):
        raise FloatingPointError("non-finite feature value")
    return out


def feature_matrix(samples: Iterable[EegSample], subband: str = "coefficients") -> np.ndarray:
    rows = [extract_features(s, subband) for s in samples]
    if not rows:
        return np.zeros((0, len(FEATURE_NAMES)))
    return np.stack(rows)


def write_feature_csv(path: str | Path, samples: Sequence[EegSample], matrix: np.ndarray) -> None:
    """Header row of metadata then feature names, one row per sample."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(list(META_COLUMNS) + list(FEATURE_NAMES))
        for s, row in zip(samples, matrix):
            w.writerow([s.patient_id, s.recording_id, repr(float(s.window_start)), s.label,
                        s.origin] + [repr(float(v)) for v in row])
