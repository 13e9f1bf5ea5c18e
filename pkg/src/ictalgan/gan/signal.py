"""Conversion between two-channel windows and the generator's flat 1-channel layout.

Electrodes are laid end to end (F7T3 then F8T4). A model with a shorter
``input_length`` sees each channel decimated by a polyphase anti-aliasing
filter, and its output is interpolated back up the same way, so a reduced
model works on a band-limited copy of the signal instead of adding
interpolation artifacts above the reduced Nyquist frequency.
"""

from __future__ import annotations

import numpy as np
from scipy.signal import resample_poly

from ..errors import DimensionError


def to_generator_input(values: np.ndarray, input_length: int) -> np.ndarray:
    values = np.asarray(values, dtype=np.float32)
    n_ch, points = values.shape
    per_channel = input_length // n_ch
    if input_length % n_ch or points % per_channel:
        raise DimensionError(f"cannot map {values.shape} onto input length {input_length}")
    factor = points // per_channel
    if factor > 1:
        values = resample_poly(values.astype(np.float64), 1, factor, axis=1, padtype="line")
    return values.reshape(-1).astype(np.float32)


def from_generator_output(flat: np.ndarray, points: int, n_channels: int = 2) -> np.ndarray:
    flat = np.asarray(flat, dtype=np.float32).reshape(n_channels, -1)
    per_channel = flat.shape[1]
    if per_channel == points:
        return flat.copy()
    if points % per_channel:
        raise DimensionError(f"cannot expand {per_channel} points to {points}")
    up = resample_poly(flat.astype(np.float64), points // per_channel, 1, axis=1, padtype="line")
    # the generator's tanh head bounds its output; keep the interpolated copy inside [-1, 1]
    return np.clip(up, -1.0, 1.0).astype(np.float32)


def high_band_residual(values: np.ndarray, input_length: int) -> np.ndarray:
    """The part of ``values`` a reduced-length model cannot represent (zero at full length)."""
    values = np.asarray(values, dtype=np.float32)
    low = from_generator_output(to_generator_input(values, input_length), values.shape[1],
                                values.shape[0])
    if low.shape == values.shape and input_length // values.shape[0] == values.shape[1]:
        return np.zeros_like(values)
    return (values - low).astype(np.float32)
