"""Sampling synthetic ictal windows from a trained generator."""

from __future__ import annotations

import logging
from typing import Sequence

import numpy as np

from ..data.types import ICTAL, INTERICTAL, SYNTHETIC, EegSample
from ..errors import DimensionError, UsageError
from ..tensor import Tensor, no_record
from .model import Generator
from .signal import from_generator_output, high_band_residual, to_generator_input

log = logging.getLogger(__name__)


def generate(interictal: EegSample, noise: Tensor | np.ndarray, generator: Generator) -> EegSample:
    """Translate one inter-ictal window into a synthetic ictal window."""
    return generate_batch([interictal], np.asarray(getattr(noise, "data", noise))[None], generator)[0]


def generate_batch(inputs: Sequence[EegSample], noise: np.ndarray,
                   generator: Generator) -> list[EegSample]:
    arch = generator.arch
    if noise.shape != (len(inputs),) + arch.latent_shape:
        raise DimensionError(f"noise must have shape {(len(inputs),) + arch.latent_shape}, "
                             f"got {noise.shape}")
    for s in inputs:
        if s.label != INTERICTAL:
            raise UsageError("generator inputs must be inter-ictal windows")
    x = np.stack([to_generator_input(s.values, arch.input_length) for s in inputs])[:, None, :]
    with no_record():
        out = generator(Tensor(x), Tensor(noise)).data
    samples = []
    for s, flat in zip(inputs, out):
        values = from_generator_output(flat[0], s.values.shape[1])
        if arch.input_length < s.values.size:
            # a reduced-rate model translates the low band only; the rest is carried over
            values = np.clip(values + high_band_residual(s.values, arch.input_length), -1.0, 1.0)
        samples.append(EegSample(values, ICTAL, s.patient_id, origin=SYNTHETIC,
                                 recording_id=s.recording_id, window_start=s.window_start,
                                 sample_rate=s.sample_rate))
    return samples


def synthesize_set(generator: Generator, pool: Sequence[EegSample], count: int,
                   seed: int = 0, batch_size: int = 64) -> list[EegSample]:
    """Draw ``count`` inputs from ``pool`` (with replacement when needed) and translate them.

    Every output gets fresh noise and keeps the patient id of its input.
    """
    if not pool:
        raise UsageError("inter-ictal pool is empty")
    if count < 1:
        raise UsageError("count must be >= 1")
    rng = np.random.default_rng(seed)
    replace = count > len(pool)
    if replace:
        log.warning("drawing %d inputs from a pool of %d with replacement", count, len(pool))
    idx = rng.choice(len(pool), size=count, replace=replace)
    out: list[EegSample] = []
    for start in range(0, count, batch_size):
        chunk = [pool[i] for i in idx[start:start + batch_size]]
        noise = rng.standard_normal((len(chunk),) + generator.arch.latent_shape).astype(np.float32)
        out.extend(generate_batch(chunk, noise, generator))
    return out
