"""Spectral normalization and virtual batch normalization."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import DimensionError, StateError
from .engine import Tensor, reshape, sqrt, sum_

SIGMA_FLOOR = 1e-12


@dataclass
class SpectralNormState:
    """Persistent power-iteration vectors for one weight.

    ``u`` lives in the output-channel space, ``v`` in the flattened fan-in space.
    """

    u: np.ndarray
    v: np.ndarray

    @classmethod
    def init(cls, shape: tuple[int, ...], rng: np.random.Generator) -> "SpectralNormState":
        rows = shape[0]
        cols = int(np.prod(shape[1:]))
        u = rng.standard_normal(rows)
        v = rng.standard_normal(cols)
        return cls(u / np.linalg.norm(u), v / np.linalg.norm(v))

    @classmethod
    def for_weight(cls, weight: np.ndarray, rng: np.random.Generator,
                   warmup: int = 30) -> "SpectralNormState":
        """Random start refined on ``weight`` so the first estimate is already sound."""
        state = cls.init(weight.shape, rng)
        power_iterate(weight.reshape(weight.shape[0], -1), state, warmup)
        return state


def _unit(x: np.ndarray) -> np.ndarray:
    n = np.linalg.norm(x)
    return x / n if n > 0 else x


def power_iterate(matrix: np.ndarray, state: SpectralNormState, iters: int) -> float:
    """Refine ``state`` in place and return the top singular value estimate."""
    m = np.asarray(matrix, dtype=np.float64)
    u, v = state.u, state.v
    for _ in range(iters):
        v = _unit(m.T @ u)
        u = _unit(m @ v)
    state.u, state.v = u, v
    return float(u @ m @ v)


def spectral_normalize(weight: Tensor, state: SpectralNormState, iters: int = 1,
                       update: bool = True) -> Tensor:
    """Divide ``weight`` by its estimated largest singular value.

    The weight is viewed as a matrix with the first axis as rows. With
    ``update=False`` the stored vectors are used as-is (needed for finite
    difference checks, where repeated evaluations must see the same state).
    The estimate ``u^T W v`` is differentiated with ``u`` and ``v`` held fixed.
    """
    if weight.ndim < 2:
        raise DimensionError("spectral_normalize needs a weight with at least 2 axes")
    rows = weight.shape[0]
    mat = weight.data.reshape(rows, -1)
    if state.u.shape != (rows,) or state.v.shape != (mat.shape[1],):
        raise DimensionError(f"spectral-norm state does not match weight shape {weight.shape}")
    if update:
        if iters < 1:
            raise ValueError("iters must be >= 1")
        sigma = power_iterate(mat, state, iters)
    else:
        sigma = float(state.u @ mat.astype(np.float64) @ state.v)
    if not abs(sigma) > SIGMA_FLOOR:
        return weight
    outer = Tensor(np.outer(state.u, state.v), dtype=weight.dtype)
    sigma_t = sum_(reshape(weight, mat.shape) * outer)
    return weight / sigma_t


@dataclass
class VbnState:
    """Frozen reference statistics for each normalized layer.

    Before :meth:`freeze`, calling :func:`virtual_batch_norm` with
    ``collect=True`` records the statistics of the batch it sees.
    """

    means: dict[str, np.ndarray] = field(default_factory=dict)
    sq_means: dict[str, np.ndarray] = field(default_factory=dict)
    ref_size: int = 0
    frozen: bool = False

    def freeze(self) -> None:
        if not self.means:
            raise StateError("no reference statistics collected")
        self.frozen = True

    def variance(self, layer: str) -> np.ndarray:
        return np.maximum(self.sq_means[layer] - self.means[layer] ** 2, 0.0)


def virtual_batch_norm(x: Tensor, state: VbnState, layer: str, gain: Tensor, shift: Tensor,
                       eps: float = 1e-5, collect: bool = False) -> Tensor:
    """Normalize each example of ``x`` (B, C, L) against reference plus itself.

    Per channel, the statistics are the reference batch moments weighted by
    N/(N+1) combined with the example's own moments weighted by 1/(N+1).
    In ``collect`` mode the batch becomes the reference for ``layer`` and is
    normalized by its own statistics.
    """
    if x.ndim != 3:
        raise DimensionError(f"virtual_batch_norm expects (B, C, L), got {x.shape}")
    g = reshape(gain, (1, -1, 1))
    s = reshape(shift, (1, -1, 1))
    if collect:
        if state.frozen:
            raise StateError("VBN reference statistics are frozen")
        data = x.data.astype(np.float64)
        state.means[layer] = data.mean(axis=(0, 2))
        state.sq_means[layer] = (data * data).mean(axis=(0, 2))
        state.ref_size = x.shape[0]
        mu = Tensor(state.means[layer].reshape(1, -1, 1), dtype=x.dtype)
        var = Tensor(state.variance(layer).reshape(1, -1, 1), dtype=x.dtype)
        return (x - mu) / sqrt(var + eps) * g + s
    if not state.frozen:
        raise StateError("virtual_batch_norm used before the reference batch was frozen")
    if layer not in state.means:
        raise StateError(f"no reference statistics for layer {layer!r}")
    n = state.ref_size
    a = n / (n + 1.0)
    ref_mu = Tensor((a * state.means[layer]).reshape(1, -1, 1), dtype=x.dtype)
    ref_sq = Tensor((a * state.sq_means[layer]).reshape(1, -1, 1), dtype=x.dtype)
    own_mu = x.mean(axis=2, keepdims=True)
    own_sq = (x * x).mean(axis=2, keepdims=True)
    mu = ref_mu + own_mu * (1.0 - a)
    sq = ref_sq + own_sq * (1.0 - a)
    var = sq - mu * mu
    return (x - mu) / sqrt(var + eps) * g + s
