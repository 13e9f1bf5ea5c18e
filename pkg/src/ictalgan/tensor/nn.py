"""1-D convolution, pooling and dense layers with hand-written gradients.

Inputs are ``(C, L)`` or batched ``(B, C, L)``. Convolutions are unbiased
cross-correlations with zero "same" padding, so at stride 1 the output length
equals the input length; a stride ``s`` keeps every ``s``-th output position.
"""

from __future__ import annotations

import numpy as np
import scipy.fft as sfft
from numpy.lib.stride_tricks import sliding_window_view

from ..errors import ConfigError, DimensionError
from .engine import Tensor, record

# maps at least this many kernel spans long are correlated via FFT
FFT_MIN_RATIO = 4


def _batched(x: np.ndarray) -> tuple[np.ndarray, bool]:
    if x.ndim == 2:
        return x[None], True
    if x.ndim == 3:
        return x, False
    raise DimensionError(f"expected (C, L) or (B, C, L) input, got shape {x.shape}")


class _Spectra:
    """Forward FFT of a same-padded correlation, kept for the weight gradient."""

    def __init__(self, x: np.ndarray, k: int, dilation: int):
        self.length = x.shape[2]
        self.span = dilation * (k - 1) + 1
        self.pad = (self.span - 1) // 2
        self.k = k
        self.dilation = dilation
        self.nfft = sfft.next_fast_len(self.length + self.span - 1, real=True)
        self.x_hat = sfft.rfft(x, self.nfft, axis=2)

    def _dilated(self, w: np.ndarray) -> np.ndarray:
        if self.dilation == 1:
            return w
        wd = np.zeros(w.shape[:2] + (self.span,), dtype=w.dtype)
        wd[:, :, ::self.dilation] = w
        return wd

    def correlate(self, w: np.ndarray) -> np.ndarray:
        w_hat = sfft.rfft(self._dilated(w)[:, :, ::-1], self.nfft, axis=2)
        y_hat = np.matmul(self.x_hat.transpose(2, 0, 1), w_hat.transpose(2, 1, 0))
        y = sfft.irfft(y_hat.transpose(1, 2, 0), self.nfft, axis=2)
        start = self.span - 1 - self.pad
        return np.ascontiguousarray(y[:, :, start:start + self.length])

    def weight_grad(self, g: np.ndarray) -> np.ndarray:
        """dW[o, c, k] = sum_{b, l} g[b, o, l] * x[b, c, l + d*k - pad]."""
        g_hat = sfft.rfft(g, self.nfft, axis=2)
        r_hat = np.matmul(np.conj(g_hat).transpose(2, 1, 0), self.x_hat.transpose(2, 0, 1))
        r = sfft.irfft(r_hat.transpose(1, 2, 0), self.nfft, axis=2)
        lags = (self.dilation * np.arange(self.k) - self.pad) % self.nfft
        return np.ascontiguousarray(r[:, :, lags])


class _Columns:
    """im2col form of the same correlation; cheaper than FFT for short maps."""

    def __init__(self, x: np.ndarray, k: int, dilation: int):
        b, c, length = x.shape
        span = dilation * (k - 1) + 1
        pad = (span - 1) // 2
        xp = np.pad(x, ((0, 0), (0, 0), (pad, pad)))
        win = sliding_window_view(xp, span, axis=2)[..., ::dilation]
        self.shape = (b, length)
        self.kernel_shape = (c, k)
        self.cols = np.ascontiguousarray(win.transpose(0, 2, 1, 3)).reshape(b * length, c * k)

    def correlate(self, w: np.ndarray) -> np.ndarray:
        b, length = self.shape
        out = self.cols @ w.reshape(w.shape[0], -1).T
        return np.ascontiguousarray(out.reshape(b, length, -1).transpose(0, 2, 1))

    def weight_grad(self, g: np.ndarray) -> np.ndarray:
        o = g.shape[1]
        gm = g.transpose(1, 0, 2).reshape(o, -1)
        return (gm @ self.cols).reshape((o,) + self.kernel_shape)


def _correlate(x: np.ndarray, w: np.ndarray, dilation: int):
    k = w.shape[2]
    span = dilation * (k - 1) + 1
    if x.shape[2] >= FFT_MIN_RATIO * span:
        spec = _Spectra(x, k, dilation)
    else:
        spec = _Columns(x, k, dilation)
    return spec.correlate(w), spec


def _flip_t(w: np.ndarray) -> np.ndarray:
    return np.ascontiguousarray(w.transpose(1, 0, 2)[:, :, ::-1])


def _check_kernel(w: np.ndarray, c_in: int, axis: int) -> None:
    if w.ndim != 3:
        raise DimensionError(f"kernel must be 3-D, got shape {w.shape}")
    if w.shape[2] % 2 == 0:
        raise ConfigError(f"kernel length must be odd, got {w.shape[2]}")
    if w.shape[axis] != c_in:
        raise DimensionError(f"input has {c_in} channels but kernel {w.shape} expects {w.shape[axis]}")


def conv1d(x: Tensor, weight: Tensor, stride: int = 1, dilation: int = 1) -> Tensor:
    """Cross-correlate ``x`` with ``weight`` of shape (C_out, C_in, K)."""
    xb, squeeze = _batched(x.data)
    w = weight.data
    _check_kernel(w, xb.shape[1], axis=1)
    if stride < 1 or dilation < 1:
        raise ConfigError("stride and dilation must be >= 1")
    length = xb.shape[2]
    if length % stride:
        raise DimensionError(f"length {length} not divisible by stride {stride}")
    full, spec = _correlate(xb, w, dilation)
    out = full[:, :, ::stride]

    def back(g):
        g = g[None] if squeeze else g
        if stride > 1:
            up = np.zeros(full.shape, dtype=g.dtype)
            up[:, :, ::stride] = g
            g = up
        gx = gw = None
        if x.requires_grad:
            gx, _ = _correlate(g, _flip_t(w), dilation)
            gx = (gx[0] if squeeze else gx).astype(x.dtype, copy=False)
        if weight.requires_grad:
            gw = spec.weight_grad(g).astype(w.dtype, copy=False)
        return gx, gw

    out = np.ascontiguousarray(out, dtype=xb.dtype)
    return record("conv1d", out[0] if squeeze else out, (x, weight), back)


def transposed_conv1d(x: Tensor, weight: Tensor, stride: int = 1, dilation: int = 1) -> Tensor:
    """Adjoint of :func:`conv1d` with the same ``weight``, stride and dilation.

    ``weight`` has shape (C_in, C_out, K) where C_in matches ``x``; the output
    has C_out channels and ``stride`` times the input length.
    """
    xb, squeeze = _batched(x.data)
    w = weight.data
    _check_kernel(w, xb.shape[1], axis=0)
    if stride < 1 or dilation < 1:
        raise ConfigError("stride and dilation must be >= 1")
    b, c, length = xb.shape
    up = np.zeros((b, c, length * stride), dtype=xb.dtype)
    up[:, :, ::stride] = xb
    wf = _flip_t(w)
    out, spec = _correlate(up, wf, dilation)

    def back(g):
        g = g[None] if squeeze else g
        gx = gw = None
        if x.requires_grad:
            gup, _ = _correlate(g, w, dilation)
            gx = np.ascontiguousarray(gup[:, :, ::stride]).astype(x.dtype, copy=False)
            gx = gx[0] if squeeze else gx
        if weight.requires_grad:
            gw = _flip_t(spec.weight_grad(g)).astype(w.dtype, copy=False)
        return gx, gw

    out = out.astype(xb.dtype, copy=False)
    return record("transposed_conv1d", out[0] if squeeze else out, (x, weight), back)


def maxpool1d(x: Tensor) -> Tensor:
    """Non-overlapping max over windows of two; ties route the gradient to the first."""
    xb, squeeze = _batched(x.data)
    b, c, length = xb.shape
    if length % 2:
        raise DimensionError(f"maxpool1d needs an even length, got {length}")
    win = xb.reshape(b, c, length // 2, 2)
    idx = np.argmax(win, axis=3)
    out = np.take_along_axis(win, idx[..., None], axis=3)[..., 0]

    def back(g):
        g = g[None] if squeeze else g
        gx = np.zeros((b, c, length // 2, 2), dtype=g.dtype)
        np.put_along_axis(gx, idx[..., None], g[..., None], axis=3)
        gx = gx.reshape(b, c, length)
        return (gx[0] if squeeze else gx,)

    return record("maxpool1d", out[0] if squeeze else out, (x,), back)


def dense(x: Tensor, weight: Tensor, bias: Tensor | None = None) -> Tensor:
    """Affine map ``weight @ x + bias`` for ``x`` of shape (N,) or (B, N)."""
    w = weight.data
    if w.ndim != 2 or x.shape[-1] != w.shape[1]:
        raise DimensionError(f"dense: input {x.shape} does not match weight {w.shape}")
    if bias is not None and bias.shape != (w.shape[0],):
        raise DimensionError(f"dense: bias {bias.shape} does not match weight {w.shape}")
    out = x.data @ w.T
    if bias is not None:
        out = out + bias.data
    inputs = (x, weight) if bias is None else (x, weight, bias)

    def back(g):
        gx = g @ w
        gw = np.outer(g, x.data) if g.ndim == 1 else g.T @ x.data
        grads = [gx, gw]
        if bias is not None:
            grads.append(g if g.ndim == 1 else g.sum(axis=0))
        return grads

    return record("dense", out, inputs, back)
