"""Central finite-difference gradient checking."""

from __future__ import annotations

from typing import Callable, Sequence

import numpy as np

from .engine import Tape, Tensor, backward


def numeric_grad(fn: Callable[[], Tensor], tensor: Tensor, eps: float = 1e-6,
                 indices: Sequence[int] | None = None) -> np.ndarray:
    """Finite-difference gradient of scalar ``fn()`` w.r.t. ``tensor.data``.

    Only flat positions in ``indices`` are perturbed (all when None); the
    others are left at zero in the returned array.
    """
    flat = tensor.data.reshape(-1)
    grad = np.zeros(flat.shape, dtype=np.float64)
    positions = range(flat.size) if indices is None else indices
    for i in positions:
        orig = flat[i]
        flat[i] = orig + eps
        hi = float(fn().data)
        flat[i] = orig - eps
        lo = float(fn().data)
        flat[i] = orig
        grad[i] = (hi - lo) / (2 * eps)
    return grad.reshape(tensor.shape)


def analytic_grads(fn: Callable[[], Tensor], tensors: Sequence[Tensor]) -> list[np.ndarray]:
    for t in tensors:
        t.requires_grad = True
        t.grad = None
    with Tape() as tape:
        loss = fn()
    backward(loss, tape)
    return [np.zeros(t.shape) if t.grad is None else t.grad for t in tensors]


def relative_error(a: np.ndarray, b: np.ndarray) -> float:
    num = np.linalg.norm(np.ravel(a) - np.ravel(b))
    den = max(np.linalg.norm(np.ravel(a)), np.linalg.norm(np.ravel(b)), 1e-12)
    return float(num / den)


def check_gradients(fn: Callable[[], Tensor], tensors: Sequence[Tensor], eps: float = 1e-6,
                    max_entries: int | None = None, rng: np.random.Generator | None = None,
                    largest: int = 0, combine: bool = False) -> float:
    """Worst relative error between analytic and numeric gradients.

    With ``max_entries`` only that many randomly chosen positions per tensor
    are compared. ``largest`` adds that many positions with the biggest
    analytic magnitude, so a tensor whose gradient is mostly exact zeros
    (kernel taps that only ever see padding) is not judged on rounding noise
    alone. With ``combine`` the compared entries of all tensors form one
    vector and its single relative error is returned.
    """
    analytic = analytic_grads(fn, tensors)
    worst = 0.0
    pieces: list[tuple[np.ndarray, np.ndarray]] = []
    for t, a in zip(tensors, analytic):
        idx = None
        if max_entries is not None and t.size > max_entries + largest:
            rng = rng or np.random.default_rng(0)
            idx = rng.choice(t.size, size=max_entries, replace=False)
            if largest:
                top = np.argsort(-np.abs(a.reshape(-1)), kind="stable")[:largest]
                idx = np.union1d(idx, top)
        n = numeric_grad(fn, t, eps, idx)
        if idx is not None:
            a = a.reshape(-1)[idx]
            n = n.reshape(-1)[idx]
        pieces.append((np.ravel(a), np.ravel(n)))
        worst = max(worst, relative_error(a, n))
    if combine and pieces:
        return relative_error(np.concatenate([a for a, _ in pieces]),
                              np.concatenate([n for _, n in pieces]))
    return worst
