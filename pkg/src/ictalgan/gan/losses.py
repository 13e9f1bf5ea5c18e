"""Least-squares adversarial losses."""

from __future__ import annotations

from ..errors import DimensionError, UsageError
from ..tensor import Tensor, abs_


def d_loss(real_scores: Tensor, fake_scores: Tensor) -> Tensor:
    """mean((D(x) - 1)^2) + mean(D(G(x))^2)."""
    if real_scores.size == 0 or fake_scores.size == 0:
        raise UsageError("d_loss needs non-empty score batches")
    return ((real_scores - 1.0) ** 2).mean() + (fake_scores ** 2).mean()


def g_loss_terms(fake_scores: Tensor, generated: Tensor, reference: Tensor,
                 lam: float) -> tuple[Tensor, Tensor]:
    """Return the adversarial term and the lambda-weighted mean absolute error separately."""
    if fake_scores.size == 0:
        raise UsageError("g_loss needs a non-empty score batch")
    if generated.shape != reference.shape:
        raise DimensionError(f"generated {generated.shape} vs reference {reference.shape}")
    if lam < 0:
        raise UsageError("lambda must be non-negative")
    adversarial = ((fake_scores - 1.0) ** 2).mean()
    l1 = abs_(generated - reference).mean() * lam
    return adversarial, l1


def g_loss(fake_scores: Tensor, generated: Tensor, reference: Tensor, lam: float = 100.0) -> Tensor:
    adversarial, l1 = g_loss_terms(fake_scores, generated, reference, lam)
    return adversarial + l1
